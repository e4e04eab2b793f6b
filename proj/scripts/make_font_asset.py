#!/usr/bin/env python3
"""Rasterize the plate glyph set from a TTF font into assets/plate_font.json.

The engine consumes glyphs as plain grayscale bitmaps so it has no runtime
font dependency. Rerun this script only when changing the glyph source; the
generated JSON is committed as a data file.
"""
import argparse
import json
import os

from PIL import Image, ImageDraw, ImageFont

GLYPHS = "0123456789ABCDEFGHIJKLMNOPRSTUVYZ"
DEFAULT_FONT = "/usr/share/fonts/truetype/dejavu/DejaVuSans-Bold.ttf"


def rasterize(font_path: str, size: int):
    font = ImageFont.truetype(font_path, size)
    canvas_h = size * 3
    baseline = size * 2
    glyphs = {}
    band_top, band_bot = canvas_h, 0
    raw = {}
    for ch in GLYPHS:
        img = Image.new("L", (size * 2, canvas_h), 0)
        draw = ImageDraw.Draw(img)
        draw.text((size // 2, baseline), ch, fill=255, font=font, anchor="ls")
        px = img.load()
        w, h = img.size
        xs = [x for x in range(w) if any(px[x, y] for y in range(h))]
        ys = [y for y in range(h) if any(px[x, y] for x in range(w))]
        if not xs or not ys:
            raise SystemExit(f"glyph '{ch}' rendered empty")
        raw[ch] = (img, min(xs), max(xs), min(ys), max(ys))
        band_top = min(band_top, min(ys))
        band_bot = max(band_bot, max(ys))

    band_h = band_bot - band_top + 1
    for ch, (img, x0, x1, y0, y1) in raw.items():
        px = img.load()
        rows = []
        for y in range(y0, y1 + 1):
            rows.append("".join(f"{px[x, y]:02x}" for x in range(x0, x1 + 1)))
        glyphs[ch] = {
            "w": x1 - x0 + 1,
            "h": y1 - y0 + 1,
            "top": y0 - band_top,
            "rows": rows,
        }
    return band_h, glyphs


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--font", default=DEFAULT_FONT)
    ap.add_argument("--size", type=int, default=64)
    ap.add_argument("--out", default=os.path.join(
        os.path.dirname(__file__), "..", "assets", "plate_font.json"))
    args = ap.parse_args()

    band_h, glyphs = rasterize(args.font, args.size)
    doc = {
        "schema": "plate-font/1",
        "source": os.path.basename(args.font),
        "band_height": band_h,
        "glyphs": glyphs,
    }
    with open(args.out, "w") as f:
        json.dump(doc, f, separators=(",", ":"))
        f.write("\n")
    print(f"wrote {args.out}: {len(glyphs)} glyphs, band height {band_h}")


if __name__ == "__main__":
    main()
