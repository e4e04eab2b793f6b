// Copyright 2026 The platedpm Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "lpr/synth/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>

#include <json.hpp>

#include "lpr/error.hpp"
#include "lpr/image_codec.hpp"
#include "lpr/parallel.hpp"

namespace lpr::synth {

namespace {

const std::string& group_alphabet(GroupKind k) {
    return k == GroupKind::digits ? PLATE_DIGITS : PLATE_LETTERS;
}

// 3x3 homogeneous transform, row-major
using Mat3 = std::array<double, 9>;

Mat3 mat_mul(const Mat3& a, const Mat3& b) {
    Mat3 r{};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            r[i * 3 + j] = a[i * 3] * b[j] + a[i * 3 + 1] * b[3 + j] + a[i * 3 + 2] * b[6 + j];
    return r;
}

void mat_apply(const Mat3& m, double x, double y, double& ox, double& oy) {
    double w = m[6] * x + m[7] * y + m[8];
    ox = (m[0] * x + m[1] * y + m[2]) / w;
    oy = (m[3] * x + m[4] * y + m[5]) / w;
}

Mat3 rotation_about(double cx, double cy, double deg) {
    double rad = deg * std::numbers::pi / 180.0;
    double c = std::cos(rad), s = std::sin(rad);
    return {c, -s, cx - c * cx + s * cy,
            s, c,  cy - s * cx - c * cy,
            0, 0,  1};
}

// homography sending src[i] -> dst[i] for four point pairs, solved by
// Gaussian elimination with partial pivoting (h22 fixed to 1)
Mat3 homography_from_corners(const std::array<double, 8>& src,
                             const std::array<double, 8>& dst) {
    double A[8][9] = {};
    for (int i = 0; i < 4; ++i) {
        double x = src[2 * i], y = src[2 * i + 1];
        double u = dst[2 * i], v = dst[2 * i + 1];
        double* r0 = A[2 * i];
        double* r1 = A[2 * i + 1];
        r0[0] = x; r0[1] = y; r0[2] = 1; r0[6] = -u * x; r0[7] = -u * y; r0[8] = u;
        r1[3] = x; r1[4] = y; r1[5] = 1; r1[6] = -v * x; r1[7] = -v * y; r1[8] = v;
    }
    for (int col = 0; col < 8; ++col) {
        int piv = col;
        for (int r = col + 1; r < 8; ++r)
            if (std::abs(A[r][col]) > std::abs(A[piv][col])) piv = r;
        if (std::abs(A[piv][col]) < 1e-12)
            raise(ErrorKind::parameter, "degenerate corner warp");
        if (piv != col)
            for (int c = 0; c < 9; ++c) std::swap(A[piv][c], A[col][c]);
        for (int r = 0; r < 8; ++r) {
            if (r == col) continue;
            double f = A[r][col] / A[col][col];
            if (f == 0.0) continue;
            for (int c = col; c < 9; ++c) A[r][c] -= f * A[col][c];
        }
    }
    Mat3 h;
    for (int i = 0; i < 8; ++i) h[i] = A[i][8] / A[i][i];
    h[8] = 1.0;
    return h;
}

bool has_geometry(const AugmentParams& p) {
    if (p.rotation_deg != 0.0) return true;
    for (double v : p.corner_dx)
        if (v != 0.0) return true;
    for (double v : p.corner_dy)
        if (v != 0.0) return true;
    return false;
}

void image_corners(int w, int h, std::array<double, 8>& pts) {
    pts = {0.0, 0.0,
           static_cast<double>(w - 1), 0.0,
           static_cast<double>(w - 1), static_cast<double>(h - 1),
           0.0, static_cast<double>(h - 1)};
}

// forward geometric map of apply_augment: rotate about the center, then
// pull the corners to their jittered positions
Mat3 forward_warp(const AugmentParams& p, int w, int h) {
    std::array<double, 8> src, dst;
    image_corners(w, h, src);
    for (int i = 0; i < 4; ++i) {
        dst[2 * i] = src[2 * i] + p.corner_dx[i] * w;
        dst[2 * i + 1] = src[2 * i + 1] + p.corner_dy[i] * w;
    }
    Mat3 corner = homography_from_corners(src, dst);
    Mat3 rot = rotation_about((w - 1) / 2.0, (h - 1) / 2.0, p.rotation_deg);
    return mat_mul(corner, rot);
}

Mat3 inverse_warp(const AugmentParams& p, int w, int h) {
    std::array<double, 8> src, dst;
    image_corners(w, h, src);
    for (int i = 0; i < 4; ++i) {
        dst[2 * i] = src[2 * i] + p.corner_dx[i] * w;
        dst[2 * i + 1] = src[2 * i + 1] + p.corner_dy[i] * w;
    }
    Mat3 corner_inv = homography_from_corners(dst, src);
    Mat3 rot_inv = rotation_about((w - 1) / 2.0, (h - 1) / 2.0, -p.rotation_deg);
    return mat_mul(rot_inv, corner_inv);
}

// bilinear sample with clamp-to-edge; exact at integer coordinates
double sample_clamped(const ImageBuffer& img, double x, double y, int c) {
    x = std::clamp(x, 0.0, static_cast<double>(img.width - 1));
    y = std::clamp(y, 0.0, static_cast<double>(img.height - 1));
    int x0 = static_cast<int>(x);
    int y0 = static_cast<int>(y);
    int x1 = std::min(x0 + 1, img.width - 1);
    int y1 = std::min(y0 + 1, img.height - 1);
    double tx = x - x0, ty = y - y0;
    double top = img.at(x0, y0, c) + tx * (img.at(x1, y0, c) - img.at(x0, y0, c));
    double bot = img.at(x0, y1, c) + tx * (img.at(x1, y1, c) - img.at(x0, y1, c));
    return top + ty * (bot - top);
}

ImageBuffer gaussian_blur(const ImageBuffer& img, double sigma) {
    int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
    std::vector<double> k(static_cast<std::size_t>(radius) + 1);
    double sum = 0.0;
    for (int i = 0; i <= radius; ++i) {
        k[i] = std::exp(-0.5 * i * i / (sigma * sigma));
        sum += (i == 0) ? k[i] : 2.0 * k[i];
    }
    for (double& v : k) v /= sum;

    auto pass = [&](const ImageBuffer& src, bool horizontal) {
        ImageBuffer out = src;
        for (int y = 0; y < src.height; ++y)
            for (int x = 0; x < src.width; ++x)
                for (int c = 0; c < src.channels; ++c) {
                    double acc = k[0] * src.at(x, y, c);
                    for (int i = 1; i <= radius; ++i) {
                        int xa = horizontal ? std::max(x - i, 0) : x;
                        int xb = horizontal ? std::min(x + i, src.width - 1) : x;
                        int ya = horizontal ? y : std::max(y - i, 0);
                        int yb = horizontal ? y : std::min(y + i, src.height - 1);
                        acc += k[i] * (src.at(xa, ya, c) + src.at(xb, yb, c));
                    }
                    out.at(x, y, c) = acc;
                }
        return out;
    };
    return pass(pass(img, true), false);
}

std::string spectrum_name(Spectrum s) { return s == Spectrum::nir ? "nir" : "rgb"; }

Spectrum spectrum_from(const std::string& s) {
    if (s == "nir") return Spectrum::nir;
    if (s == "rgb") return Spectrum::rgb;
    raise(ErrorKind::format, "unknown spectrum '" + s + "'");
}

nlohmann::json box_json(const BoundingBox& b) {
    return nlohmann::json::array({b.x, b.y, b.w, b.h});
}

BoundingBox box_from_json(const nlohmann::json& j) {
    if (!j.is_array() || j.size() != 4)
        raise(ErrorKind::format, "box must be [x,y,w,h]");
    return {j[0].get<int>(), j[1].get<int>(), j[2].get<int>(), j[3].get<int>()};
}

} // namespace

PlateFormat default_plate_format() {
    PlateFormat fmt;
    fmt.groups = {{GroupKind::digits, 2, 2},
                  {GroupKind::letters, 1, 3},
                  {GroupKind::digits, 2, 4}};
    fmt.total_min = 7;
    fmt.total_max = 8;
    return fmt;
}

void validate_plate_format(const PlateFormat& fmt) {
    if (fmt.groups.size() < 2)
        raise(ErrorKind::parameter, "plate format needs at least two groups");
    const auto& first = fmt.groups.front();
    if (first.kind != GroupKind::digits || first.min_len != 2 || first.max_len != 2)
        raise(ErrorKind::parameter, "plate format must open with exactly two digits");
    const auto& last = fmt.groups.back();
    if (last.kind != GroupKind::digits || last.min_len < 2 || last.max_len > 4 ||
        last.min_len > last.max_len)
        raise(ErrorKind::parameter, "plate format must close with two to four digits");
    int lo = 0, hi = 0;
    for (const auto& g : fmt.groups) {
        if (g.min_len < 0 || g.min_len > g.max_len)
            raise(ErrorKind::parameter, "plate format group has an empty length range");
        lo += g.min_len;
        hi += g.max_len;
    }
    if (fmt.total_min > fmt.total_max || hi < fmt.total_min || lo > fmt.total_max)
        raise(ErrorKind::parameter, "plate format total length is unsatisfiable");
}

namespace {

// all group-length tuples meeting the total bounds, lexicographic
void collect_length_tuples(const PlateFormat& fmt, std::size_t gi, int total,
                           std::vector<int>& cur, std::vector<std::vector<int>>& out) {
    if (gi == fmt.groups.size()) {
        if (total >= fmt.total_min && total <= fmt.total_max) out.push_back(cur);
        return;
    }
    for (int len = fmt.groups[gi].min_len; len <= fmt.groups[gi].max_len; ++len) {
        cur.push_back(len);
        collect_length_tuples(fmt, gi + 1, total + len, cur, out);
        cur.pop_back();
    }
}

bool matches_from(const PlateFormat& fmt, const std::string& text, std::size_t gi,
                  std::size_t pos) {
    if (gi == fmt.groups.size()) return pos == text.size();
    const auto& g = fmt.groups[gi];
    const std::string& alphabet = group_alphabet(g.kind);
    for (int len = g.min_len; len <= g.max_len; ++len) {
        if (pos + len > text.size()) break;
        bool ok = true;
        for (int i = 0; i < len; ++i)
            if (alphabet.find(text[pos + i]) == std::string::npos) {
                ok = false;
                break;
            }
        if (ok && matches_from(fmt, text, gi + 1, pos + len)) return true;
    }
    return false;
}

} // namespace

bool matches_plate_format(const PlateFormat& fmt, const std::string& text) {
    if (static_cast<int>(text.size()) < fmt.total_min ||
        static_cast<int>(text.size()) > fmt.total_max)
        return false;
    return matches_from(fmt, text, 0, 0);
}

std::string generate_plate_string(const PlateFormat& fmt, Rng& rng) {
    validate_plate_format(fmt);
    std::vector<std::vector<int>> tuples;
    std::vector<int> cur;
    collect_length_tuples(fmt, 0, 0, cur, tuples);
    if (tuples.empty())
        raise(ErrorKind::parameter, "plate format admits no valid length combination");
    const auto& lens = tuples[rng.uniform_index(tuples.size())];

    std::string text;
    for (std::size_t gi = 0; gi < fmt.groups.size(); ++gi) {
        const std::string& alphabet = group_alphabet(fmt.groups[gi].kind);
        for (int i = 0; i < lens[gi]; ++i)
            text += alphabet[rng.uniform_index(alphabet.size())];
    }
    return text;
}

RenderedPlate render_plate(const std::string& text, const RenderStyle& style,
                           const GlyphSet& glyphs, Rng& rng) {
    if (text.empty())
        raise(ErrorKind::precondition, "cannot render an empty plate string");
    if (style.char_height < 16)
        raise(ErrorKind::precondition, "character height below the 16 px minimum");
    if (!(style.width_scale > 0.0) || style.width_scale > 2.0)
        raise(ErrorKind::precondition, "glyph width scale out of (0,2]");
    if (style.gap < 1 || style.margin_x < 0 || style.margin_y < 0)
        raise(ErrorKind::precondition, "plate layout margins out of range");
    if (style.background < 0.0 || style.background > 1.0 ||
        style.foreground < 0.0 || style.foreground > 1.0)
        raise(ErrorKind::precondition, "plate intensities must lie in [0,1]");

    const double scale = static_cast<double>(style.char_height) / glyphs.band_height;

    double bg = std::clamp(style.background +
                               rng.uniform(-style.intensity_jitter, style.intensity_jitter),
                           0.0, 1.0);
    double fg = std::clamp(style.foreground +
                               rng.uniform(-style.intensity_jitter, style.intensity_jitter),
                           0.0, 1.0);
    double tint[3] = {1.0, 1.0, 1.0};
    if (style.spectrum == Spectrum::rgb)
        for (double& t : tint)
            t = 1.0 + rng.uniform(-style.tint_jitter, style.tint_jitter);

    // layout pass: jittered gaps and baselines, then the canvas size
    struct Placed {
        char label;
        ImageBuffer bitmap;
        int x = 0, y = 0;
    };
    std::vector<Placed> placed;
    const int band_px = std::max(1, static_cast<int>(std::lround(glyphs.band_height * scale)));
    const int height = 2 * style.margin_y + band_px;
    int cursor = style.margin_x;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const Glyph& g = glyphs.get(text[i]);
        int gw = std::max(1, static_cast<int>(std::lround(g.width * scale * style.width_scale)));
        int gh = std::max(1, static_cast<int>(std::lround(g.height * scale)));
        int gtop = static_cast<int>(std::lround(g.top * scale));
        if (i > 0) {
            int jitter = style.gap_jitter > 0
                             ? rng.uniform_int(-style.gap_jitter, style.gap_jitter)
                             : 0;
            cursor += std::max(1, style.gap + jitter);
        }
        int baseline = style.baseline_jitter > 0
                           ? rng.uniform_int(-style.baseline_jitter, style.baseline_jitter)
                           : 0;
        Placed p;
        p.label = text[i];
        p.bitmap = glyph_bitmap(g, gw, gh);
        p.x = cursor;
        p.y = std::clamp(style.margin_y + gtop + baseline, 0, height - gh);
        placed.push_back(std::move(p));
        cursor += gw;
    }
    const int width = cursor + style.margin_x;

    ImageBuffer canvas;
    canvas.width = width;
    canvas.height = height;
    canvas.channels = 1;
    canvas.pixels.assign(static_cast<std::size_t>(width) * height, bg);
    for (const auto& p : placed)
        for (int y = 0; y < p.bitmap.height; ++y)
            for (int x = 0; x < p.bitmap.width; ++x) {
                double a = p.bitmap.at(x, y);
                double& v = canvas.at(p.x + x, p.y + y);
                v = v + a * (fg - v);
            }

    RenderedPlate out;
    out.image.width = width;
    out.image.height = height;
    out.image.channels = 3;
    out.image.pixels.resize(static_cast<std::size_t>(width) * height * 3);
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x) {
            double v = canvas.at(x, y);
            for (int c = 0; c < 3; ++c)
                out.image.at(x, y, c) = std::clamp(v * tint[c], 0.0, 1.0);
        }
    for (const auto& p : placed)
        out.chars.push_back({p.label, {p.x, p.y, p.bitmap.width, p.bitmap.height}});
    return out;
}

AugmentParams sample_augment(Rng& rng) {
    AugmentParams p;
    p.blur_sigma = rng.uniform(0.0, 1.5);
    p.noise_sigma = rng.uniform(0.0, 0.05);
    p.brightness = rng.uniform(-0.2, 0.2);
    p.contrast = rng.uniform(-0.2, 0.2);
    p.rotation_deg = rng.uniform(-3.0, 3.0);
    for (int i = 0; i < 4; ++i) p.corner_dx[i] = rng.uniform(-0.02, 0.02);
    for (int i = 0; i < 4; ++i) p.corner_dy[i] = rng.uniform(-0.02, 0.02);
    return p;
}

ImageBuffer apply_augment(const ImageBuffer& img, const AugmentParams& params,
                          std::uint64_t noise_seed) {
    ImageBuffer out = img;

    if (has_geometry(params)) {
        Mat3 inv = inverse_warp(params, img.width, img.height);
        for (int y = 0; y < img.height; ++y)
            for (int x = 0; x < img.width; ++x) {
                double sx, sy;
                mat_apply(inv, x, y, sx, sy);
                for (int c = 0; c < img.channels; ++c)
                    out.at(x, y, c) = sample_clamped(img, sx, sy, c);
            }
    }

    if (params.blur_sigma > 0.0) out = gaussian_blur(out, params.blur_sigma);

    if (params.brightness != 0.0 || params.contrast != 0.0) {
        double gain = 1.0 + params.contrast;
        for (double& v : out.pixels) v = (v - 0.5) * gain + 0.5 + params.brightness;
    }

    if (params.noise_sigma > 0.0) {
        Rng noise(noise_seed);
        for (int y = 0; y < out.height; ++y)
            for (int x = 0; x < out.width; ++x) {
                double n = params.noise_sigma * noise.normal();
                for (int c = 0; c < out.channels; ++c) out.at(x, y, c) += n;
            }
    }

    if (has_geometry(params) || params.blur_sigma > 0.0 ||
        params.brightness != 0.0 || params.contrast != 0.0 || params.noise_sigma > 0.0)
        for (double& v : out.pixels) v = std::clamp(v, 0.0, 1.0);
    return out;
}

BoundingBox warp_box(const BoundingBox& box, const AugmentParams& params,
                     int img_w, int img_h) {
    if (!has_geometry(params)) return box;
    Mat3 fwd = forward_warp(params, img_w, img_h);
    double xs[4] = {static_cast<double>(box.x), static_cast<double>(box.x + box.w - 1),
                    static_cast<double>(box.x + box.w - 1), static_cast<double>(box.x)};
    double ys[4] = {static_cast<double>(box.y), static_cast<double>(box.y),
                    static_cast<double>(box.y + box.h - 1), static_cast<double>(box.y + box.h - 1)};
    double minx = 1e300, miny = 1e300, maxx = -1e300, maxy = -1e300;
    for (int i = 0; i < 4; ++i) {
        double ox, oy;
        mat_apply(fwd, xs[i], ys[i], ox, oy);
        minx = std::min(minx, ox);
        maxx = std::max(maxx, ox);
        miny = std::min(miny, oy);
        maxy = std::max(maxy, oy);
    }
    int x0 = std::clamp(static_cast<int>(std::floor(minx)), 0, img_w - 1);
    int y0 = std::clamp(static_cast<int>(std::floor(miny)), 0, img_h - 1);
    int x1 = std::clamp(static_cast<int>(std::ceil(maxx)), 0, img_w - 1);
    int y1 = std::clamp(static_cast<int>(std::ceil(maxy)), 0, img_h - 1);
    return {x0, y0, std::max(1, x1 - x0 + 1), std::max(1, y1 - y0 + 1)};
}

ImageBuffer augment(const ImageBuffer& img, Rng& rng) {
    AugmentParams p = sample_augment(rng);
    return apply_augment(img, p, rng.next_u64());
}

std::vector<SynthRecord> generate_dataset(const DatasetConfig& cfg,
                                          const GlyphSet& glyphs,
                                          const std::string& out_dir,
                                          int threads) {
    if (cfg.count < 1)
        raise(ErrorKind::precondition, "dataset needs at least one record");
    if (std::abs(cfg.train_fraction + cfg.val_fraction - 1.0) > 1e-9 ||
        cfg.train_fraction < 0.0 || cfg.val_fraction < 0.0)
        raise(ErrorKind::parameter, "split fractions must be non-negative and sum to 1");
    if (cfg.nir_mix < 0.0 || cfg.nir_mix > 1.0)
        raise(ErrorKind::parameter, "NIR mix must lie in [0,1]");
    validate_plate_format(cfg.format);

    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(fs::path(out_dir) / "images", ec);
    if (ec) raise(ErrorKind::io, "cannot create " + out_dir + ": " + ec.message());

    const int n_train = static_cast<int>(std::lround(cfg.count * cfg.train_fraction));

    std::vector<SynthRecord> records(static_cast<std::size_t>(cfg.count));
    parallel_for(static_cast<std::size_t>(cfg.count), threads, [&](std::size_t i) {
        std::uint64_t seed = Rng::derive(cfg.seed, i);
        Rng rng(seed);
        SynthRecord rec;
        rec.index = static_cast<int>(i);
        rec.split = static_cast<int>(i) < n_train ? "train" : "val";
        rec.seed = seed;
        rec.plate = generate_plate_string(cfg.format, rng);
        rec.spectrum = rng.uniform() < cfg.nir_mix ? Spectrum::nir : Spectrum::rgb;

        RenderStyle style = cfg.style;
        style.spectrum = rec.spectrum;
        RenderedPlate r = render_plate(rec.plate, style, glyphs, rng);

        ImageBuffer img = rec.spectrum == Spectrum::nir ? to_grayscale(r.image)
                                                        : std::move(r.image);
        rec.chars = std::move(r.chars);
        rec.plate_box = {0, 0, img.width, img.height};

        if (rec.split == "train" && cfg.augment_train) {
            AugmentParams p = sample_augment(rng);
            img = apply_augment(img, p, rng.next_u64());
            for (auto& cb : rec.chars)
                cb.box = warp_box(cb.box, p, img.width, img.height);
            rec.augmented = true;
        }

        char name[32];
        std::snprintf(name, sizeof name, "images/%06d.png", rec.index);
        rec.image_path = name;
        save_png(img, (fs::path(out_dir) / rec.image_path).string());
        records[i] = std::move(rec);
    });

    write_manifest(cfg, records, (fs::path(out_dir) / "manifest.jsonl").string());
    return records;
}

void write_manifest(const DatasetConfig& cfg, const std::vector<SynthRecord>& records,
                    const std::string& path) {
    std::ofstream f(path);
    if (!f) raise(ErrorKind::io, "cannot open " + path + " for writing");

    nlohmann::json groups = nlohmann::json::array();
    for (const auto& g : cfg.format.groups)
        groups.push_back({{"kind", g.kind == GroupKind::digits ? "digits" : "letters"},
                          {"min", g.min_len},
                          {"max", g.max_len}});
    nlohmann::json header = {
        {"schema", "plate-synth/1"},
        {"count", cfg.count},
        {"seed", cfg.seed},
        {"train_fraction", cfg.train_fraction},
        {"val_fraction", cfg.val_fraction},
        {"nir_mix", cfg.nir_mix},
        {"augment_train", cfg.augment_train},
        {"format", {{"groups", groups},
                    {"total_min", cfg.format.total_min},
                    {"total_max", cfg.format.total_max}}},
        {"style", {{"font", cfg.style.font_id},
                   {"char_height", cfg.style.char_height},
                   {"width_scale", cfg.style.width_scale},
                   {"gap", cfg.style.gap},
                   {"margin_x", cfg.style.margin_x},
                   {"margin_y", cfg.style.margin_y},
                   {"background", cfg.style.background},
                   {"foreground", cfg.style.foreground}}},
        {"augment_ranges", {{"blur_sigma", {0.0, 1.5}},
                            {"noise_sigma", {0.0, 0.05}},
                            {"brightness", {-0.2, 0.2}},
                            {"contrast", {-0.2, 0.2}},
                            {"rotation_deg", {-3.0, 3.0}},
                            {"corner_frac", 0.02}}},
    };
    f << header.dump() << "\n";

    for (const auto& r : records) {
        nlohmann::json chars = nlohmann::json::array();
        for (const auto& cb : r.chars)
            chars.push_back({{"label", std::string(1, cb.label)}, {"box", box_json(cb.box)}});
        nlohmann::json line = {
            {"index", r.index},
            {"split", r.split},
            {"image", r.image_path},
            {"plate", r.plate},
            {"plate_box", box_json(r.plate_box)},
            {"chars", std::move(chars)},
            {"spectrum", spectrum_name(r.spectrum)},
            {"seed", r.seed},
            {"augmented", r.augmented},
        };
        f << line.dump() << "\n";
    }
    if (!f) raise(ErrorKind::io, "short write to " + path);
}

std::vector<SynthRecord> load_manifest(const std::string& path) {
    std::ifstream f(path);
    if (!f) raise(ErrorKind::io, "cannot open manifest " + path);
    std::string line;
    if (!std::getline(f, line))
        raise(ErrorKind::format, "manifest is empty");
    nlohmann::json header;
    try {
        header = nlohmann::json::parse(line);
    } catch (const std::exception& e) {
        raise(ErrorKind::format, "manifest header is not valid JSON: " + std::string(e.what()));
    }
    if (header.value("schema", "") != "plate-synth/1")
        raise(ErrorKind::format, "manifest has an unknown schema");

    std::vector<SynthRecord> records;
    std::size_t lineno = 1;
    while (std::getline(f, line)) {
        ++lineno;
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const std::exception& e) {
            raise(ErrorKind::format, "manifest line " + std::to_string(lineno) +
                                         " is not valid JSON: " + e.what());
        }
        SynthRecord r;
        r.index = j.at("index").get<int>();
        r.split = j.at("split").get<std::string>();
        r.image_path = j.at("image").get<std::string>();
        r.plate = j.at("plate").get<std::string>();
        r.plate_box = box_from_json(j.at("plate_box"));
        for (const auto& c : j.at("chars")) {
            std::string label = c.at("label").get<std::string>();
            if (label.size() != 1)
                raise(ErrorKind::format, "character label must be one character");
            r.chars.push_back({label[0], box_from_json(c.at("box"))});
        }
        r.spectrum = spectrum_from(j.at("spectrum").get<std::string>());
        r.seed = j.at("seed").get<std::uint64_t>();
        r.augmented = j.value("augmented", false);
        records.push_back(std::move(r));
    }
    return records;
}

} // namespace lpr::synth
