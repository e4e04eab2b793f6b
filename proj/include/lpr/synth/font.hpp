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

#ifndef LPR_SYNTH_FONT_HPP
#define LPR_SYNTH_FONT_HPP

#include <map>
#include <string>

#include "lpr/image.hpp"

namespace lpr::synth {

// One glyph as an antialiased coverage bitmap. `top` is the offset of the
// glyph's first row inside the shared vertical band, so characters with
// different heights share a baseline.
struct Glyph {
    int width = 0;
    int height = 0;
    int top = 0;
    // coverage in [0,1], row-major, width*height values
    std::vector<double> alpha;
};

// Bitmap font loaded from the committed glyph asset (scripts/make_font_asset.py
// regenerates it from a TTF). All glyphs live in one band of band_height rows.
struct GlyphSet {
    std::string source;
    int band_height = 0;
    std::map<char, Glyph> glyphs;

    bool has(char c) const { return glyphs.count(c) > 0; }
    // raises a font error for characters outside the set
    const Glyph& get(char c) const;
};

GlyphSet load_glyph_set(const std::string& path);

// Coverage bitmap rescaled to (w, h) with bilinear interpolation.
ImageBuffer glyph_bitmap(const Glyph& g, int w, int h);

} // namespace lpr::synth

#endif // LPR_SYNTH_FONT_HPP
