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

#include "lpr/synth/font.hpp"

#include <fstream>

#include <json.hpp>

#include "lpr/error.hpp"

namespace lpr::synth {

const Glyph& GlyphSet::get(char c) const {
    auto it = glyphs.find(c);
    if (it == glyphs.end())
        raise(ErrorKind::font, std::string("no glyph for '") + c + "' in " + source);
    return it->second;
}

GlyphSet load_glyph_set(const std::string& path) {
    std::ifstream f(path);
    if (!f) raise(ErrorKind::io, "cannot open glyph asset " + path);
    nlohmann::json j;
    try {
        f >> j;
    } catch (const std::exception& e) {
        raise(ErrorKind::format, "glyph asset is not valid JSON: " + std::string(e.what()));
    }
    if (j.value("schema", "") != "plate-font/1")
        raise(ErrorKind::format, "glyph asset has an unknown schema");

    GlyphSet set;
    set.source = j.value("source", path);
    set.band_height = j.at("band_height").get<int>();
    if (set.band_height < 1)
        raise(ErrorKind::format, "glyph band height must be positive");

    for (auto& [key, val] : j.at("glyphs").items()) {
        if (key.size() != 1)
            raise(ErrorKind::format, "glyph key '" + key + "' is not one character");
        Glyph g;
        g.width = val.at("w").get<int>();
        g.height = val.at("h").get<int>();
        g.top = val.at("top").get<int>();
        if (g.width < 1 || g.height < 1 || g.top < 0 ||
            g.top + g.height > set.band_height)
            raise(ErrorKind::format, "glyph '" + key + "' does not fit its band");
        const auto& rows = val.at("rows");
        if (static_cast<int>(rows.size()) != g.height)
            raise(ErrorKind::format, "glyph '" + key + "' row count mismatch");
        g.alpha.reserve(static_cast<std::size_t>(g.width) * g.height);
        for (const auto& row : rows) {
            const std::string& s = row.get_ref<const std::string&>();
            if (static_cast<int>(s.size()) != g.width * 2)
                raise(ErrorKind::format, "glyph '" + key + "' row width mismatch");
            for (int x = 0; x < g.width; ++x) {
                int hi = std::stoi(s.substr(static_cast<std::size_t>(2) * x, 2), nullptr, 16);
                g.alpha.push_back(hi / 255.0);
            }
        }
        set.glyphs[key[0]] = std::move(g);
    }
    if (set.glyphs.empty())
        raise(ErrorKind::format, "glyph asset holds no glyphs");
    return set;
}

ImageBuffer glyph_bitmap(const Glyph& g, int w, int h) {
    ImageBuffer src;
    src.width = g.width;
    src.height = g.height;
    src.channels = 1;
    src.pixels = g.alpha;
    return resize(src, w, h);
}

} // namespace lpr::synth
