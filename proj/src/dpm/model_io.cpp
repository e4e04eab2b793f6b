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

#include "lpr/dpm/model_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "lpr/error.hpp"

namespace lpr::dpm {

namespace {

constexpr char MAGIC[4] = {'P', 'D', 'P', 'M'};

struct Writer {
    std::vector<std::uint8_t> out;

    void u8(std::uint8_t v) { out.push_back(v); }
    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void i32(std::int32_t v) { u32(static_cast<std::uint32_t>(v)); }
    void f64(double v) {
        std::uint64_t b = std::bit_cast<std::uint64_t>(v);
        for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(b >> (8 * i)));
    }
};

struct Reader {
    const std::vector<std::uint8_t>& in;
    std::size_t pos = 0;

    void need(std::size_t n) {
        if (pos + n > in.size())
            raise(ErrorKind::decode, "model file truncated");
    }
    std::uint8_t u8() {
        need(1);
        return in[pos++];
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(in[pos++]) << (8 * i);
        return v;
    }
    std::int32_t i32() { return static_cast<std::int32_t>(u32()); }
    double f64() {
        need(8);
        std::uint64_t b = 0;
        for (int i = 0; i < 8; ++i) b |= static_cast<std::uint64_t>(in[pos++]) << (8 * i);
        return std::bit_cast<double>(b);
    }
};

} // namespace

std::vector<std::uint8_t> serialize_model(const CharacterModelSet& set) {
    validate_model_set(set);
    Writer w;
    w.out.insert(w.out.end(), MAGIC, MAGIC + 4);
    w.u32(MODEL_FORMAT_VERSION);

    w.i32(set.hog.cell_size);
    w.f64(set.hog.clamp);
    w.i32(set.hog.pyramid_levels);
    w.f64(set.hog.scale_step);
    w.i32(set.hog.canonical_height);

    w.u32(static_cast<std::uint32_t>(set.alphabet.size()));
    for (char c : set.alphabet) w.u8(static_cast<std::uint8_t>(c));

    w.u32(static_cast<std::uint32_t>(set.classes.size()));
    for (const auto& cls : set.classes) {
        w.u8(static_cast<std::uint8_t>(cls.label));
        w.u32(static_cast<std::uint32_t>(cls.mixtures.size()));
        for (const auto& m : cls.mixtures) {
            w.f64(m.bias);
            w.f64(m.box_frac_x);
            w.f64(m.box_frac_y);
            w.u32(static_cast<std::uint32_t>(m.parts.size()));
            for (const auto& p : m.parts) {
                w.i32(p.cells_x);
                w.i32(p.cells_y);
                w.i32(p.dim);
                for (double v : p.weights) w.f64(v);
            }
            w.u32(static_cast<std::uint32_t>(m.edges.size()));
            for (const auto& e : m.edges) {
                w.i32(e.parent);
                w.i32(e.child);
                w.i32(e.anchor_dx);
                w.i32(e.anchor_dy);
                w.f64(e.deform.a);
                w.f64(e.deform.b);
                w.f64(e.deform.c);
                w.f64(e.deform.d);
            }
        }
    }
    return std::move(w.out);
}

CharacterModelSet deserialize_model(const std::vector<std::uint8_t>& bytes) {
    Reader r{bytes};
    r.need(4);
    if (std::memcmp(bytes.data(), MAGIC, 4) != 0)
        raise(ErrorKind::format, "not a model file (bad magic)");
    r.pos = 4;
    std::uint32_t version = r.u32();
    if (version != MODEL_FORMAT_VERSION)
        raise(ErrorKind::format, "unsupported model format version " + std::to_string(version));

    CharacterModelSet set;
    set.hog.cell_size = r.i32();
    set.hog.clamp = r.f64();
    set.hog.pyramid_levels = r.i32();
    set.hog.scale_step = r.f64();
    set.hog.canonical_height = r.i32();

    std::uint32_t alen = r.u32();
    if (alen > 256) raise(ErrorKind::format, "implausible alphabet length");
    set.alphabet.resize(alen);
    for (auto& c : set.alphabet) c = static_cast<char>(r.u8());

    std::uint32_t ncls = r.u32();
    if (ncls != alen) raise(ErrorKind::format, "class count does not match alphabet");
    set.classes.resize(ncls);
    for (auto& cls : set.classes) {
        cls.label = static_cast<char>(r.u8());
        std::uint32_t nmix = r.u32();
        if (nmix == 0 || nmix > 64) raise(ErrorKind::format, "implausible mixture count");
        cls.mixtures.resize(nmix);
        for (auto& m : cls.mixtures) {
            m.label = cls.label;
            m.bias = r.f64();
            m.box_frac_x = r.f64();
            m.box_frac_y = r.f64();
            std::uint32_t nparts = r.u32();
            if (nparts == 0 || nparts > 256) raise(ErrorKind::format, "implausible part count");
            m.parts.resize(nparts);
            for (auto& p : m.parts) {
                p.cells_x = r.i32();
                p.cells_y = r.i32();
                p.dim = r.i32();
                if (p.cells_x < 1 || p.cells_y < 1 || p.dim < 1 ||
                    static_cast<std::int64_t>(p.cells_x) * p.cells_y * p.dim > (1 << 26))
                    raise(ErrorKind::format, "implausible filter extent");
                p.weights.resize(static_cast<std::size_t>(p.cells_x) * p.cells_y * p.dim);
                for (double& v : p.weights) v = r.f64();
            }
            std::uint32_t nedges = r.u32();
            if (nedges != nparts - 1) raise(ErrorKind::format, "edge count is not parts-1");
            m.edges.resize(nedges);
            for (auto& e : m.edges) {
                e.parent = r.i32();
                e.child = r.i32();
                e.anchor_dx = r.i32();
                e.anchor_dy = r.i32();
                e.deform.a = r.f64();
                e.deform.b = r.f64();
                e.deform.c = r.f64();
                e.deform.d = r.f64();
            }
        }
    }
    if (r.pos != bytes.size())
        raise(ErrorKind::format, "trailing bytes after model payload");
    validate_model_set(set);
    return set;
}

void save_model(const CharacterModelSet& set, const std::string& path) {
    auto bytes = serialize_model(set);
    std::ofstream f(path, std::ios::binary);
    if (!f) raise(ErrorKind::io, "cannot open " + path + " for writing");
    f.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
    if (!f) raise(ErrorKind::io, "short write to " + path);
}

CharacterModelSet load_model(const std::string& path) {
    std::ifstream f(path, std::ios::binary | std::ios::ate);
    if (!f) raise(ErrorKind::io, "cannot open " + path);
    std::streamsize n = f.tellg();
    f.seekg(0);
    std::vector<std::uint8_t> bytes(static_cast<std::size_t>(n));
    f.read(reinterpret_cast<char*>(bytes.data()), n);
    if (!f) raise(ErrorKind::io, "short read from " + path);
    return deserialize_model(bytes);
}

std::string model_to_json(const CharacterModelSet& set) {
    nlohmann::json j;
    j["format"] = "character-dpm";
    j["version"] = MODEL_FORMAT_VERSION;
    j["alphabet"] = set.alphabet;
    j["features"] = {{"cell_size", set.hog.cell_size},
                     {"clamp", set.hog.clamp},
                     {"pyramid_levels", set.hog.pyramid_levels},
                     {"scale_step", set.hog.scale_step},
                     {"canonical_height", set.hog.canonical_height}};
    nlohmann::json classes = nlohmann::json::array();
    for (const auto& cls : set.classes) {
        nlohmann::json jc;
        jc["label"] = std::string(1, cls.label);
        nlohmann::json mixtures = nlohmann::json::array();
        for (const auto& m : cls.mixtures) {
            nlohmann::json jm;
            jm["bias"] = m.bias;
            jm["box_frac_x"] = m.box_frac_x;
            jm["box_frac_y"] = m.box_frac_y;
            nlohmann::json parts = nlohmann::json::array();
            for (const auto& p : m.parts)
                parts.push_back({{"cells_x", p.cells_x},
                                 {"cells_y", p.cells_y},
                                 {"dim", p.dim},
                                 {"weights", p.weights}});
            jm["parts"] = std::move(parts);
            nlohmann::json edges = nlohmann::json::array();
            for (const auto& e : m.edges)
                edges.push_back({{"parent", e.parent},
                                 {"child", e.child},
                                 {"anchor_dx", e.anchor_dx},
                                 {"anchor_dy", e.anchor_dy},
                                 {"a", e.deform.a},
                                 {"b", e.deform.b},
                                 {"c", e.deform.c},
                                 {"d", e.deform.d}});
            jm["edges"] = std::move(edges);
            mixtures.push_back(std::move(jm));
        }
        jc["mixtures"] = std::move(mixtures);
        classes.push_back(std::move(jc));
    }
    j["classes"] = std::move(classes);
    return j.dump(2);
}

} // namespace lpr::dpm
