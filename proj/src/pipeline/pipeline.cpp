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

#include "lpr/pipeline/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

#include "lpr/error.hpp"

namespace lpr::pipeline {

namespace {

bool is_digit_label(char c) { return c >= '0' && c <= '9'; }

double overlap_of(const BoundingBox& a, const BoundingBox& b, OverlapMode mode) {
    return mode == OverlapMode::min_area ? overlap_min_area(a, b) : iou(a, b);
}

BoundingBox clamp_into(const BoundingBox& b, int w, int h) {
    int x0 = std::clamp(b.x, 0, w);
    int y0 = std::clamp(b.y, 0, h);
    int x1 = std::clamp(b.x + b.w, 0, w);
    int y1 = std::clamp(b.y + b.h, 0, h);
    return {x0, y0, x1 - x0, y1 - y0};
}

nlohmann::json box_json(const BoundingBox& b) {
    return nlohmann::json::array({b.x, b.y, b.w, b.h});
}

BoundingBox box_from_json(const nlohmann::json& j) {
    if (!j.is_array() || j.size() != 4)
        raise(ErrorKind::format, "box must be [x,y,w,h]");
    return {j[0].get<int>(), j[1].get<int>(), j[2].get<int>(), j[3].get<int>()};
}

nlohmann::json detection_json(const dpm::Detection& d) {
    return {{"label", std::string(1, d.label)},
            {"score", d.score},
            {"box", box_json(d.box)},
            {"level", d.level},
            {"mixture", d.mixture}};
}

dpm::Detection detection_from_json(const nlohmann::json& j) {
    dpm::Detection d;
    std::string label = j.at("label").get<std::string>();
    if (label.size() != 1)
        raise(ErrorKind::format, "detection label must be one character");
    d.label = label[0];
    d.score = j.at("score").get<double>();
    d.box = box_from_json(j.at("box"));
    d.level = j.at("level").get<int>();
    d.mixture = j.at("mixture").get<int>();
    return d;
}

} // namespace

std::map<std::string, BoundingBox> load_plate_boxes(const std::string& path) {
    std::ifstream in(path);
    if (!in) raise(ErrorKind::io, "cannot open plate-box file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        raise(ErrorKind::format, std::string("bad plate-box file: ") + e.what());
    }
    if (j.value("schema", "") != "plate-boxes/1")
        raise(ErrorKind::format, "plate-box file has an unknown schema");
    std::map<std::string, BoundingBox> out;
    for (const auto& [id, jb] : j.at("boxes").items()) out[id] = box_from_json(jb);
    return out;
}

void save_plate_boxes(const std::string& path,
                      const std::map<std::string, BoundingBox>& boxes) {
    nlohmann::json jb = nlohmann::json::object();
    for (const auto& [id, b] : boxes) jb[id] = box_json(b);
    nlohmann::json j = {{"schema", "plate-boxes/1"}, {"boxes", jb}};
    std::ofstream out(path);
    if (!out) raise(ErrorKind::io, "cannot write plate-box file: " + path);
    out << j.dump(2) << "\n";
}

std::optional<BoundingBox> localize_plate(const ImageBuffer& img,
                                          const PlateLocalizer& loc) {
    if (img.width <= 0 || img.height <= 0)
        raise(ErrorKind::precondition, "cannot localize in an empty image");

    if (loc.backend == LocalizerBackend::annotation_backed) {
        auto it = loc.annotations.find(loc.image_id);
        if (it == loc.annotations.end())
            raise(ErrorKind::lookup, "no plate box recorded for image id '" +
                                         loc.image_id + "'");
        BoundingBox b = clamp_into(it->second, img.width, img.height);
        if (b.w <= 0 || b.h <= 0)
            raise(ErrorKind::bounds, "annotated plate box lies outside the image");
        return b;
    }

    // projection heuristic: characters are dense vertical strokes, so the
    // plate is the longest band of rows rich in horizontal gradient, spanned
    // by its strong columns
    if (img.width < 8 || img.height < 8) return std::nullopt;
    ImageBuffer gray = img.channels == 1 ? img : to_grayscale(img);

    std::vector<double> edge(static_cast<std::size_t>(gray.width) * gray.height, 0.0);
    double emax = 0.0;
    for (int y = 0; y < gray.height; ++y)
        for (int x = 1; x + 1 < gray.width; ++x) {
            double e = std::abs(gray.at(x + 1, y) - gray.at(x - 1, y));
            edge[static_cast<std::size_t>(y) * gray.width + x] = e;
            emax = std::max(emax, e);
        }
    if (emax <= 1e-9) return std::nullopt;

    const double thr = 0.3 * emax;
    std::vector<int> row_cnt(static_cast<std::size_t>(gray.height), 0);
    for (int y = 0; y < gray.height; ++y)
        for (int x = 0; x < gray.width; ++x)
            if (edge[static_cast<std::size_t>(y) * gray.width + x] >= thr) ++row_cnt[y];
    int rmax = *std::max_element(row_cnt.begin(), row_cnt.end());
    if (rmax < 4) return std::nullopt;

    // longest run of rows holding at least half the peak count; first wins ties
    int best_y0 = -1, best_len = 0, run_y0 = -1;
    for (int y = 0; y <= gray.height; ++y) {
        bool on = y < gray.height && 2 * row_cnt[y] >= rmax;
        if (on && run_y0 < 0) run_y0 = y;
        if (!on && run_y0 >= 0) {
            if (y - run_y0 > best_len) {
                best_len = y - run_y0;
                best_y0 = run_y0;
            }
            run_y0 = -1;
        }
    }
    if (best_len < 4) return std::nullopt;
    const int y0 = best_y0, y1 = best_y0 + best_len - 1;

    std::vector<int> col_cnt(static_cast<std::size_t>(gray.width), 0);
    for (int y = y0; y <= y1; ++y)
        for (int x = 0; x < gray.width; ++x)
            if (edge[static_cast<std::size_t>(y) * gray.width + x] >= thr) ++col_cnt[x];
    int cmax = *std::max_element(col_cnt.begin(), col_cnt.end());
    if (cmax < 2) return std::nullopt;
    int x0 = -1, x1 = -1;
    for (int x = 0; x < gray.width; ++x)
        if (20 * col_cnt[x] >= 3 * cmax) { // >= 15% of the peak column
            if (x0 < 0) x0 = x;
            x1 = x;
        }
    if (x0 < 0) return std::nullopt;

    // pad to cover plate margins beyond the stroke extent
    const int band_h = y1 - y0 + 1, span_w = x1 - x0 + 1;
    const int pad_y = static_cast<int>(std::lround(0.08 * band_h));
    const int pad_x = static_cast<int>(std::lround(0.02 * span_w));
    BoundingBox b = clamp_into({x0 - pad_x, y0 - pad_y, span_w + 2 * pad_x,
                                band_h + 2 * pad_y},
                               img.width, img.height);
    if (b.w <= 0 || b.h <= 0) return std::nullopt;
    const double aspect = static_cast<double>(b.w) / b.h;
    if (aspect < loc.min_aspect || aspect > loc.max_aspect) return std::nullopt;
    return b;
}

std::vector<dpm::Detection> order_by_center(std::vector<dpm::Detection> dets) {
    std::stable_sort(dets.begin(), dets.end(),
                     [](const dpm::Detection& a, const dpm::Detection& b) {
                         double ax = a.box.center_x(), bx = b.box.center_x();
                         if (ax != bx) return ax < bx;
                         double ay = a.box.center_y(), by = b.box.center_y();
                         if (ay != by) return ay < by;
                         return a.score > b.score;
                     });
    return dets;
}

std::vector<dpm::Detection> suppress_overlaps(const std::vector<dpm::Detection>& dets,
                                              double ratio, OverlapMode mode,
                                              std::vector<dpm::Detection>* suppressed) {
    if (!(ratio > 0.0 && ratio <= 1.0))
        raise(ErrorKind::parameter, "overlap ratio must lie in (0,1]");

    std::vector<std::size_t> order(dets.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return dets[a].score > dets[b].score;
    });

    std::vector<char> keep(dets.size(), 0);
    std::vector<std::size_t> kept_idx;
    for (std::size_t i : order) {
        bool ok = true;
        for (std::size_t k : kept_idx)
            if (overlap_of(dets[i].box, dets[k].box, mode) > ratio) {
                ok = false;
                break;
            }
        if (ok) {
            keep[i] = 1;
            kept_idx.push_back(i);
        }
    }

    std::vector<dpm::Detection> out;
    for (std::size_t i = 0; i < dets.size(); ++i) {
        if (keep[i])
            out.push_back(dets[i]);
        else if (suppressed)
            suppressed->push_back(dets[i]);
    }
    return out;
}

std::vector<dpm::Detection> enforce_digit_positions(const std::vector<dpm::Detection>& dets,
                                                    bool* unsatisfiable,
                                                    std::vector<dpm::Detection>* ignored) {
    int n_digits = 0;
    for (const auto& d : dets)
        if (is_digit_label(d.label)) ++n_digits;

    if (n_digits < 2) {
        // not enough digits to anchor either end: leave the sequence intact
        if (unsatisfiable) *unsatisfiable = true;
        return dets;
    }
    if (unsatisfiable) *unsatisfiable = false;

    std::vector<char> alive(dets.size(), 1);
    int seen = 0;
    for (std::size_t i = 0; i < dets.size() && seen < 2; ++i) {
        if (is_digit_label(dets[i].label))
            ++seen;
        else
            alive[i] = 0;
    }
    seen = 0;
    for (std::size_t i = dets.size(); i-- > 0 && seen < 2;) {
        if (is_digit_label(dets[i].label))
            ++seen;
        else
            alive[i] = 0;
    }

    std::vector<dpm::Detection> out;
    for (std::size_t i = 0; i < dets.size(); ++i) {
        if (alive[i])
            out.push_back(dets[i]);
        else if (ignored)
            ignored->push_back(dets[i]);
    }
    return out;
}

PlateReading recognize_plate(const ImageBuffer& plate,
                             const dpm::CharacterModelSet& models,
                             const RecognizeOptions& opts) {
    if (opts.report_margin < 0.0)
        raise(ErrorKind::parameter, "report margin cannot be negative");

    PlateReading reading;
    reading.plate_box = plate.full_box();

    auto all = dpm::detect_characters(models, plate, opts.threshold - opts.report_margin,
                                      opts.threads);
    std::vector<dpm::Detection> candidates;
    for (auto& d : all) {
        if (d.score > opts.threshold)
            candidates.push_back(std::move(d));
        else
            reading.rejected.push_back({std::move(d), REASON_BELOW_THRESHOLD});
    }

    std::vector<dpm::Detection> suppressed, ignored;
    auto ordered = order_by_center(std::move(candidates));
    auto kept = suppress_overlaps(ordered, opts.overlap_ratio, opts.overlap_mode,
                                  &suppressed);
    reading.ordered = enforce_digit_positions(kept, &reading.unsatisfiable, &ignored);
    for (auto& d : suppressed) reading.rejected.push_back({std::move(d), REASON_OVERLAP});
    for (auto& d : ignored) reading.rejected.push_back({std::move(d), REASON_DIGIT_RULE});

    for (const auto& d : reading.ordered) {
        reading.text.push_back(d.label);
        reading.char_scores.push_back(d.score);
    }
    if (reading.ordered.empty()) reading.unsatisfiable = true;
    return reading;
}

std::optional<PlateReading> recognize_image(const ImageBuffer& img,
                                            const PlateLocalizer& loc,
                                            const dpm::CharacterModelSet& models,
                                            const RecognizeOptions& opts) {
    auto box = localize_plate(img, loc);
    if (!box) return std::nullopt;
    PlateReading reading = recognize_plate(crop(img, *box), models, opts);
    reading.plate_box = *box;
    return reading;
}

nlohmann::json reading_to_json(const std::string& id, const PlateReading& reading) {
    nlohmann::json chars = nlohmann::json::array();
    for (const auto& d : reading.ordered) chars.push_back(detection_json(d));
    nlohmann::json rejected = nlohmann::json::array();
    for (const auto& r : reading.rejected) {
        nlohmann::json jd = detection_json(r.detection);
        jd["reason"] = r.reason;
        rejected.push_back(std::move(jd));
    }
    return {{"schema", "plate-reading/1"},
            {"id", id},
            {"plate_box", box_json(reading.plate_box)},
            {"text", reading.text},
            {"unsatisfiable", reading.unsatisfiable},
            {"chars", std::move(chars)},
            {"rejected", std::move(rejected)}};
}

PlateReading reading_from_json(const nlohmann::json& j, std::string* id) {
    try {
        if (j.value("schema", "") != "plate-reading/1")
            raise(ErrorKind::format, "reading record has an unknown schema");
        if (id) *id = j.at("id").get<std::string>();
        PlateReading r;
        r.plate_box = box_from_json(j.at("plate_box"));
        r.text = j.at("text").get<std::string>();
        r.unsatisfiable = j.at("unsatisfiable").get<bool>();
        for (const auto& jd : j.at("chars")) {
            r.ordered.push_back(detection_from_json(jd));
            r.char_scores.push_back(r.ordered.back().score);
        }
        for (const auto& jd : j.at("rejected"))
            r.rejected.push_back({detection_from_json(jd),
                                  jd.at("reason").get<std::string>()});
        if (r.text.size() != r.ordered.size())
            raise(ErrorKind::format, "reading text does not match its detections");
        return r;
    } catch (const nlohmann::json::exception& e) {
        raise(ErrorKind::format, std::string("bad reading record: ") + e.what());
    }
}

void write_readings(std::ostream& os,
                    const std::vector<std::pair<std::string, PlateReading>>& rows) {
    for (const auto& [id, reading] : rows)
        os << reading_to_json(id, reading).dump() << "\n";
}

std::vector<std::pair<std::string, PlateReading>> read_readings(std::istream& is) {
    std::vector<std::pair<std::string, PlateReading>> rows;
    std::string line;
    while (std::getline(is, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            raise(ErrorKind::format, std::string("bad reading line: ") + e.what());
        }
        std::string id;
        PlateReading r = reading_from_json(j, &id);
        rows.emplace_back(std::move(id), std::move(r));
    }
    return rows;
}

namespace {

void draw_rect(ImageBuffer& img, const BoundingBox& b, double r, double g, double bl) {
    const double rgb[3] = {r, g, bl};
    auto put = [&](int x, int y) {
        if (x < 0 || y < 0 || x >= img.width || y >= img.height) return;
        for (int c = 0; c < img.channels; ++c) img.at(x, y, c) = rgb[c];
    };
    for (int x = b.x; x < b.x + b.w; ++x) {
        put(x, b.y);
        put(x, b.y + b.h - 1);
    }
    for (int y = b.y; y < b.y + b.h; ++y) {
        put(b.x, y);
        put(b.x + b.w - 1, y);
    }
}

void stamp_glyph(ImageBuffer& img, const synth::Glyph& glyph, int x, int y, int height,
                 double r, double g, double bl) {
    const double rgb[3] = {r, g, bl};
    int w = std::max(1, static_cast<int>(std::lround(
                            glyph.width * static_cast<double>(height) / glyph.height)));
    ImageBuffer bm = synth::glyph_bitmap(glyph, w, height);
    for (int gy = 0; gy < bm.height; ++gy)
        for (int gx = 0; gx < bm.width; ++gx) {
            int px = x + gx, py = y + gy;
            if (px < 0 || py < 0 || px >= img.width || py >= img.height) continue;
            double a = bm.at(gx, gy);
            for (int c = 0; c < img.channels; ++c)
                img.at(px, py, c) += a * (rgb[c] - img.at(px, py, c));
        }
}

} // namespace

ImageBuffer draw_reading_overlay(const ImageBuffer& img, const PlateReading& reading,
                                 const synth::GlyphSet* glyphs) {
    ImageBuffer out = img.channels == 3 ? img : nir_to_three_channel(img);
    draw_rect(out, reading.plate_box, 0.25, 0.55, 0.95);
    for (const auto& r : reading.rejected) draw_rect(out, r.detection.box, 0.75, 0.25, 0.2);
    for (const auto& d : reading.ordered) {
        draw_rect(out, d.box, 0.15, 0.85, 0.25);
        if (glyphs && glyphs->has(d.label))
            stamp_glyph(out, glyphs->get(d.label), d.box.x, d.box.y - 12, 10,
                        0.15, 0.85, 0.25);
        // score bar: half the box width per unit score, clamped to [0,2]
        double s = std::clamp(d.score, 0.0, 2.0);
        int bar = static_cast<int>(std::lround(0.5 * s * d.box.w));
        int by = std::min(out.height - 1, d.box.y + d.box.h + 1);
        for (int x = d.box.x; x < d.box.x + bar && x < out.width; ++x)
            if (x >= 0)
                for (int c = 0; c < out.channels; ++c)
                    out.at(x, by, c) = c == 1 ? 0.9 : 0.2;
    }
    return out;
}

} // namespace lpr::pipeline
