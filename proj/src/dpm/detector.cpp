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

#include "lpr/dpm/detector.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "lpr/error.hpp"
#include "lpr/geometry.hpp"
#include "lpr/parallel.hpp"

namespace lpr::dpm {

namespace {

// maps a root window at a pyramid level back to source pixels, applying
// the model's box fraction centered inside the window
BoundingBox root_window_to_box(const CharacterTreeModel& model, const HogConfig& hog,
                               double level_scale, int root_x, int root_y,
                               double fx, double fy, int img_w, int img_h) {
    const auto& root = model.parts[0];
    double cw = root.cells_x * hog.cell_size / level_scale;
    double ch = root.cells_y * hog.cell_size / level_scale;
    double cx0 = root_x * hog.cell_size / level_scale;
    double cy0 = root_y * hog.cell_size / level_scale;
    double bw = cw * model.box_frac_x;
    double bh = ch * model.box_frac_y;
    double bx = cx0 + 0.5 * (cw - bw);
    double by = cy0 + 0.5 * (ch - bh);

    BoundingBox box;
    box.x = static_cast<int>(std::lround(bx * fx));
    box.y = static_cast<int>(std::lround(by * fy));
    box.w = std::max(1, static_cast<int>(std::lround(bw * fx)));
    box.h = std::max(1, static_cast<int>(std::lround(bh * fy)));

    box.x = std::clamp(box.x, 0, img_w - 1);
    box.y = std::clamp(box.y, 0, img_h - 1);
    box.w = std::min(box.w, img_w - box.x);
    box.h = std::min(box.h, img_h - box.y);
    return box;
}

std::vector<Detection> detect_one_class(const CharacterClassModel& cls,
                                        const HogConfig& hog, const HogPyramid& pyr,
                                        double threshold, double fx, double fy,
                                        int img_w, int img_h) {
    std::vector<Detection> dets;
    for (std::size_t lvl = 0; lvl < pyr.levels.size(); ++lvl) {
        const HogCellGrid& grid = pyr.levels[lvl];

        // per-mixture tables; the per-location score is the max over them
        std::vector<TreeInference> inf;
        inf.reserve(cls.mixtures.size());
        int out_w = 0, out_h = 0;
        bool fits = false;
        for (const auto& m : cls.mixtures) {
            int w = grid.cells_x - m.parts[0].cells_x + 1;
            int h = grid.cells_y - m.parts[0].cells_y + 1;
            bool ok = w >= 1 && h >= 1;
            for (const auto& p : m.parts)
                if (grid.cells_x < p.cells_x || grid.cells_y < p.cells_y) ok = false;
            if (!ok) {
                inf.emplace_back();
                continue;
            }
            inf.push_back(score_tree(grid, m));
            fits = true;
            out_w = std::max(out_w, w);
            out_h = std::max(out_h, h);
        }
        if (!fits) continue;

        for (int y = 0; y < out_h; ++y) {
            for (int x = 0; x < out_w; ++x) {
                double best = 0.0;
                int best_m = -1;
                for (std::size_t m = 0; m < inf.size(); ++m) {
                    const ScoreMap& sm = inf[m].root_score;
                    if (sm.empty() || x >= sm.width || y >= sm.height) continue;
                    double s = sm.at(x, y);
                    if (best_m < 0 || s > best) {
                        best = s;
                        best_m = static_cast<int>(m);
                    }
                }
                if (best_m < 0 || !(best > threshold)) continue;

                Detection d;
                d.label = cls.label;
                d.score = best;
                d.level = static_cast<int>(lvl);
                d.mixture = best_m;
                d.parts = backtrack(cls.mixtures[best_m], inf[best_m], x, y);
                d.box = root_window_to_box(cls.mixtures[best_m], hog,
                                           pyr.scale_of_level[lvl], x, y,
                                           fx, fy, img_w, img_h);
                dets.push_back(std::move(d));
            }
        }
    }
    return nms(std::move(dets), 0.5);
}

} // namespace

std::vector<Detection> nms(std::vector<Detection> dets, double iou_limit) {
    std::stable_sort(dets.begin(), dets.end(), [](const Detection& a, const Detection& b) {
        if (a.score != b.score) return a.score > b.score;
        if (a.box.x != b.box.x) return a.box.x < b.box.x;
        return a.box.y < b.box.y;
    });
    std::vector<Detection> kept;
    for (auto& d : dets) {
        bool keep = true;
        for (const auto& k : kept)
            if (iou(d.box, k.box) > iou_limit) {
                keep = false;
                break;
            }
        if (keep) kept.push_back(std::move(d));
    }
    return kept;
}

std::vector<Detection> detect_characters(const CharacterModelSet& set,
                                         const ImageBuffer& plate,
                                         double threshold,
                                         int threads) {
    if (plate.width < MIN_PLATE_WIDTH || plate.height < MIN_PLATE_HEIGHT)
        raise(ErrorKind::precondition, "plate crop smaller than the supported minimum");

    ImageBuffer gray = (plate.channels == 1) ? plate : to_grayscale(plate);
    const HogConfig& hog = set.hog;

    int canon_h = hog.canonical_height;
    int canon_w = std::max(1, static_cast<int>(std::lround(
                                   gray.width * static_cast<double>(canon_h) / gray.height)));
    if (canon_w < 2 * hog.cell_size)
        raise(ErrorKind::precondition, "plate crop too narrow at canonical height");
    ImageBuffer canon = resize(gray, canon_w, canon_h);

    int min_cx = 1, min_cy = 1;
    for (const auto& c : set.classes)
        for (const auto& m : c.mixtures)
            for (const auto& p : m.parts) {
                min_cx = std::max(min_cx, p.cells_x);
                min_cy = std::max(min_cy, p.cells_y);
            }
    HogPyramid pyr = build_pyramid(canon, hog.pyramid_levels, hog.scale_step, hog,
                                   min_cx, min_cy);

    const double fx = static_cast<double>(plate.width) / canon_w;
    const double fy = static_cast<double>(plate.height) / canon_h;

    // one slot per class keeps the merge order fixed under any schedule
    std::vector<std::vector<Detection>> per_class(set.classes.size());
    parallel_for(set.classes.size(), threads, [&](std::size_t i) {
        per_class[i] = detect_one_class(set.classes[i], hog, pyr, threshold,
                                        fx, fy, plate.width, plate.height);
    });

    std::vector<Detection> all;
    for (auto& v : per_class)
        for (auto& d : v) all.push_back(std::move(d));
    std::stable_sort(all.begin(), all.end(), [](const Detection& a, const Detection& b) {
        if (a.score != b.score) return a.score > b.score;
        if (a.label != b.label) return a.label < b.label;
        if (a.box.x != b.box.x) return a.box.x < b.box.x;
        return a.box.y < b.box.y;
    });
    return all;
}

} // namespace lpr::dpm
