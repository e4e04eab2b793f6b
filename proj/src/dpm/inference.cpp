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

#include "lpr/dpm/inference.hpp"

#include <cstddef>
#include <string>
#include <vector>

#include "lpr/error.hpp"

namespace lpr::dpm {

namespace {

// valid top-left placements of a (fw, fh) filter on a (gw, gh) grid
inline int span(int grid_cells, int filter_cells) {
    return grid_cells - filter_cells + 1;
}

} // namespace

ScoreMap appearance_response(const HogCellGrid& grid, const PartFilter& filter) {
    if (filter.dim != grid.dim)
        raise(ErrorKind::precondition, "filter dimension does not match the feature grid");
    const int out_w = span(grid.cells_x, filter.cells_x);
    const int out_h = span(grid.cells_y, filter.cells_y);
    if (out_w < 1 || out_h < 1)
        raise(ErrorKind::precondition, "filter larger than the feature grid");

    ScoreMap out(out_w, out_h);
    const int row_len = filter.cells_x * filter.dim;
    for (int y = 0; y < out_h; ++y) {
        for (int x = 0; x < out_w; ++x) {
            double s = 0.0;
            for (int fy = 0; fy < filter.cells_y; ++fy) {
                const double* w = filter.cell(0, fy);
                const double* f = grid.cell(x, y + fy);
                for (int i = 0; i < row_len; ++i) s += w[i] * f[i];
            }
            out.at(x, y) = s;
        }
    }
    return out;
}

double score_configuration(const HogCellGrid& grid, const CharacterTreeModel& model,
                           const std::vector<PartPlacement>& placements) {
    if (placements.size() != model.parts.size())
        raise(ErrorKind::precondition, "placement count does not match part count");

    std::vector<const PartPlacement*> by_part(model.parts.size(), nullptr);
    for (const auto& p : placements) {
        if (p.part < 0 || p.part >= static_cast<int>(model.parts.size()))
            raise(ErrorKind::bounds, "placement names a part outside the model");
        if (by_part[p.part])
            raise(ErrorKind::precondition, "part placed twice");
        by_part[p.part] = &p;
    }

    double s = 0.0;
    for (std::size_t i = 0; i < model.parts.size(); ++i) {
        const auto& f = model.parts[i];
        const auto* p = by_part[i];
        if (p->cell_x < 0 || p->cell_y < 0 ||
            p->cell_x > span(grid.cells_x, f.cells_x) - 1 ||
            p->cell_y > span(grid.cells_y, f.cells_y) - 1)
            raise(ErrorKind::bounds, "part " + std::to_string(i) + " sticks out of the grid");
        double a = 0.0;
        const int row_len = f.cells_x * f.dim;
        for (int fy = 0; fy < f.cells_y; ++fy) {
            const double* w = f.cell(0, fy);
            const double* v = grid.cell(p->cell_x, p->cell_y + fy);
            for (int k = 0; k < row_len; ++k) a += w[k] * v[k];
        }
        s += a;
    }
    // displacement terms grouped per axis exactly as the transform passes
    // evaluate them, so table scores and replayed scores agree
    for (const auto& e : model.edges) {
        double dx = by_part[e.child]->cell_x - (by_part[e.parent]->cell_x + e.anchor_dx);
        double dy = by_part[e.child]->cell_y - (by_part[e.parent]->cell_y + e.anchor_dy);
        s += e.deform.b * dy * dy + e.deform.d * dy;
        s += e.deform.a * dx * dx + e.deform.c * dx;
    }
    return s + model.bias;
}

TreeInference score_tree(const HogCellGrid& grid, const CharacterTreeModel& model) {
    const int n = static_cast<int>(model.parts.size());

    // appearance map per part; children's maps then absorb messages from
    // their own children before being transformed toward the root
    std::vector<ScoreMap> maps(n);
    for (int i = 0; i < n; ++i)
        maps[i] = appearance_response(grid, model.parts[i]);

    TreeInference inf;
    inf.messages.resize(model.edges.size());

    // edges are ordered parents-before-children, so walking them backwards
    // finishes every subtree before its root edge is transformed
    for (int e = static_cast<int>(model.edges.size()) - 1; e >= 0; --e) {
        const auto& edge = model.edges[e];
        const ScoreMap& child = maps[edge.child];
        ScoreMap& parent = maps[edge.parent];
        inf.messages[e] = distance_transform_message(child, edge.deform,
                                                     edge.anchor_dx, edge.anchor_dy,
                                                     parent.width, parent.height);
        const ScoreMap& msg = inf.messages[e].score;
        for (std::size_t i = 0; i < parent.data.size(); ++i)
            parent.data[i] += msg.data[i];
    }

    inf.root_score = std::move(maps[0]);
    for (double& v : inf.root_score.data) v += model.bias;
    return inf;
}

std::vector<PartPlacement> backtrack(const CharacterTreeModel& model,
                                     const TreeInference& inf,
                                     int root_x, int root_y) {
    if (root_x < 0 || root_y < 0 ||
        root_x >= inf.root_score.width || root_y >= inf.root_score.height)
        raise(ErrorKind::bounds, "root placement outside the score map");

    std::vector<PartPlacement> placements(model.parts.size());
    placements[0] = {0, root_x, root_y};
    std::vector<char> known(model.parts.size(), 0);
    known[0] = 1;
    for (std::size_t e = 0; e < model.edges.size(); ++e) {
        const auto& edge = model.edges[e];
        if (!known[edge.parent])
            raise(ErrorKind::precondition, "edge order leaves a parent unresolved");
        const auto& parent = placements[edge.parent];
        placements[edge.child] = {edge.child,
                                  inf.messages[e].argx.at(parent.cell_x, parent.cell_y),
                                  inf.messages[e].argy.at(parent.cell_x, parent.cell_y)};
        known[edge.child] = 1;
    }
    return placements;
}

BestPlacement infer_best(const HogPyramid& pyr, const CharacterTreeModel& model) {
    BestPlacement best;
    for (std::size_t lvl = 0; lvl < pyr.levels.size(); ++lvl) {
        const HogCellGrid& grid = pyr.levels[lvl];
        bool fits = true;
        for (const auto& p : model.parts)
            if (span(grid.cells_x, p.cells_x) < 1 || span(grid.cells_y, p.cells_y) < 1)
                fits = false;
        if (!fits) continue;

        TreeInference inf = score_tree(grid, model);
        int bx = 0, by = 0;
        bool level_found = false;
        double level_best = 0.0;
        for (int y = 0; y < inf.root_score.height; ++y) {
            for (int x = 0; x < inf.root_score.width; ++x) {
                double s = inf.root_score.at(x, y);
                if (!level_found || s > level_best) {
                    level_found = true;
                    level_best = s;
                    bx = x;
                    by = y;
                }
            }
        }
        if (level_found && (!best.found || level_best > best.score)) {
            best.found = true;
            best.score = level_best;
            best.level = static_cast<int>(lvl);
            best.root_x = bx;
            best.root_y = by;
            best.parts = backtrack(model, inf, bx, by);
        }
    }
    return best;
}

} // namespace lpr::dpm
