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

#ifndef LPR_DPM_INFERENCE_HPP
#define LPR_DPM_INFERENCE_HPP

#include <vector>

#include "lpr/dpm/distance_transform.hpp"
#include "lpr/dpm/model.hpp"
#include "lpr/grid2d.hpp"
#include "lpr/hog.hpp"

namespace lpr::dpm {

// Cross-correlation of one part filter with a feature grid. Output cell
// (x, y) scores the filter anchored with its top-left at grid cell (x, y);
// the output extent is (cells_x - filter_x + 1, cells_y - filter_y + 1).
// Raises a precondition error when the filter does not fit.
ScoreMap appearance_response(const HogCellGrid& grid, const PartFilter& filter);

// Score of one explicit placement of every part: appearance terms, one
// quadratic displacement term per edge, plus the bias. placements[i] is
// part i's top-left cell. Raises a bounds error when a part sticks out
// of the grid.
double score_configuration(const HogCellGrid& grid, const CharacterTreeModel& model,
                           const std::vector<PartPlacement>& placements);

// Dynamic-programming tables for one model on one feature grid: the root
// score map maximizes all non-root placements out, and per-edge argmax
// tables let any root placement be expanded back to the full tree.
struct TreeInference {
    ScoreMap root_score;
    std::vector<TransformedMap> messages; // parallel to model.edges
};

TreeInference score_tree(const HogCellGrid& grid, const CharacterTreeModel& model);

// Recovers all part placements for one root cell from the argmax tables.
std::vector<PartPlacement> backtrack(const CharacterTreeModel& model,
                                     const TreeInference& inf,
                                     int root_x, int root_y);

// Best root placement of one model over a whole pyramid.
struct BestPlacement {
    bool found = false;
    double score = 0.0;
    int level = 0;
    int root_x = 0;
    int root_y = 0;
    std::vector<PartPlacement> parts;
};

// Scans levels in ascending order, rows then columns ascending, keeping
// the first of any equal maxima. Levels too small for the model are
// skipped; found is false when no level fits.
BestPlacement infer_best(const HogPyramid& pyr, const CharacterTreeModel& model);

} // namespace lpr::dpm

#endif // LPR_DPM_INFERENCE_HPP
