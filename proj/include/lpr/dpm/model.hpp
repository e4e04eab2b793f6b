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

#ifndef LPR_DPM_MODEL_HPP
#define LPR_DPM_MODEL_HPP

#include <cstddef>
#include <string>
#include <vector>

#include "lpr/geometry.hpp"
#include "lpr/hog.hpp"

namespace lpr::dpm {

// Character classes the engine recognizes. Q, W and X never occur on the
// target plates and are excluded.
inline const std::string FULL_ALPHABET = "0123456789ABCDEFGHIJKLMNOPRSTUVYZ";

// Deformation parameters must stay strictly concave; (a, b) are projected to
// at most -CONCAVITY_EPS and validation rejects anything above it.
inline constexpr double CONCAVITY_EPS = 1e-3;

// Linear appearance filter over a window of feature cells.
struct PartFilter {
    int cells_x = 0;
    int cells_y = 0;
    int dim = HOG_DIM;
    // weights, cell-major: (y * cells_x + x) * dim + d
    std::vector<double> weights;

    std::size_t size() const { return weights.size(); }
    const double* cell(int x, int y) const {
        return weights.data() + (static_cast<std::size_t>(y) * cells_x + x) * dim;
    }
    double* cell(int x, int y) {
        return weights.data() + (static_cast<std::size_t>(y) * cells_x + x) * dim;
    }
};

// Quadratic displacement cost a*dx^2 + b*dy^2 + c*dx + d*dy, added to the
// score; a and b must be <= -CONCAVITY_EPS so the cost is concave.
struct DeformationParams {
    double a = -1.0;
    double b = -1.0;
    double c = 0.0;
    double d = 0.0;
};

// Edge from a parent part to a child part. The anchor is the child's ideal
// placement relative to the parent, in cells; displacement is measured from
// that anchor.
struct TreeEdge {
    int parent = 0;
    int child = 0;
    int anchor_dx = 0;
    int anchor_dy = 0;
    DeformationParams deform;
};

// One tree-structured character model: part 0 is the root, edges form a
// tree directed away from it. All parts live on the same pyramid level.
struct CharacterTreeModel {
    char label = '?';
    std::vector<PartFilter> parts;
    std::vector<TreeEdge> edges;
    double bias = 0.0;
    // fraction of the root window the reported character box covers,
    // centered horizontally; 1.0 maps the box to the full window
    double box_frac_x = 1.0;
    double box_frac_y = 1.0;
};

// All mixtures for one character class; score is the max over mixtures.
struct CharacterClassModel {
    char label = '?';
    std::vector<CharacterTreeModel> mixtures;
};

// The full model bundle handled by training, inference and serialization.
struct CharacterModelSet {
    std::string alphabet;
    HogConfig hog;
    std::vector<CharacterClassModel> classes;

    const CharacterClassModel* find(char label) const {
        for (const auto& c : classes)
            if (c.label == label) return &c;
        return nullptr;
    }
};

// Placement of one part after inference: cell coordinates at some level.
struct PartPlacement {
    int part = 0;
    int cell_x = 0;
    int cell_y = 0;
};

// One detected character in source-image pixel coordinates.
struct Detection {
    char label = '?';
    double score = 0.0;
    BoundingBox box;
    int level = 0;
    int mixture = 0;
    std::vector<PartPlacement> parts;
};

// Throws a parameter error when the model is structurally unsound:
// empty parts, non-tree edges, child filters of mismatched dimension or
// deformation coefficients violating the concavity bound.
void validate_model(const CharacterTreeModel& model);
void validate_model_set(const CharacterModelSet& set);

// Builds the standard three-part layout for one character: a root covering
// the glyph plus upper and lower halves re-scoring vertical structure.
CharacterTreeModel make_default_tree(char label);

} // namespace lpr::dpm

#endif // LPR_DPM_MODEL_HPP
