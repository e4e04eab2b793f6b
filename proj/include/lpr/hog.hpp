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

#pragma once

#include <vector>

#include "lpr/image.hpp"

namespace lpr {

// 9 unsigned orientation bins, each emitted under 4 block normalizations.
constexpr int HOG_BINS = 9;
constexpr int HOG_DIM = 4 * HOG_BINS;

struct HogConfig {
    int cell_size = 4;
    double clamp = 0.2;            // normalization truncation
    int pyramid_levels = 8;
    double scale_step = 0.8408964152537145; // 2^(-1/4)
    int canonical_height = 64;     // plate crops are resized to this height

    bool operator==(const HogConfig&) const = default;
};

// Per-pixel gradient magnitude and unsigned orientation in [0, pi).
struct GradientField {
    int width = 0;
    int height = 0;
    std::vector<double> magnitude;
    std::vector<double> orientation;
};

// Grid of per-cell feature vectors, dim values per cell, row-major by cell.
struct HogCellGrid {
    int cells_x = 0;
    int cells_y = 0;
    int dim = HOG_DIM;
    int cell_size = 4;
    std::vector<double> data;

    const double* cell(int x, int y) const {
        return data.data() + (static_cast<std::size_t>(y) * cells_x + x) * dim;
    }
    double* cell(int x, int y) {
        return data.data() + (static_cast<std::size_t>(y) * cells_x + x) * dim;
    }
};

// Multi-scale stack of cell grids; level 0 is the finest and scales decrease
// geometrically. Levels too small for the requested minimum filter footprint
// are dropped.
struct HogPyramid {
    std::vector<HogCellGrid> levels;
    std::vector<double> scale_of_level;
    int source_width = 0;
    int source_height = 0;

    bool empty() const { return levels.empty(); }
};

// Central differences in the interior, one-sided at borders, orientation
// folded into [0, pi).
GradientField compute_gradients(const ImageBuffer& img);

// Orientation histograms with bilinear votes in orientation and position,
// block-normalized over 2x2 cell neighborhoods and truncated at cfg.clamp.
HogCellGrid hog_cells(const ImageBuffer& img, int cell_size, const HogConfig& cfg = {});

// Level k is computed from the source resized by scale_step^k. Levels whose
// grid is smaller than (min_cells_x, min_cells_y) are dropped.
HogPyramid build_pyramid(const ImageBuffer& img, int levels, double scale_step,
                         const HogConfig& cfg = {}, int min_cells_x = 1, int min_cells_y = 1);

} // namespace lpr
