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

#ifndef LPR_DPM_DISTANCE_TRANSFORM_HPP
#define LPR_DPM_DISTANCE_TRANSFORM_HPP

#include <vector>

#include "lpr/dpm/model.hpp"
#include "lpr/grid2d.hpp"

namespace lpr::dpm {

// Result of propagating a child score map to its parent's grid. For each
// parent cell p the value is
//   max_q child[q] + a*dx^2 + b*dy^2 + c*dx + d*dy,
// with (dx, dy) = q - (p + anchor), and (argx, argy) record the child cell
// attaining it. Ties resolve to the smallest child coordinate.
struct TransformedMap {
    ScoreMap score;
    Grid2D<int> argx;
    Grid2D<int> argy;
};

// One-dimensional pass: out[p] = max_q src[q] + a*(q-p)^2 + c*(q-p) for
// p in [0, out_len). Runs in O(src.size() + out_len) using the lower
// envelope of the shifted parabolas. Requires a <= -CONCAVITY_EPS.
void dt1d(const double* src, int src_len, double a, double c,
          double* out, int* arg, int out_len);

// Full 2-D transform onto a parent grid of parent_w x parent_h cells.
// The anchor offsets the child relative to the parent before the
// displacement is measured.
TransformedMap distance_transform_message(const ScoreMap& child,
                                          const DeformationParams& deform,
                                          int anchor_dx, int anchor_dy,
                                          int parent_w, int parent_h);

} // namespace lpr::dpm

#endif // LPR_DPM_DISTANCE_TRANSFORM_HPP
