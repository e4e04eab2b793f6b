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

#include "lpr/dpm/distance_transform.hpp"

#include <limits>
#include <vector>

#include "lpr/error.hpp"

namespace lpr::dpm {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

// p-coordinate where the parabolas rooted at q0 and q1 (q1 > q0) cross.
// Right of it the q1 parabola is higher (a < 0).
inline double crossing(const double* src, double a, double c, int q0, int q1) {
    return 0.5 * (q0 + q1) + c / (2.0 * a) +
           (src[q1] - src[q0]) / ((q1 - q0) * 2.0 * a);
}

// Same as dt1d but output index i stands for parent position p = i + off.
void dt1d_offset(const double* src, int src_len, double a, double c,
                 double* out, int* arg, int out_len, int off) {
    if (src_len < 1 || out_len < 1)
        raise(ErrorKind::precondition, "distance transform needs non-empty input and output");
    if (!(a <= -CONCAVITY_EPS))
        raise(ErrorKind::parameter, "quadratic coefficient must be <= -1e-3");

    std::vector<int> v(static_cast<std::size_t>(src_len));
    std::vector<double> z(static_cast<std::size_t>(src_len) + 1);
    int k = 0;
    v[0] = 0;
    z[0] = -kInf;
    z[1] = kInf;
    for (int q = 1; q < src_len; ++q) {
        double s = crossing(src, a, c, v[k], q);
        while (s <= z[k]) {
            --k;
            s = crossing(src, a, c, v[k], q);
        }
        ++k;
        v[k] = q;
        z[k] = s;
        z[k + 1] = kInf;
    }

    // strict advance keeps the smaller q exactly on a crossing
    k = 0;
    for (int i = 0; i < out_len; ++i) {
        double p = i + off;
        while (z[k + 1] < p) ++k;
        int q = v[k];
        double dq = q - p;
        out[i] = src[q] + (a * dq * dq + c * dq);
        arg[i] = q;
    }
}

} // namespace

void dt1d(const double* src, int src_len, double a, double c,
          double* out, int* arg, int out_len) {
    dt1d_offset(src, src_len, a, c, out, arg, out_len, 0);
}

TransformedMap distance_transform_message(const ScoreMap& child,
                                          const DeformationParams& deform,
                                          int anchor_dx, int anchor_dy,
                                          int parent_w, int parent_h) {
    if (child.width < 1 || child.height < 1)
        raise(ErrorKind::precondition, "child score map is empty");
    if (parent_w < 1 || parent_h < 1)
        raise(ErrorKind::precondition, "parent grid is empty");

    // pass 1: columns, vertical displacement relative to the anchor row
    ScoreMap tmp(child.width, parent_h);
    Grid2D<int> ay(child.width, parent_h);
    std::vector<double> col(static_cast<std::size_t>(child.height));
    std::vector<double> out_col(static_cast<std::size_t>(parent_h));
    std::vector<int> arg_col(static_cast<std::size_t>(parent_h));
    for (int x = 0; x < child.width; ++x) {
        for (int y = 0; y < child.height; ++y) col[y] = child.at(x, y);
        dt1d_offset(col.data(), child.height, deform.b, deform.d,
                    out_col.data(), arg_col.data(), parent_h, anchor_dy);
        for (int y = 0; y < parent_h; ++y) {
            tmp.at(x, y) = out_col[y];
            ay.at(x, y) = arg_col[y];
        }
    }

    // pass 2: rows, horizontal displacement; ties fall on the smallest
    // child x, then the smallest child y from pass 1
    TransformedMap result;
    result.score = ScoreMap(parent_w, parent_h);
    result.argx = Grid2D<int>(parent_w, parent_h);
    result.argy = Grid2D<int>(parent_w, parent_h);
    std::vector<double> out_row(static_cast<std::size_t>(parent_w));
    std::vector<int> arg_row(static_cast<std::size_t>(parent_w));
    for (int y = 0; y < parent_h; ++y) {
        dt1d_offset(tmp.row(y), child.width, deform.a, deform.c,
                    out_row.data(), arg_row.data(), parent_w, anchor_dx);
        for (int x = 0; x < parent_w; ++x) {
            int qx = arg_row[x];
            result.score.at(x, y) = out_row[x];
            result.argx.at(x, y) = qx;
            result.argy.at(x, y) = ay.at(qx, y);
        }
    }
    return result;
}

} // namespace lpr::dpm
