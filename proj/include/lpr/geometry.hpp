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

#include <algorithm>
#include <cstdint>

namespace lpr {

// Axis-aligned pixel rectangle, top-left origin.
struct BoundingBox {
    int x = 0;
    int y = 0;
    int w = 0;
    int h = 0;

    double center_x() const { return x + w / 2.0; }
    double center_y() const { return y + h / 2.0; }
    std::int64_t area() const { return static_cast<std::int64_t>(w) * h; }
    bool valid() const { return w > 0 && h > 0 && x >= 0 && y >= 0; }

    bool operator==(const BoundingBox&) const = default;
};

inline std::int64_t intersection_area(const BoundingBox& a, const BoundingBox& b) {
    int x0 = std::max(a.x, b.x);
    int y0 = std::max(a.y, b.y);
    int x1 = std::min(a.x + a.w, b.x + b.w);
    int y1 = std::min(a.y + a.h, b.y + b.h);
    if (x1 <= x0 || y1 <= y0) return 0;
    return static_cast<std::int64_t>(x1 - x0) * (y1 - y0);
}

// Intersection over union; symmetric, in [0,1], 1 for identical valid boxes.
inline double iou(const BoundingBox& a, const BoundingBox& b) {
    std::int64_t inter = intersection_area(a, b);
    std::int64_t uni = a.area() + b.area() - inter;
    return uni > 0 ? static_cast<double>(inter) / static_cast<double>(uni) : 0.0;
}

// Intersection over the smaller box's area. Triggers on a small box nested in
// a larger one where iou stays low.
inline double overlap_min_area(const BoundingBox& a, const BoundingBox& b) {
    std::int64_t inter = intersection_area(a, b);
    std::int64_t denom = std::min(a.area(), b.area());
    return denom > 0 ? static_cast<double>(inter) / static_cast<double>(denom) : 0.0;
}

} // namespace lpr
