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

#include <cstddef>
#include <vector>

namespace lpr {

// Dense row-major 2-D array. Used for score maps and argmax tables.
template <typename T>
struct Grid2D {
    int width = 0;
    int height = 0;
    std::vector<T> data;

    Grid2D() = default;
    Grid2D(int w, int h, T fill = T{})
        : width(w), height(h), data(static_cast<std::size_t>(w) * h, fill) {}

    T& at(int x, int y) { return data[static_cast<std::size_t>(y) * width + x]; }
    const T& at(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x]; }

    T* row(int y) { return data.data() + static_cast<std::size_t>(y) * width; }
    const T* row(int y) const { return data.data() + static_cast<std::size_t>(y) * width; }

    bool empty() const { return width <= 0 || height <= 0; }
    std::size_t size() const { return data.size(); }
};

using ScoreMap = Grid2D<double>;

} // namespace lpr
