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

#include "lpr/geometry.hpp"

namespace lpr {

// Raster image, 1 or 3 channels, row-major interleaved, values in [0,1].
// Immutable by convention once built; all operations below are pure.
struct ImageBuffer {
    int width = 0;
    int height = 0;
    int channels = 1;
    std::vector<double> pixels;

    ImageBuffer() = default;
    ImageBuffer(int w, int h, int c, double fill = 0.0);

    double at(int x, int y, int c = 0) const {
        return pixels[(static_cast<std::size_t>(y) * width + x) * channels + c];
    }
    double& at(int x, int y, int c = 0) {
        return pixels[(static_cast<std::size_t>(y) * width + x) * channels + c];
    }

    BoundingBox full_box() const { return {0, 0, width, height}; }
    bool contains(const BoundingBox& b) const {
        return b.w > 0 && b.h > 0 && b.x >= 0 && b.y >= 0 &&
               b.x + b.w <= width && b.y + b.h <= height;
    }
};

// Replicates a single-channel image into three identical channels.
ImageBuffer nir_to_three_channel(const ImageBuffer& img);

// Rec.601 luminance for 3-channel input; 1-channel input is returned as-is.
// Pixels whose three channels are equal pass through untouched, so cloned
// single-channel content round-trips exactly.
ImageBuffer to_grayscale(const ImageBuffer& img);

ImageBuffer crop(const ImageBuffer& img, const BoundingBox& box);

// Bilinear resampling with edge clamping. Constant images stay constant and
// a same-size resize is pixel-identical.
ImageBuffer resize(const ImageBuffer& img, int w, int h);

} // namespace lpr
