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

#include "lpr/image.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lpr/error.hpp"

namespace lpr {

ImageBuffer::ImageBuffer(int w, int h, int c, double fill) {
    if (w <= 0 || h <= 0 || (c != 1 && c != 3))
        raise(ErrorKind::precondition, "image dimensions must be positive with 1 or 3 channels");
    width = w;
    height = h;
    channels = c;
    pixels.assign(static_cast<std::size_t>(w) * h * c, fill);
}

ImageBuffer nir_to_three_channel(const ImageBuffer& img) {
    if (img.channels != 1)
        raise(ErrorKind::precondition, "channel cloning expects a single-channel image");
    ImageBuffer out(img.width, img.height, 3);
    const std::size_t n = static_cast<std::size_t>(img.width) * img.height;
    for (std::size_t i = 0; i < n; ++i) {
        double v = img.pixels[i];
        out.pixels[i * 3 + 0] = v;
        out.pixels[i * 3 + 1] = v;
        out.pixels[i * 3 + 2] = v;
    }
    return out;
}

ImageBuffer to_grayscale(const ImageBuffer& img) {
    if (img.channels == 1) return img;
    ImageBuffer out(img.width, img.height, 1);
    const std::size_t n = static_cast<std::size_t>(img.width) * img.height;
    for (std::size_t i = 0; i < n; ++i) {
        double r = img.pixels[i * 3 + 0];
        double g = img.pixels[i * 3 + 1];
        double b = img.pixels[i * 3 + 2];
        // equal channels short-circuit keeps channel-cloned content exact
        double y = (r == g && g == b) ? r : 0.299 * r + 0.587 * g + 0.114 * b;
        out.pixels[i] = std::clamp(y, 0.0, 1.0);
    }
    return out;
}

ImageBuffer crop(const ImageBuffer& img, const BoundingBox& box) {
    if (!img.contains(box))
        raise(ErrorKind::bounds, "crop box (" + std::to_string(box.x) + "," + std::to_string(box.y) +
                                     "," + std::to_string(box.w) + "," + std::to_string(box.h) +
                                     ") outside image");
    ImageBuffer out(box.w, box.h, img.channels);
    for (int y = 0; y < box.h; ++y)
        for (int x = 0; x < box.w; ++x)
            for (int c = 0; c < img.channels; ++c)
                out.at(x, y, c) = img.at(box.x + x, box.y + y, c);
    return out;
}

namespace {
inline double lerp_exact(double a, double b, double t) { return a + t * (b - a); }
} // namespace

ImageBuffer resize(const ImageBuffer& img, int w, int h) {
    if (w <= 0 || h <= 0)
        raise(ErrorKind::precondition, "resize target dimensions must be positive");
    ImageBuffer out(w, h, img.channels);
    const double sx = static_cast<double>(img.width) / w;
    const double sy = static_cast<double>(img.height) / h;
    for (int y = 0; y < h; ++y) {
        double src_y = (y + 0.5) * sy - 0.5;
        int y0 = static_cast<int>(std::floor(src_y));
        double fy = src_y - y0;
        if (y0 < 0) { y0 = 0; fy = 0.0; }
        int y1 = std::min(y0 + 1, img.height - 1);
        if (y0 >= img.height - 1) { y0 = img.height - 1; y1 = y0; fy = 0.0; }
        for (int x = 0; x < w; ++x) {
            double src_x = (x + 0.5) * sx - 0.5;
            int x0 = static_cast<int>(std::floor(src_x));
            double fx = src_x - x0;
            if (x0 < 0) { x0 = 0; fx = 0.0; }
            int x1 = std::min(x0 + 1, img.width - 1);
            if (x0 >= img.width - 1) { x0 = img.width - 1; x1 = x0; fx = 0.0; }
            for (int c = 0; c < img.channels; ++c) {
                double top = lerp_exact(img.at(x0, y0, c), img.at(x1, y0, c), fx);
                double bot = lerp_exact(img.at(x0, y1, c), img.at(x1, y1, c), fx);
                out.at(x, y, c) = std::clamp(lerp_exact(top, bot, fy), 0.0, 1.0);
            }
        }
    }
    return out;
}

} // namespace lpr
