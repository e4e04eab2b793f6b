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

#include "lpr/hog.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "lpr/error.hpp"

namespace lpr {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kNormEps = 1e-8;
} // namespace

GradientField compute_gradients(const ImageBuffer& img) {
    if (img.channels != 1)
        raise(ErrorKind::precondition, "gradients expect a single-channel image");
    if (img.width < 3 || img.height < 3)
        raise(ErrorKind::precondition, "gradient image must be at least 3x3");

    GradientField g;
    g.width = img.width;
    g.height = img.height;
    g.magnitude.resize(static_cast<std::size_t>(img.width) * img.height);
    g.orientation.resize(g.magnitude.size());

    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            double gx, gy;
            if (x == 0)
                gx = img.at(1, y) - img.at(0, y);
            else if (x == img.width - 1)
                gx = img.at(x, y) - img.at(x - 1, y);
            else
                gx = 0.5 * (img.at(x + 1, y) - img.at(x - 1, y));
            if (y == 0)
                gy = img.at(x, 1) - img.at(x, 0);
            else if (y == img.height - 1)
                gy = img.at(x, y) - img.at(x, y - 1);
            else
                gy = 0.5 * (img.at(x, y + 1) - img.at(x, y - 1));

            double mag = std::sqrt(gx * gx + gy * gy);
            double ori = 0.0;
            if (mag > 0.0) {
                ori = std::atan2(gy, gx);
                if (ori < 0.0) ori += kPi;
                if (ori >= kPi) ori -= kPi;
                if (ori < 0.0) ori = 0.0;
            }
            std::size_t i = static_cast<std::size_t>(y) * img.width + x;
            g.magnitude[i] = mag;
            g.orientation[i] = ori;
        }
    }
    return g;
}

HogCellGrid hog_cells(const ImageBuffer& img, int cell_size, const HogConfig& cfg) {
    if (img.channels != 1)
        raise(ErrorKind::precondition, "hog expects a single-channel image");
    if (cell_size < 1)
        raise(ErrorKind::precondition, "cell size must be positive");
    if (img.width < 2 * cell_size || img.height < 2 * cell_size)
        raise(ErrorKind::precondition, "image smaller than two cells per axis");

    const int cx = img.width / cell_size;
    const int cy = img.height / cell_size;
    GradientField grad = compute_gradients(img);

    // raw orientation histograms, bilinear in orientation and cell position
    std::vector<double> hist(static_cast<std::size_t>(cx) * cy * HOG_BINS, 0.0);
    const double bin_width = kPi / HOG_BINS;
    const int px_w = cx * cell_size;
    const int px_h = cy * cell_size;

    for (int y = 0; y < px_h; ++y) {
        for (int x = 0; x < px_w; ++x) {
            std::size_t i = static_cast<std::size_t>(y) * img.width + x;
            double mag = grad.magnitude[i];
            if (mag == 0.0) continue;

            double ob = grad.orientation[i] / bin_width - 0.5;
            int b0 = static_cast<int>(std::floor(ob));
            double wb = ob - b0;
            int bin0 = (b0 % HOG_BINS + HOG_BINS) % HOG_BINS;
            int bin1 = (bin0 + 1) % HOG_BINS;

            double cxf = (x + 0.5) / cell_size - 0.5;
            double cyf = (y + 0.5) / cell_size - 0.5;
            int c0x = static_cast<int>(std::floor(cxf));
            int c0y = static_cast<int>(std::floor(cyf));
            double wx = cxf - c0x;
            double wy = cyf - c0y;

            for (int dy = 0; dy <= 1; ++dy) {
                int cyi = c0y + dy;
                if (cyi < 0 || cyi >= cy) continue;
                double wyv = dy ? wy : 1.0 - wy;
                for (int dx = 0; dx <= 1; ++dx) {
                    int cxi = c0x + dx;
                    if (cxi < 0 || cxi >= cx) continue;
                    double w = mag * wyv * (dx ? wx : 1.0 - wx);
                    double* h = hist.data() + (static_cast<std::size_t>(cyi) * cx + cxi) * HOG_BINS;
                    h[bin0] += w * (1.0 - wb);
                    h[bin1] += w * wb;
                }
            }
        }
    }

    // per-cell energies and 2x2 block sums
    std::vector<double> energy(static_cast<std::size_t>(cx) * cy, 0.0);
    for (std::size_t c = 0; c < energy.size(); ++c) {
        const double* h = hist.data() + c * HOG_BINS;
        double e = 0.0;
        for (int b = 0; b < HOG_BINS; ++b) e += h[b] * h[b];
        energy[c] = e;
    }
    auto block_energy = [&](int bx, int by) {
        bx = std::clamp(bx, 0, cx - 2);
        by = std::clamp(by, 0, cy - 2);
        return energy[static_cast<std::size_t>(by) * cx + bx] +
               energy[static_cast<std::size_t>(by) * cx + bx + 1] +
               energy[static_cast<std::size_t>(by + 1) * cx + bx] +
               energy[static_cast<std::size_t>(by + 1) * cx + bx + 1];
    };

    HogCellGrid grid;
    grid.cells_x = cx;
    grid.cells_y = cy;
    grid.dim = HOG_DIM;
    grid.cell_size = cell_size;
    grid.data.assign(static_cast<std::size_t>(cx) * cy * HOG_DIM, 0.0);

    for (int y = 0; y < cy; ++y) {
        for (int x = 0; x < cx; ++x) {
            const double* h = hist.data() + (static_cast<std::size_t>(y) * cx + x) * HOG_BINS;
            double* out = grid.cell(x, y);
            const double norms[4] = {
                1.0 / std::sqrt(block_energy(x - 1, y - 1) + kNormEps),
                1.0 / std::sqrt(block_energy(x, y - 1) + kNormEps),
                1.0 / std::sqrt(block_energy(x - 1, y) + kNormEps),
                1.0 / std::sqrt(block_energy(x, y) + kNormEps),
            };
            for (int k = 0; k < 4; ++k)
                for (int b = 0; b < HOG_BINS; ++b)
                    out[k * HOG_BINS + b] = std::min(h[b] * norms[k], cfg.clamp);
        }
    }
    return grid;
}

HogPyramid build_pyramid(const ImageBuffer& img, int levels, double scale_step,
                         const HogConfig& cfg, int min_cells_x, int min_cells_y) {
    if (levels < 1)
        raise(ErrorKind::precondition, "pyramid needs at least one level");
    if (!(scale_step > 0.0 && scale_step < 1.0))
        raise(ErrorKind::precondition, "scale step must lie in (0,1)");
    if (img.channels != 1)
        raise(ErrorKind::precondition, "pyramid expects a single-channel image");

    HogPyramid pyr;
    pyr.source_width = img.width;
    pyr.source_height = img.height;

    double scale = 1.0;
    for (int k = 0; k < levels; ++k) {
        int w = static_cast<int>(std::lround(img.width * scale));
        int h = static_cast<int>(std::lround(img.height * scale));
        if (w >= 2 * cfg.cell_size && h >= 2 * cfg.cell_size) {
            ImageBuffer scaled = (k == 0) ? img : resize(img, w, h);
            HogCellGrid grid = hog_cells(scaled, cfg.cell_size, cfg);
            if (grid.cells_x >= min_cells_x && grid.cells_y >= min_cells_y) {
                pyr.levels.push_back(std::move(grid));
                pyr.scale_of_level.push_back(scale);
            }
        }
        scale *= scale_step;
    }
    if (pyr.levels.empty())
        raise(ErrorKind::precondition, "all pyramid levels degenerate for " +
                                           std::to_string(img.width) + "x" +
                                           std::to_string(img.height));
    return pyr;
}

} // namespace lpr
