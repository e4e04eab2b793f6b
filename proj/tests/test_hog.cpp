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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "lpr/error.hpp"
#include "lpr/hog.hpp"
#include "lpr/image.hpp"
#include "lpr/rng.hpp"

using namespace lpr;

namespace {

ImageBuffer random_gray(int w, int h, std::uint64_t seed) {
    ImageBuffer img(w, h, 1);
    Rng rng(seed);
    for (auto& p : img.pixels) p = rng.uniform();
    return img;
}

// total weight landing in orientation bin `bin` across all cells and all
// four normalizations
double bin_energy(const HogCellGrid& g, int bin) {
    double s = 0.0;
    for (int y = 0; y < g.cells_y; ++y)
        for (int x = 0; x < g.cells_x; ++x)
            for (int n = 0; n < 4; ++n) s += g.cell(x, y)[n * HOG_BINS + bin];
    return s;
}

} // namespace

TEST_CASE("gradient field of a horizontal ramp") {
    // I(x, y) = 0.1 * x: dx = 0.1 everywhere, dy = 0, orientation 0
    ImageBuffer img(8, 6, 1);
    for (int y = 0; y < 6; ++y)
        for (int x = 0; x < 8; ++x) img.at(x, y) = 0.1 * x;
    GradientField g = compute_gradients(img);
    REQUIRE(g.width == 8);
    REQUIRE(g.height == 6);
    for (int y = 0; y < 6; ++y) {
        for (int x = 0; x < 8; ++x) {
            std::size_t i = static_cast<std::size_t>(y) * 8 + x;
            CHECK(g.magnitude[i] == doctest::Approx(0.1).epsilon(1e-9));
            CHECK(g.orientation[i] == doctest::Approx(0.0).epsilon(1e-9));
        }
    }
}

TEST_CASE("gradient orientation folds into [0, pi)") {
    ImageBuffer img = random_gray(16, 16, 3);
    GradientField g = compute_gradients(img);
    for (double o : g.orientation) {
        CHECK(o >= 0.0);
        CHECK(o < std::numbers::pi);
    }
    for (double m : g.magnitude) CHECK(m >= 0.0);
}

TEST_CASE("cell grid dimensions and feature layout") {
    ImageBuffer img = random_gray(32, 16, 4);
    HogConfig cfg;
    HogCellGrid g = hog_cells(img, 4, cfg);
    CHECK(g.cells_x == 8);
    CHECK(g.cells_y == 4);
    CHECK(g.dim == HOG_DIM);
    CHECK(g.cell_size == 4);
    CHECK(g.data.size() == 8u * 4u * HOG_DIM);

    // truncated block normalization bounds every entry
    for (double v : g.data) {
        CHECK(v >= 0.0);
        CHECK(v <= cfg.clamp + 1e-12);
    }

    // partial trailing pixels are dropped, not rounded up
    HogCellGrid g2 = hog_cells(random_gray(33, 19, 5), 4, cfg);
    CHECK(g2.cells_x == 8);
    CHECK(g2.cells_y == 4);
}

TEST_CASE("constant image yields zero features") {
    ImageBuffer img(24, 24, 1, 0.6);
    HogCellGrid g = hog_cells(img, 4, {});
    for (double v : g.data) CHECK(v == 0.0);
}

TEST_CASE("vertical bar image concentrates energy in the horizontal-gradient bins") {
    // black/white vertical stripes: gradients point along x, orientation 0,
    // which sits on the wrap boundary and splits evenly between bins 8 and 0
    ImageBuffer img(32, 32, 1);
    for (int y = 0; y < 32; ++y)
        for (int x = 0; x < 32; ++x) img.at(x, y) = (x / 4) % 2 ? 0.9 : 0.1;
    HogCellGrid g = hog_cells(img, 4, {});
    double e0 = bin_energy(g, 0);
    double e8 = bin_energy(g, 8);
    REQUIRE(e0 > 0.0);
    CHECK(e0 == doctest::Approx(e8).epsilon(1e-9));
    for (int b = 1; b < HOG_BINS - 1; ++b) CHECK(e0 + e8 > bin_energy(g, b));
}

TEST_CASE("horizontal bar image moves energy to the vertical-gradient bin") {
    // gradients along y: orientation pi/2 lands exactly on the center of
    // bin 4 of 9 over [0, pi)
    ImageBuffer img(32, 32, 1);
    for (int y = 0; y < 32; ++y)
        for (int x = 0; x < 32; ++x) img.at(x, y) = (y / 4) % 2 ? 0.9 : 0.1;
    HogCellGrid g = hog_cells(img, 4, {});
    double e4 = bin_energy(g, 4);
    REQUIRE(e4 > 0.0);
    for (int b : {0, 1, 2, 3, 5, 6, 7, 8}) CHECK(e4 > bin_energy(g, b));
}

TEST_CASE("hog is deterministic") {
    ImageBuffer img = random_gray(40, 24, 6);
    HogCellGrid a = hog_cells(img, 4, {});
    HogCellGrid b = hog_cells(img, 4, {});
    CHECK(a.data == b.data);
}

TEST_CASE("pyramid levels and scales") {
    ImageBuffer img = random_gray(170, 64, 8);
    HogConfig cfg;
    HogPyramid pyr = build_pyramid(img, cfg.pyramid_levels, cfg.scale_step, cfg, 4, 8);
    REQUIRE_FALSE(pyr.empty());
    CHECK(pyr.source_width == 170);
    CHECK(pyr.source_height == 64);
    CHECK(pyr.levels.size() == pyr.scale_of_level.size());
    CHECK(pyr.levels.size() <= static_cast<std::size_t>(cfg.pyramid_levels));

    // level 0 is the unscaled image
    CHECK(pyr.scale_of_level[0] == 1.0);
    CHECK(pyr.levels[0].cells_x == 170 / 4);
    CHECK(pyr.levels[0].cells_y == 64 / 4);

    for (std::size_t k = 0; k < pyr.levels.size(); ++k) {
        CHECK(pyr.scale_of_level[k] ==
              doctest::Approx(std::pow(cfg.scale_step, static_cast<double>(k))));
        // every kept level fits the requested minimum footprint
        CHECK(pyr.levels[k].cells_x >= 4);
        CHECK(pyr.levels[k].cells_y >= 8);
        if (k > 0) {
            CHECK(pyr.levels[k].cells_x <= pyr.levels[k - 1].cells_x);
            CHECK(pyr.levels[k].cells_y <= pyr.levels[k - 1].cells_y);
        }
    }

    // a 64-high source cannot host a 8-cell-tall filter beyond a few octaves;
    // the documented 170x64 case keeps exactly 5 of 8 levels
    CHECK(pyr.levels.size() == 5);
}

TEST_CASE("pyramid with an impossible minimum raises") {
    ImageBuffer img = random_gray(20, 12, 9);
    CHECK_THROWS_AS(build_pyramid(img, 8, 0.8408964152537145, {}, 50, 50), Error);
}

TEST_CASE("pyramid rejects bad parameters") {
    ImageBuffer img = random_gray(64, 32, 10);
    CHECK_THROWS_AS(build_pyramid(img, 0, 0.84, {}, 1, 1), Error);
    CHECK_THROWS_AS(build_pyramid(img, 8, 1.5, {}, 1, 1), Error);
    CHECK_THROWS_AS(build_pyramid(img, 8, 0.0, {}, 1, 1), Error);
}
