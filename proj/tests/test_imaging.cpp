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
#include <cstdint>
#include <vector>

#include "lpr/error.hpp"
#include "lpr/geometry.hpp"
#include "lpr/image.hpp"
#include "lpr/image_codec.hpp"
#include "lpr/rng.hpp"

using namespace lpr;

namespace {

ImageBuffer random_image(int w, int h, int c, std::uint64_t seed) {
    ImageBuffer img(w, h, c);
    Rng rng(seed);
    for (auto& p : img.pixels) p = rng.uniform();
    return img;
}

} // namespace

TEST_CASE("bounding box arithmetic") {
    BoundingBox a{0, 0, 10, 10};
    BoundingBox b{5, 5, 10, 10};
    CHECK(intersection_area(a, b) == 25);
    CHECK(iou(a, b) == doctest::Approx(25.0 / 175.0));
    CHECK(iou(a, a) == 1.0);
    CHECK(iou(b, a) == iou(a, b));

    // disjoint boxes
    BoundingBox c{20, 20, 5, 5};
    CHECK(intersection_area(a, c) == 0);
    CHECK(iou(a, c) == 0.0);

    // nested small box: min-area overlap saturates while iou stays low
    BoundingBox inner{2, 2, 2, 2};
    CHECK(overlap_min_area(a, inner) == 1.0);
    CHECK(iou(a, inner) == doctest::Approx(4.0 / 100.0));

    CHECK(a.center_x() == 5.0);
    CHECK(a.center_y() == 5.0);
    CHECK(a.area() == 100);
    CHECK(a.valid());
    CHECK_FALSE(BoundingBox{0, 0, 0, 5}.valid());
    CHECK_FALSE(BoundingBox{-1, 0, 5, 5}.valid());
}

TEST_CASE("image buffer accessors") {
    ImageBuffer img(4, 3, 3, 0.5);
    CHECK(img.pixels.size() == 4u * 3u * 3u);
    CHECK(img.at(0, 0, 0) == 0.5);
    img.at(2, 1, 1) = 0.25;
    CHECK(img.at(2, 1, 1) == 0.25);
    CHECK(img.full_box() == BoundingBox{0, 0, 4, 3});
    CHECK(img.contains({1, 1, 3, 2}));
    CHECK_FALSE(img.contains({1, 1, 4, 2}));
    CHECK_FALSE(img.contains({0, 0, 0, 1}));
}

TEST_CASE("nir channel cloning replicates the single channel") {
    ImageBuffer nir = random_image(7, 5, 1, 42);
    ImageBuffer rgb = nir_to_three_channel(nir);
    REQUIRE(rgb.channels == 3);
    REQUIRE(rgb.width == 7);
    REQUIRE(rgb.height == 5);
    for (int y = 0; y < 5; ++y)
        for (int x = 0; x < 7; ++x)
            for (int c = 0; c < 3; ++c)
                CHECK(rgb.at(x, y, c) == nir.at(x, y));
}

TEST_CASE("grayscale conversion") {
    // channel-equal pixels pass through bit-exactly
    ImageBuffer cloned = nir_to_three_channel(random_image(6, 4, 1, 7));
    ImageBuffer back = to_grayscale(cloned);
    REQUIRE(back.channels == 1);
    for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 6; ++x)
            CHECK(back.at(x, y) == cloned.at(x, y, 0));

    // distinct channels use Rec.601 weights
    ImageBuffer rgb(1, 1, 3);
    rgb.at(0, 0, 0) = 1.0;
    rgb.at(0, 0, 1) = 0.5;
    rgb.at(0, 0, 2) = 0.25;
    ImageBuffer gray = to_grayscale(rgb);
    CHECK(gray.at(0, 0) == doctest::Approx(0.299 * 1.0 + 0.587 * 0.5 + 0.114 * 0.25));

    // single channel input is returned unchanged
    ImageBuffer g1 = random_image(3, 3, 1, 9);
    ImageBuffer g2 = to_grayscale(g1);
    CHECK(g2.pixels == g1.pixels);
}

TEST_CASE("crop copies the exact region") {
    ImageBuffer img = random_image(10, 8, 3, 11);
    BoundingBox box{3, 2, 4, 5};
    ImageBuffer sub = crop(img, box);
    REQUIRE(sub.width == 4);
    REQUIRE(sub.height == 5);
    REQUIRE(sub.channels == 3);
    for (int y = 0; y < 5; ++y)
        for (int x = 0; x < 4; ++x)
            for (int c = 0; c < 3; ++c)
                CHECK(sub.at(x, y, c) == img.at(x + 3, y + 2, c));

    CHECK_THROWS_AS(crop(img, {8, 0, 4, 4}), Error);
    CHECK_THROWS_AS(crop(img, {0, 0, 0, 4}), Error);
}

TEST_CASE("resize basics") {
    // identity
    ImageBuffer img = random_image(9, 6, 1, 13);
    ImageBuffer same = resize(img, 9, 6);
    CHECK(same.pixels == img.pixels);

    // constant stays constant at any size
    ImageBuffer flat(5, 5, 3, 0.37);
    ImageBuffer big = resize(flat, 17, 11);
    for (double v : big.pixels) CHECK(v == doctest::Approx(0.37).epsilon(1e-12));

    // values stay inside the input range
    ImageBuffer shrunk = resize(img, 4, 3);
    REQUIRE(shrunk.width == 4);
    REQUIRE(shrunk.height == 3);
    for (double v : shrunk.pixels) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
    }

    CHECK_THROWS_AS(resize(img, 0, 5), Error);
    CHECK_THROWS_AS(resize(img, 5, -1), Error);
}

TEST_CASE("png round trip preserves 8-bit quantized pixels") {
    for (int channels : {1, 3}) {
        CAPTURE(channels);
        ImageBuffer img = random_image(13, 7, channels, 100 + channels);
        // quantize to the 8-bit grid first so the round trip is exact
        for (auto& p : img.pixels) p = std::round(p * 255.0) / 255.0;
        std::vector<std::uint8_t> bytes = encode_png(img);
        ImageBuffer dec = decode_image(bytes);
        REQUIRE(dec.width == img.width);
        REQUIRE(dec.height == img.height);
        REQUIRE(dec.channels == img.channels);
        for (std::size_t i = 0; i < img.pixels.size(); ++i)
            CHECK(dec.pixels[i] == doctest::Approx(img.pixels[i]).epsilon(1e-12));
    }
}

TEST_CASE("decode rejects garbage") {
    std::vector<std::uint8_t> junk{0x00, 0x01, 0x02, 0x03, 0x04, 0x05, 0x06, 0x07};
    CHECK_THROWS_AS(decode_image(junk), Error);
    CHECK_THROWS_AS(decode_image({}), Error);
}

TEST_CASE("rng determinism and derivation") {
    Rng a(123), b(123);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

    // derived streams differ from each other and from the parent
    CHECK(Rng::derive(1, 0) != Rng::derive(1, 1));
    CHECK(Rng::derive(1, 0) == Rng::derive(1, 0));
    CHECK(Rng::derive(1, 0) != Rng::derive(2, 0));

    Rng c(7);
    for (int i = 0; i < 1000; ++i) {
        double u = c.uniform();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        int k = c.uniform_int(3, 9);
        CHECK(k >= 3);
        CHECK(k <= 9);
    }

    // shuffle is a permutation
    std::vector<int> v{0, 1, 2, 3, 4, 5, 6, 7};
    Rng d(5);
    d.shuffle(v);
    std::vector<int> sorted = v;
    std::sort(sorted.begin(), sorted.end());
    CHECK(sorted == std::vector<int>{0, 1, 2, 3, 4, 5, 6, 7});
}
