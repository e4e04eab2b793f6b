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
#include <vector>

#include "lpr/dpm/detector.hpp"
#include "lpr/dpm/distance_transform.hpp"
#include "lpr/dpm/inference.hpp"
#include "lpr/dpm/model.hpp"
#include "lpr/error.hpp"
#include "lpr/rng.hpp"

using namespace lpr;
using namespace lpr::dpm;

namespace {

// Direct O(n^2) counterpart of dt1d. Mirrors the production fill expression
// term for term so agreement can be required bit for bit, argmax included;
// the lower-envelope bookkeeping is the piece under test.
void naive_dt1d(const double* src, int src_len, double a, double c,
                double* out, int* arg, int out_len, int off) {
    for (int i = 0; i < out_len; ++i) {
        double p = i + off;
        bool found = false;
        for (int q = 0; q < src_len; ++q) {
            double dq = q - p;
            double v = src[q] + (a * dq * dq + c * dq);
            if (!found || v > out[i]) {
                found = true;
                out[i] = v;
                arg[i] = q;
            }
        }
    }
}

// Naive separable 2-D transform: column pass then row pass, exactly like
// distance_transform_message composes them.
TransformedMap naive_transform(const ScoreMap& child, const DeformationParams& de,
                               int adx, int ady, int pw, int ph) {
    ScoreMap tmp(child.width, ph);
    Grid2D<int> ay(child.width, ph);
    std::vector<double> col(child.height), out_col(ph);
    std::vector<int> arg_col(ph);
    for (int x = 0; x < child.width; ++x) {
        for (int y = 0; y < child.height; ++y) col[y] = child.at(x, y);
        naive_dt1d(col.data(), child.height, de.b, de.d, out_col.data(), arg_col.data(), ph, ady);
        for (int y = 0; y < ph; ++y) {
            tmp.at(x, y) = out_col[y];
            ay.at(x, y) = arg_col[y];
        }
    }
    TransformedMap r;
    r.score = ScoreMap(pw, ph);
    r.argx = Grid2D<int>(pw, ph);
    r.argy = Grid2D<int>(pw, ph);
    std::vector<double> out_row(pw);
    std::vector<int> arg_row(pw);
    for (int y = 0; y < ph; ++y) {
        naive_dt1d(tmp.row(y), child.width, de.a, de.c, out_row.data(), arg_row.data(), pw, adx);
        for (int x = 0; x < pw; ++x) {
            r.score.at(x, y) = out_row[x];
            r.argx.at(x, y) = arg_row[x];
            r.argy.at(x, y) = ay.at(arg_row[x], y);
        }
    }
    return r;
}

HogCellGrid random_grid(int cx, int cy, Rng& rng) {
    HogCellGrid g;
    g.cells_x = cx;
    g.cells_y = cy;
    g.dim = HOG_DIM;
    g.cell_size = 4;
    g.data.resize(static_cast<std::size_t>(cx) * cy * HOG_DIM);
    for (auto& v : g.data) v = rng.uniform(-1.0, 1.0);
    return g;
}

PartFilter random_filter(int cx, int cy, Rng& rng) {
    PartFilter f;
    f.cells_x = cx;
    f.cells_y = cy;
    f.dim = HOG_DIM;
    f.weights.resize(static_cast<std::size_t>(cx) * cy * HOG_DIM);
    for (auto& w : f.weights) w = rng.uniform(-1.0, 1.0);
    return f;
}

DeformationParams random_deform(Rng& rng) {
    DeformationParams d;
    d.a = rng.uniform(-2.0, -0.01);
    d.b = rng.uniform(-2.0, -0.01);
    d.c = rng.uniform(-0.5, 0.5);
    d.d = rng.uniform(-0.5, 0.5);
    return d;
}

// Random 3-part tree: star (root->1, root->2) or chain (root->1->2).
CharacterTreeModel random_tree(const HogCellGrid& grid, Rng& rng, bool chain) {
    CharacterTreeModel m;
    m.label = 'T';
    int rx = rng.uniform_int(1, std::min(3, grid.cells_x));
    int ry = rng.uniform_int(1, std::min(3, grid.cells_y));
    m.parts.push_back(random_filter(rx, ry, rng));
    for (int i = 0; i < 2; ++i)
        m.parts.push_back(random_filter(rng.uniform_int(1, std::min(2, grid.cells_x)),
                                        rng.uniform_int(1, std::min(2, grid.cells_y)), rng));
    TreeEdge e1{0, 1, rng.uniform_int(-2, 2), rng.uniform_int(-2, 2), random_deform(rng)};
    TreeEdge e2{chain ? 1 : 0, 2, rng.uniform_int(-2, 2), rng.uniform_int(-2, 2),
                random_deform(rng)};
    m.edges = {e1, e2};
    m.bias = rng.uniform(-1.0, 1.0);
    return m;
}

// Exhaustive best configuration: every legal placement of every part is
// scored with independent arithmetic (manual dot products, direct
// displacement terms). Random weights make the argmax unique.
struct BruteBest {
    double score = 0.0;
    std::vector<PartPlacement> parts;
};

double manual_appearance(const HogCellGrid& g, const PartFilter& f, int px, int py) {
    double s = 0.0;
    for (int fy = 0; fy < f.cells_y; ++fy)
        for (int fx = 0; fx < f.cells_x; ++fx) {
            const double* w = f.cell(fx, fy);
            const double* v = g.cell(px + fx, py + fy);
            for (int d = 0; d < f.dim; ++d) s += w[d] * v[d];
        }
    return s;
}

BruteBest brute_force_best(const HogCellGrid& g, const CharacterTreeModel& m) {
    std::vector<int> ex(m.parts.size()), ey(m.parts.size());
    std::vector<ScoreMap> app(m.parts.size());
    for (std::size_t i = 0; i < m.parts.size(); ++i) {
        ex[i] = g.cells_x - m.parts[i].cells_x + 1;
        ey[i] = g.cells_y - m.parts[i].cells_y + 1;
        REQUIRE(ex[i] >= 1);
        REQUIRE(ey[i] >= 1);
        app[i] = ScoreMap(ex[i], ey[i]);
        for (int y = 0; y < ey[i]; ++y)
            for (int x = 0; x < ex[i]; ++x)
                app[i].at(x, y) = manual_appearance(g, m.parts[i], x, y);
    }

    BruteBest best;
    bool found = false;
    std::vector<PartPlacement> pl(3);
    for (int y0 = 0; y0 < ey[0]; ++y0)
        for (int x0 = 0; x0 < ex[0]; ++x0)
            for (int y1 = 0; y1 < ey[1]; ++y1)
                for (int x1 = 0; x1 < ex[1]; ++x1)
                    for (int y2 = 0; y2 < ey[2]; ++y2)
                        for (int x2 = 0; x2 < ex[2]; ++x2) {
                            pl[0] = {0, x0, y0};
                            pl[1] = {1, x1, y1};
                            pl[2] = {2, x2, y2};
                            double s = app[0].at(x0, y0) + app[1].at(x1, y1) +
                                       app[2].at(x2, y2) + m.bias;
                            for (const auto& e : m.edges) {
                                double dx = pl[e.child].cell_x -
                                            (pl[e.parent].cell_x + e.anchor_dx);
                                double dy = pl[e.child].cell_y -
                                            (pl[e.parent].cell_y + e.anchor_dy);
                                s += e.deform.a * dx * dx + e.deform.c * dx;
                                s += e.deform.b * dy * dy + e.deform.d * dy;
                            }
                            if (!found || s > best.score) {
                                found = true;
                                best.score = s;
                                best.parts = pl;
                            }
                        }
    return best;
}

} // namespace

TEST_CASE("dt1d matches the naive oracle bit for bit") {
    Rng rng(2024);
    for (int iter = 0; iter < 100; ++iter) {
        int src_len = rng.uniform_int(1, 40);
        int out_len = rng.uniform_int(1, 40);
        double a = rng.uniform(-3.0, -0.002);
        double c = rng.uniform(-1.0, 1.0);
        std::vector<double> src(src_len);
        for (auto& v : src) v = rng.uniform(-5.0, 5.0);

        std::vector<double> out(out_len), ref(out_len);
        std::vector<int> arg(out_len), ref_arg(out_len);
        dt1d(src.data(), src_len, a, c, out.data(), arg.data(), out_len);
        naive_dt1d(src.data(), src_len, a, c, ref.data(), ref_arg.data(), out_len, 0);
        for (int i = 0; i < out_len; ++i) {
            CHECK(out[i] == ref[i]);
            CHECK(arg[i] == ref_arg[i]);
        }
    }
}

TEST_CASE("dt1d exact tie keeps the smaller source index") {
    // -dq^2 + dq peaks between dq=0 and dq=1 with equal value 0 at both
    std::vector<double> src(8, 0.0);
    std::vector<double> out(8);
    std::vector<int> arg(8);
    dt1d(src.data(), 8, -1.0, 1.0, out.data(), arg.data(), 8);
    for (int p = 0; p < 8; ++p) {
        CHECK(out[p] == 0.0);
        CHECK(arg[p] == p);
    }
}

TEST_CASE("dt1d picks the integer vertex when it is unique") {
    // -dq^2 + 2dq peaks exactly at dq=1 with value 1
    std::vector<double> src(6, 0.0);
    std::vector<double> out(6);
    std::vector<int> arg(6);
    dt1d(src.data(), 6, -1.0, 2.0, out.data(), arg.data(), 6);
    for (int p = 0; p < 5; ++p) {
        CHECK(out[p] == 1.0);
        CHECK(arg[p] == p + 1);
    }
    // the last parent cannot reach dq=1; dq=0 is its best feasible offset
    CHECK(out[5] == 0.0);
    CHECK(arg[5] == 5);
}

TEST_CASE("dt1d rejects bad input") {
    std::vector<double> src(4, 0.0), out(4);
    std::vector<int> arg(4);
    CHECK_THROWS_AS(dt1d(src.data(), 0, -1.0, 0.0, out.data(), arg.data(), 4), Error);
    CHECK_THROWS_AS(dt1d(src.data(), 4, -1.0, 0.0, out.data(), arg.data(), 0), Error);
    // concavity bound is strict: -1e-4 is too shallow
    CHECK_THROWS_AS(dt1d(src.data(), 4, -1e-4, 0.0, out.data(), arg.data(), 4), Error);
    CHECK_THROWS_AS(dt1d(src.data(), 4, 1.0, 0.0, out.data(), arg.data(), 4), Error);
}

TEST_CASE("2-d transform matches the naive oracle including argmax maps") {
    Rng rng(77);
    for (int iter = 0; iter < 50; ++iter) {
        int cw = rng.uniform_int(1, 20);
        int ch = rng.uniform_int(1, 20);
        int pw = rng.uniform_int(1, 20);
        int ph = rng.uniform_int(1, 20);
        int adx = rng.uniform_int(-3, 3);
        int ady = rng.uniform_int(-3, 3);
        DeformationParams de = random_deform(rng);
        ScoreMap child(cw, ch);
        for (auto& v : child.data) v = rng.uniform(-4.0, 4.0);

        TransformedMap got = distance_transform_message(child, de, adx, ady, pw, ph);
        TransformedMap ref = naive_transform(child, de, adx, ady, pw, ph);
        REQUIRE(got.score.width == pw);
        REQUIRE(got.score.height == ph);
        for (int y = 0; y < ph; ++y)
            for (int x = 0; x < pw; ++x) {
                CHECK(got.score.at(x, y) == ref.score.at(x, y));
                CHECK(got.argx.at(x, y) == ref.argx.at(x, y));
                CHECK(got.argy.at(x, y) == ref.argy.at(x, y));
            }
    }
}

TEST_CASE("2-d transform agrees with the direct quadratic scan") {
    // independent of the separable decomposition; certifies that maximizing
    // per axis equals maximizing over all (qx, qy) jointly
    Rng rng(78);
    for (int iter = 0; iter < 20; ++iter) {
        int cw = rng.uniform_int(2, 12);
        int ch = rng.uniform_int(2, 12);
        int pw = rng.uniform_int(2, 12);
        int ph = rng.uniform_int(2, 12);
        int adx = rng.uniform_int(-2, 2);
        int ady = rng.uniform_int(-2, 2);
        DeformationParams de = random_deform(rng);
        ScoreMap child(cw, ch);
        for (auto& v : child.data) v = rng.uniform(-4.0, 4.0);

        TransformedMap got = distance_transform_message(child, de, adx, ady, pw, ph);
        for (int py = 0; py < ph; ++py)
            for (int px = 0; px < pw; ++px) {
                double best = -1e300;
                for (int qy = 0; qy < ch; ++qy)
                    for (int qx = 0; qx < cw; ++qx) {
                        double dx = qx - (px + adx);
                        double dy = qy - (py + ady);
                        double v = child.at(qx, qy) + de.a * dx * dx + de.c * dx +
                                   de.b * dy * dy + de.d * dy;
                        best = std::max(best, v);
                    }
                CHECK(got.score.at(px, py) == doctest::Approx(best).epsilon(1e-9));
            }
    }
}

TEST_CASE("2-d transform exact tie lands on the smallest child cell") {
    ScoreMap child(5, 5, 0.0);
    DeformationParams de{-1.0, -1.0, 1.0, 1.0};
    TransformedMap t = distance_transform_message(child, de, 0, 0, 5, 5);
    for (int y = 0; y < 5; ++y)
        for (int x = 0; x < 5; ++x) {
            CHECK(t.score.at(x, y) == 0.0);
            CHECK(t.argx.at(x, y) == x);
            CHECK(t.argy.at(x, y) == y);
        }
}

TEST_CASE("appearance response equals manual correlation") {
    Rng rng(5);
    HogCellGrid g = random_grid(6, 5, rng);
    PartFilter f = random_filter(3, 2, rng);
    ScoreMap m = appearance_response(g, f);
    REQUIRE(m.width == 4);
    REQUIRE(m.height == 4);
    for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 4; ++x)
            CHECK(m.at(x, y) == doctest::Approx(manual_appearance(g, f, x, y)).epsilon(1e-12));

    PartFilter huge = random_filter(7, 2, rng);
    CHECK_THROWS_AS(appearance_response(g, huge), Error);
}

TEST_CASE("score_configuration matches manual arithmetic and checks bounds") {
    Rng rng(6);
    HogCellGrid g = random_grid(6, 6, rng);
    CharacterTreeModel m = random_tree(g, rng, false);
    std::vector<PartPlacement> pl{{0, 1, 2}, {1, 0, 1}, {2, 3, 2}};

    double expect = manual_appearance(g, m.parts[0], 1, 2) +
                    manual_appearance(g, m.parts[1], 0, 1) +
                    manual_appearance(g, m.parts[2], 3, 2) + m.bias;
    for (const auto& e : m.edges) {
        const PartPlacement& par = pl[e.parent];
        const PartPlacement& ch = pl[e.child];
        double dx = ch.cell_x - (par.cell_x + e.anchor_dx);
        double dy = ch.cell_y - (par.cell_y + e.anchor_dy);
        expect += e.deform.a * dx * dx + e.deform.c * dx;
        expect += e.deform.b * dy * dy + e.deform.d * dy;
    }
    CHECK(score_configuration(g, m, pl) == doctest::Approx(expect).epsilon(1e-12));

    // part 0 extends past the right edge from x=5 when wider than one cell
    if (m.parts[0].cells_x > 1) {
        std::vector<PartPlacement> bad{{0, 5, 2}, {1, 0, 1}, {2, 3, 2}};
        bad[0].cell_x = g.cells_x - m.parts[0].cells_x + 1;
        CHECK_THROWS_AS(score_configuration(g, m, bad), Error);
    }
    std::vector<PartPlacement> neg{{0, -1, 0}, {1, 0, 1}, {2, 3, 2}};
    CHECK_THROWS_AS(score_configuration(g, m, neg), Error);
    std::vector<PartPlacement> twice{{0, 0, 0}, {0, 0, 0}, {2, 0, 0}};
    CHECK_THROWS_AS(score_configuration(g, m, twice), Error);
}

TEST_CASE("tree inference equals exhaustive enumeration on small grids") {
    Rng rng(99);
    for (int iter = 0; iter < 40; ++iter) {
        bool chain = (iter % 2) == 1;
        int gx = rng.uniform_int(3, 6);
        int gy = rng.uniform_int(3, 6);
        HogCellGrid g = random_grid(gx, gy, rng);
        CharacterTreeModel m = random_tree(g, rng, chain);
        validate_model(m);

        BruteBest ref = brute_force_best(g, m);

        HogPyramid pyr;
        pyr.levels = {g};
        pyr.scale_of_level = {1.0};
        pyr.source_width = gx * 4;
        pyr.source_height = gy * 4;
        BestPlacement got = infer_best(pyr, m);

        REQUIRE(got.found);
        CHECK(got.score == doctest::Approx(ref.score).epsilon(1e-9));
        REQUIRE(got.parts.size() == 3);
        for (int i = 0; i < 3; ++i) {
            CHECK(got.parts[i].cell_x == ref.parts[i].cell_x);
            CHECK(got.parts[i].cell_y == ref.parts[i].cell_y);
        }

        // replaying the recovered placement reproduces the table score
        double replay = score_configuration(g, m, got.parts);
        CHECK(std::abs(replay - got.score) <= 1e-9);
    }
}

TEST_CASE("all-zero model ties resolve to the first scan position") {
    Rng rng(11);
    HogCellGrid g = random_grid(6, 6, rng);
    CharacterTreeModel m;
    m.label = 'Z';
    for (int i = 0; i < 3; ++i) {
        PartFilter f;
        f.cells_x = 2;
        f.cells_y = 2;
        f.dim = HOG_DIM;
        f.weights.assign(2u * 2u * HOG_DIM, 0.0);
        m.parts.push_back(f);
    }
    m.edges = {TreeEdge{0, 1, 0, 0, {-1, -1, 0, 0}}, TreeEdge{0, 2, 0, 0, {-1, -1, 0, 0}}};
    m.bias = 0.25;

    HogPyramid pyr;
    pyr.levels = {g};
    pyr.scale_of_level = {1.0};
    BestPlacement best = infer_best(pyr, m);
    REQUIRE(best.found);
    CHECK(best.score == 0.25);
    CHECK(best.root_x == 0);
    CHECK(best.root_y == 0);
    // children sit exactly on their anchors, zero displacement
    CHECK(best.parts[1].cell_x == 0);
    CHECK(best.parts[1].cell_y == 0);
    CHECK(best.parts[2].cell_x == 0);
    CHECK(best.parts[2].cell_y == 0);
}

TEST_CASE("scaling all parameters scales every root score linearly") {
    Rng rng(13);
    HogCellGrid g = random_grid(6, 5, rng);
    CharacterTreeModel m = random_tree(g, rng, false);
    CharacterTreeModel m2 = m;
    const double alpha = 2.0;
    for (auto& p : m2.parts)
        for (auto& w : p.weights) w *= alpha;
    for (auto& e : m2.edges) {
        e.deform.a *= alpha;
        e.deform.b *= alpha;
        e.deform.c *= alpha;
        e.deform.d *= alpha;
    }
    m2.bias *= alpha;

    TreeInference i1 = score_tree(g, m);
    TreeInference i2 = score_tree(g, m2);
    REQUIRE(i1.root_score.size() == i2.root_score.size());
    for (std::size_t i = 0; i < i1.root_score.data.size(); ++i)
        CHECK(i2.root_score.data[i] ==
              doctest::Approx(alpha * i1.root_score.data[i]).epsilon(1e-9));
}

TEST_CASE("backtrack validates the root cell") {
    Rng rng(17);
    HogCellGrid g = random_grid(5, 5, rng);
    CharacterTreeModel m = random_tree(g, rng, false);
    TreeInference inf = score_tree(g, m);
    CHECK_THROWS_AS(backtrack(m, inf, -1, 0), Error);
    CHECK_THROWS_AS(backtrack(m, inf, inf.root_score.width, 0), Error);
}

TEST_CASE("model validation rejects structural defects") {
    CharacterTreeModel ok = make_default_tree('A');
    CHECK_NOTHROW(validate_model(ok));

    CharacterTreeModel empty;
    CHECK_THROWS_AS(validate_model(empty), Error);

    CharacterTreeModel shallow = make_default_tree('A');
    shallow.edges[0].deform.a = -1e-4;
    CHECK_THROWS_AS(validate_model(shallow), Error);

    CharacterTreeModel dup = make_default_tree('A');
    dup.edges[1].child = 1; // part 1 reached twice, part 2 disconnected
    CHECK_THROWS_AS(validate_model(dup), Error);

    CharacterTreeModel badsize = make_default_tree('A');
    badsize.parts[1].weights.pop_back();
    CHECK_THROWS_AS(validate_model(badsize), Error);

    CharacterTreeModel stray = make_default_tree('A');
    stray.edges[1].child = 7;
    CHECK_THROWS_AS(validate_model(stray), Error);

    CharacterTreeModel lop = make_default_tree('A');
    lop.edges.pop_back();
    CHECK_THROWS_AS(validate_model(lop), Error);
}

TEST_CASE("default tree layout") {
    CharacterTreeModel m = make_default_tree('7');
    CHECK(m.label == '7');
    REQUIRE(m.parts.size() == 3);
    CHECK(m.parts[0].cells_x == 4);
    CHECK(m.parts[0].cells_y == 8);
    CHECK(m.parts[1].cells_x == 4);
    CHECK(m.parts[1].cells_y == 4);
    CHECK(m.parts[2].cells_x == 4);
    CHECK(m.parts[2].cells_y == 4);
    REQUIRE(m.edges.size() == 2);
    CHECK(m.edges[0].parent == 0);
    CHECK(m.edges[0].child == 1);
    CHECK(m.edges[0].anchor_dx == 0);
    CHECK(m.edges[0].anchor_dy == 0);
    CHECK(m.edges[1].parent == 0);
    CHECK(m.edges[1].child == 2);
    CHECK(m.edges[1].anchor_dx == 0);
    CHECK(m.edges[1].anchor_dy == 4);
    CHECK(m.box_frac_x == 1.0);
    CHECK(m.box_frac_y == 1.0);
}

TEST_CASE("alphabet constants") {
    CHECK(FULL_ALPHABET.size() == 33);
    CHECK(FULL_ALPHABET == "0123456789ABCDEFGHIJKLMNOPRSTUVYZ");
    // Q, W, X never appear on the target plates
    CHECK(FULL_ALPHABET.find('Q') == std::string::npos);
    CHECK(FULL_ALPHABET.find('W') == std::string::npos);
    CHECK(FULL_ALPHABET.find('X') == std::string::npos);
    CHECK(CONCAVITY_EPS == 1e-3);
}

TEST_CASE("per-class nms keeps the strongest of an overlapping cluster") {
    auto det = [](double score, int x) {
        Detection d;
        d.label = 'A';
        d.score = score;
        d.box = {x, 0, 10, 20};
        return d;
    };
    // three stacked boxes and one far away
    std::vector<Detection> dets{det(1.0, 0), det(3.0, 1), det(2.0, 2), det(0.5, 100)};
    std::vector<Detection> kept = nms(dets, 0.5);
    REQUIRE(kept.size() == 2);
    CHECK(kept[0].score == 3.0);
    CHECK(kept[1].score == 0.5);

    // disjoint boxes all survive
    std::vector<Detection> apart{det(1.0, 0), det(2.0, 30), det(3.0, 60)};
    CHECK(nms(apart, 0.5).size() == 3);

    CHECK(nms({}, 0.5).empty());
}
