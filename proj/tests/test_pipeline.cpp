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

#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "lpr/error.hpp"
#include "lpr/pipeline/pipeline.hpp"
#include "lpr/rng.hpp"

using namespace lpr;
using namespace lpr::pipeline;

namespace {

dpm::Detection det(char label, int x, int y, int w, int h, double score) {
    dpm::Detection d;
    d.label = label;
    d.score = score;
    d.box = {x, y, w, h};
    return d;
}

// detections spelling `text` left to right with uniform spacing
std::vector<dpm::Detection> spell(const std::string& text, double score = 1.0) {
    std::vector<dpm::Detection> dets;
    for (std::size_t i = 0; i < text.size(); ++i)
        dets.push_back(det(text[i], 10 + static_cast<int>(i) * 20, 8, 16, 32, score));
    return dets;
}

std::string labels_of(const std::vector<dpm::Detection>& dets) {
    std::string s;
    for (const auto& d : dets) s.push_back(d.label);
    return s;
}

// each of the known-good plate strings must survive a shuffle
void check_assembly(const std::string& plate, std::uint64_t seed) {
    std::vector<dpm::Detection> dets = spell(plate);
    Rng rng(seed);
    rng.shuffle(dets);
    std::vector<dpm::Detection> ordered = order_by_center(dets);
    CHECK(labels_of(ordered) == plate);
}

// degenerate one-class model set whose every placement scores `bias`
dpm::CharacterModelSet bias_only_set(char label, double bias) {
    dpm::CharacterModelSet set;
    set.alphabet = std::string(1, label);
    dpm::CharacterClassModel cls;
    cls.label = label;
    dpm::CharacterTreeModel m = dpm::make_default_tree(label);
    m.bias = bias;
    cls.mixtures.push_back(std::move(m));
    set.classes.push_back(std::move(cls));
    return set;
}

} // namespace

TEST_CASE("center ordering reassembles shuffled plates") {
    check_assembly("18LH344", 1);
    check_assembly("01DY500", 2);
    check_assembly("23BU315", 3);
}

TEST_CASE("center ordering tie-breaks") {
    // same center x: lower center y first
    std::vector<dpm::Detection> dets{det('B', 10, 30, 10, 10, 1.0),
                                     det('A', 10, 0, 10, 10, 1.0)};
    CHECK(labels_of(order_by_center(dets)) == "AB");

    // same box: higher score first
    std::vector<dpm::Detection> same{det('L', 10, 10, 10, 10, 0.5),
                                     det('H', 10, 10, 10, 10, 2.0)};
    CHECK(labels_of(order_by_center(same)) == "HL");

    CHECK(order_by_center({}).empty());
}

TEST_CASE("overlap suppression keeps the strongest of a cluster") {
    // three stacked boxes plus one clear of them
    std::vector<dpm::Detection> dets{det('1', 0, 0, 16, 32, 1.0), det('2', 2, 0, 16, 32, 3.0),
                                     det('3', 4, 0, 16, 32, 2.0), det('4', 60, 0, 16, 32, 0.1)};
    std::vector<dpm::Detection> suppressed;
    std::vector<dpm::Detection> kept = suppress_overlaps(dets, 0.7, OverlapMode::min_area,
                                                         &suppressed);
    REQUIRE(kept.size() == 2);
    // survivors keep their input order
    CHECK(kept[0].label == '2');
    CHECK(kept[1].label == '4');
    REQUIRE(suppressed.size() == 2);
    CHECK(suppressed[0].label == '1');
    CHECK(suppressed[1].label == '3');
}

TEST_CASE("overlap suppression modes differ on nested boxes") {
    // the small box is fully inside the big one: min-area sees duplicate 1.0,
    // iou sees only 0.04
    std::vector<dpm::Detection> dets{det('A', 0, 0, 50, 50, 2.0), det('B', 10, 10, 10, 10, 1.0)};
    CHECK(suppress_overlaps(dets, 0.7, OverlapMode::min_area).size() == 1);
    CHECK(suppress_overlaps(dets, 0.7, OverlapMode::iou).size() == 2);
}

TEST_CASE("overlap suppression validates its ratio") {
    std::vector<dpm::Detection> dets{det('A', 0, 0, 10, 10, 1.0)};
    CHECK_THROWS_AS(suppress_overlaps(dets, 0.0), Error);
    CHECK_THROWS_AS(suppress_overlaps(dets, 1.5), Error);
    CHECK_THROWS_AS(suppress_overlaps(dets, -0.1), Error);
    CHECK_NOTHROW(suppress_overlaps(dets, 1.0));
}

TEST_CASE("digit rule trims end letters") {
    bool unsat = true;
    std::vector<dpm::Detection> ignored;

    // leading letter
    std::vector<dpm::Detection> out =
        enforce_digit_positions(spell("A18LH344"), &unsat, &ignored);
    CHECK(labels_of(out) == "18LH344");
    CHECK_FALSE(unsat);
    REQUIRE(ignored.size() == 1);
    CHECK(ignored[0].label == 'A');

    // trailing letter
    ignored.clear();
    out = enforce_digit_positions(spell("18LH344B"), &unsat, &ignored);
    CHECK(labels_of(out) == "18LH344");
    CHECK(ignored.size() == 1);

    // both ends at once
    ignored.clear();
    out = enforce_digit_positions(spell("AB12CD"), &unsat, &ignored);
    CHECK(labels_of(out) == "12");
    CHECK(ignored.size() == 4);

    // interior letters are never touched
    out = enforce_digit_positions(spell("1A2B3C4"), &unsat, nullptr);
    CHECK(labels_of(out) == "12B34");

    // already satisfied input passes through identically
    out = enforce_digit_positions(spell("18LH344"), &unsat, nullptr);
    CHECK(labels_of(out) == "18LH344");
}

TEST_CASE("digit rule flags unsatisfiable sequences and leaves them intact") {
    bool unsat = false;
    std::vector<dpm::Detection> ignored;
    std::vector<dpm::Detection> out =
        enforce_digit_positions(spell("1ABCDEF"), &unsat, &ignored);
    CHECK(unsat);
    CHECK(labels_of(out) == "1ABCDEF");
    CHECK(ignored.empty());

    out = enforce_digit_positions(spell("LH"), &unsat, nullptr);
    CHECK(unsat);
    CHECK(labels_of(out) == "LH");

    out = enforce_digit_positions({}, &unsat, nullptr);
    CHECK(unsat);
    CHECK(out.empty());
}

TEST_CASE("annotation-backed localization returns the stored box clamped") {
    ImageBuffer img(100, 50, 1, 0.5);
    PlateLocalizer loc;
    loc.backend = LocalizerBackend::annotation_backed;
    loc.annotations["img1"] = {10, 10, 60, 15};
    loc.image_id = "img1";
    std::optional<BoundingBox> box = localize_plate(img, loc);
    REQUIRE(box.has_value());
    CHECK(*box == BoundingBox{10, 10, 60, 15});

    // oversized annotations clamp to the frame
    loc.annotations["img1"] = {80, 40, 60, 30};
    box = localize_plate(img, loc);
    REQUIRE(box.has_value());
    CHECK(*box == BoundingBox{80, 40, 20, 10});

    // a record for another image is a hard error
    loc.image_id = "other";
    CHECK_THROWS_AS(localize_plate(img, loc), Error);

    // a box entirely outside the frame is a defect, not a miss
    loc.annotations["img1"] = {200, 100, 30, 10};
    loc.image_id = "img1";
    CHECK_THROWS_AS(localize_plate(img, loc), Error);
}

TEST_CASE("projection localization finds a planted plate") {
    // dark roadway frame with one bright plate full of vertical strokes
    ImageBuffer img(200, 80, 1, 0.15);
    BoundingBox plate{30, 20, 120, 28};
    for (int y = plate.y; y < plate.y + plate.h; ++y)
        for (int x = plate.x; x < plate.x + plate.w; ++x) img.at(x, y) = 0.85;
    // characters: dark bars through the plate interior
    for (int bar = 0; bar < 10; ++bar) {
        int bx = plate.x + 8 + bar * 11;
        for (int y = plate.y + 3; y < plate.y + plate.h - 3; ++y)
            for (int x = bx; x < bx + 4; ++x) img.at(x, y) = 0.1;
    }

    PlateLocalizer loc;
    loc.backend = LocalizerBackend::projection_heuristic;
    std::optional<BoundingBox> found = localize_plate(img, loc);
    REQUIRE(found.has_value());
    CHECK(iou(*found, plate) >= 0.6);
    double aspect = static_cast<double>(found->w) / found->h;
    CHECK(aspect >= loc.min_aspect);
    CHECK(aspect <= loc.max_aspect);
}

TEST_CASE("projection localization declines featureless or square content") {
    PlateLocalizer loc;
    loc.backend = LocalizerBackend::projection_heuristic;

    ImageBuffer flat(120, 60, 1, 0.4);
    CHECK_FALSE(localize_plate(flat, loc).has_value());

    // strokes arranged in a square patch: aspect gate rejects the span
    ImageBuffer square(120, 120, 1, 0.15);
    for (int y = 30; y < 90; ++y)
        for (int x = 30; x < 90; ++x) square.at(x, y) = (x / 4) % 2 ? 0.9 : 0.1;
    CHECK_FALSE(localize_plate(square, loc).has_value());
}

TEST_CASE("plate box files round trip") {
    namespace fs = std::filesystem;
    fs::path path = fs::temp_directory_path() / "lpr_plate_boxes.json";
    std::map<std::string, BoundingBox> boxes{{"a", {1, 2, 3, 4}}, {"b", {9, 8, 7, 6}}};
    save_plate_boxes(path.string(), boxes);
    std::map<std::string, BoundingBox> back = load_plate_boxes(path.string());
    CHECK(back == boxes);
    fs::remove(path);

    CHECK_THROWS_AS(load_plate_boxes("/nonexistent/boxes.json"), Error);
}

TEST_CASE("recognize_plate assembles a reading and records rejects") {
    dpm::CharacterModelSet set = bias_only_set('5', 1.0);
    ImageBuffer plate(64, 32, 1);
    Rng rng(60);
    for (auto& p : plate.pixels) p = rng.uniform();

    RecognizeOptions opts;
    opts.threshold = 0.5;
    PlateReading r = recognize_plate(plate, set, opts);
    CHECK(r.plate_box == plate.full_box());
    REQUIRE_FALSE(r.ordered.empty());
    CHECK(r.text.size() == r.ordered.size());
    CHECK(r.char_scores.size() == r.text.size());
    for (char c : r.text) CHECK(c == '5');
    for (double s : r.char_scores) CHECK(s == 1.0);
    // the reading is ordered left to right
    for (std::size_t i = 1; i < r.ordered.size(); ++i)
        CHECK(r.ordered[i - 1].box.center_x() <= r.ordered[i].box.center_x());
    // digits only: the rule is satisfied
    CHECK_FALSE(r.unsatisfiable);

    // raising the threshold above the bias rejects everything but keeps the
    // near misses on record
    RecognizeOptions high = opts;
    high.threshold = 2.0;
    high.report_margin = 1.5;
    PlateReading none = recognize_plate(plate, set, high);
    CHECK(none.ordered.empty());
    CHECK(none.text.empty());
    CHECK(none.unsatisfiable);
    REQUIRE_FALSE(none.rejected.empty());
    for (const auto& rej : none.rejected) {
        CHECK(rej.reason == REASON_BELOW_THRESHOLD);
        CHECK(rej.detection.score == 1.0);
    }

    // no margin, no records
    high.report_margin = 0.0;
    PlateReading silent = recognize_plate(plate, set, high);
    CHECK(silent.ordered.empty());
    CHECK(silent.rejected.empty());

    RecognizeOptions bad;
    bad.report_margin = -0.5;
    CHECK_THROWS_AS(recognize_plate(plate, set, bad), Error);
}

TEST_CASE("recognize_image crops through the localizer") {
    dpm::CharacterModelSet set = bias_only_set('7', 1.0);
    ImageBuffer img(160, 90, 1, 0.3);
    Rng rng(61);
    // textured plate area so detection boxes land inside it
    BoundingBox plate{20, 30, 96, 32};
    for (int y = plate.y; y < plate.y + plate.h; ++y)
        for (int x = plate.x; x < plate.x + plate.w; ++x) img.at(x, y) = rng.uniform();

    PlateLocalizer loc;
    loc.backend = LocalizerBackend::annotation_backed;
    loc.annotations["f1"] = plate;
    loc.image_id = "f1";

    RecognizeOptions opts;
    opts.threshold = 0.5;
    std::optional<PlateReading> r = recognize_image(img, loc, set, opts);
    REQUIRE(r.has_value());
    CHECK(r->plate_box == plate);
    // detections are crop-local: they fit inside the crop extent
    for (const auto& d : r->ordered) {
        CHECK(d.box.x >= 0);
        CHECK(d.box.y >= 0);
        CHECK(d.box.x + d.box.w <= plate.w);
        CHECK(d.box.y + d.box.h <= plate.h);
    }
}

TEST_CASE("readings serialize to json and back") {
    PlateReading r;
    r.plate_box = {4, 5, 100, 30};
    r.ordered = spell("07TK25");
    r.text = "07TK25";
    for (const auto& d : r.ordered) r.char_scores.push_back(d.score);
    r.rejected.push_back({det('Z', 0, 0, 5, 5, -0.2), REASON_BELOW_THRESHOLD});
    r.rejected.push_back({det('Y', 3, 0, 5, 5, 0.4), REASON_DIGIT_RULE});
    r.unsatisfiable = false;

    nlohmann::json j = reading_to_json("frame_007", r);
    std::string id;
    PlateReading back = reading_from_json(j, &id);
    CHECK(id == "frame_007");
    CHECK(back.plate_box == r.plate_box);
    CHECK(back.text == r.text);
    CHECK(back.char_scores == r.char_scores);
    CHECK(back.unsatisfiable == r.unsatisfiable);
    REQUIRE(back.ordered.size() == r.ordered.size());
    for (std::size_t i = 0; i < r.ordered.size(); ++i) {
        CHECK(back.ordered[i].label == r.ordered[i].label);
        CHECK(back.ordered[i].score == r.ordered[i].score);
        CHECK(back.ordered[i].box == r.ordered[i].box);
    }
    REQUIRE(back.rejected.size() == 2);
    CHECK(back.rejected[0].reason == REASON_BELOW_THRESHOLD);
    CHECK(back.rejected[1].detection.label == 'Y');

    // streamed as one json object per line
    std::ostringstream os;
    write_readings(os, {{"a", r}, {"b", r}});
    std::istringstream is(os.str());
    std::vector<std::pair<std::string, PlateReading>> list = read_readings(is);
    REQUIRE(list.size() == 2);
    CHECK(list[0].first == "a");
    CHECK(list[1].first == "b");
    CHECK(list[0].second.text == r.text);

    // foreign schema is rejected
    nlohmann::json bad = j;
    bad["schema"] = "other/1";
    CHECK_THROWS_AS(reading_from_json(bad), Error);
}

TEST_CASE("overlay rendering stays within the frame and marks something") {
    dpm::CharacterModelSet set = bias_only_set('3', 1.0);
    ImageBuffer plate(64, 32, 1, 0.5);
    Rng rng(62);
    for (auto& p : plate.pixels) p = rng.uniform();
    RecognizeOptions opts;
    opts.threshold = 0.5;
    PlateReading r = recognize_plate(plate, set, opts);

    ImageBuffer frame = nir_to_three_channel(plate);
    ImageBuffer vis = draw_reading_overlay(frame, r);
    CHECK(vis.width == frame.width);
    CHECK(vis.height == frame.height);
    CHECK(vis.channels == 3);
    CHECK(vis.pixels != frame.pixels);
    for (double v : vis.pixels) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
    }
}
