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

#ifndef LPR_PIPELINE_PIPELINE_HPP
#define LPR_PIPELINE_PIPELINE_HPP

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lpr/dpm/detector.hpp"
#include "lpr/dpm/model.hpp"
#include "lpr/geometry.hpp"
#include "lpr/image.hpp"
#include "lpr/synth/font.hpp"

#include <json.hpp>

namespace lpr::pipeline {

// --- plate localization -------------------------------------------------------

enum class LocalizerBackend {
    annotation_backed,    // plate boxes come from a detections file
    projection_heuristic, // edge-projection search for a plate-shaped region
};

struct PlateLocalizer {
    LocalizerBackend backend = LocalizerBackend::projection_heuristic;
    // annotation backend: boxes keyed by image id; image_id selects the record
    std::map<std::string, BoundingBox> annotations;
    std::string image_id;
    // projection backend: admissible plate aspect (width/height) range
    double min_aspect = 3.0;
    double max_aspect = 6.0;
};

// Detections-file round trip: {"schema":"plate-boxes/1","boxes":{id:[x,y,w,h]}}.
std::map<std::string, BoundingBox> load_plate_boxes(const std::string& path);
void save_plate_boxes(const std::string& path,
                      const std::map<std::string, BoundingBox>& boxes);

// At most one plate box, clamped inside the image. The annotation backend
// returns the stored box (missing record: lookup error). The projection
// backend returns the span of strong horizontal-gradient columns inside the
// densest edge row band, or nothing when the image has no edges or the
// span's aspect falls outside the admissible range.
std::optional<BoundingBox> localize_plate(const ImageBuffer& img,
                                          const PlateLocalizer& loc);

// --- assembly rules -------------------------------------------------------------

// Left-to-right reading order: stable sort by box center x ascending, ties
// by center y ascending then score descending.
std::vector<dpm::Detection> order_by_center(std::vector<dpm::Detection> dets);

enum class OverlapMode {
    min_area, // intersection / min(area_a, area_b): catches nested duplicates
    iou,      // intersection / union
};

// Greedy duplicate removal: walking detections by descending score, one is
// kept iff its overlap with every already-kept detection is <= ratio.
// Kept detections come back in their input order; suppressed ones are
// appended to *suppressed when given. ratio must lie in (0,1].
std::vector<dpm::Detection> suppress_overlaps(
    const std::vector<dpm::Detection>& dets, double ratio = 0.7,
    OverlapMode mode = OverlapMode::min_area,
    std::vector<dpm::Detection>* suppressed = nullptr);

// Plates open and close with two digits. Scanning inward from each end,
// letter detections are dropped until two digits have been passed; interior
// detections are untouched. When a side runs out of digits its drops are
// rolled back and *unsatisfiable is set instead (the remaining sequence is
// still returned). Dropped detections go to *ignored when given.
std::vector<dpm::Detection> enforce_digit_positions(
    const std::vector<dpm::Detection>& dets, bool* unsatisfiable = nullptr,
    std::vector<dpm::Detection>* ignored = nullptr);

// --- full reading -----------------------------------------------------------------

inline constexpr const char* REASON_BELOW_THRESHOLD = "below-threshold";
inline constexpr const char* REASON_OVERLAP = "overlap-suppressed";
inline constexpr const char* REASON_DIGIT_RULE = "digit-rule-ignored";

struct RejectedDetection {
    dpm::Detection detection;
    std::string reason; // one of the REASON_* constants
};

struct PlateReading {
    BoundingBox plate_box;                // crop region in source-image pixels
    std::vector<dpm::Detection> ordered;  // kept detections, left to right
    std::string text;                     // concatenated kept labels
    std::vector<double> char_scores;      // parallel to text
    std::vector<RejectedDetection> rejected;
    bool unsatisfiable = false; // digit rule could not be met
};

struct RecognizeOptions {
    double threshold = 0.0;    // final acceptance score (strict >)
    double overlap_ratio = 0.7;
    OverlapMode overlap_mode = OverlapMode::min_area;
    // detections within this margin below the threshold are still recorded
    // (reason below-threshold) for diagnostics; 0 disables
    double report_margin = 0.25;
    int threads = 1;
};

// detect -> order by center -> suppress overlaps -> digit rule -> concatenate.
// Every discarded detection is recorded with its reason. Detection boxes are
// in plate-crop pixels; plate_box covers the whole crop.
PlateReading recognize_plate(const ImageBuffer& plate,
                             const dpm::CharacterModelSet& models,
                             const RecognizeOptions& opts = {});

// Localize, crop, recognize. Nothing when no plate is found. The reading's
// plate_box is the localized region in source pixels; detection boxes stay
// in crop-local pixels.
std::optional<PlateReading> recognize_image(const ImageBuffer& img,
                                            const PlateLocalizer& loc,
                                            const dpm::CharacterModelSet& models,
                                            const RecognizeOptions& opts = {});

// --- reading records ----------------------------------------------------------------

// One record per line: {"schema":"plate-reading/1","id":...,...}. Detections
// keep label, score, box, level and mixture; part placements are not stored.
nlohmann::json reading_to_json(const std::string& id, const PlateReading& reading);
PlateReading reading_from_json(const nlohmann::json& j, std::string* id = nullptr);

void write_readings(std::ostream& os,
                    const std::vector<std::pair<std::string, PlateReading>>& rows);
std::vector<std::pair<std::string, PlateReading>> read_readings(std::istream& is);

// Review image: plate box and kept boxes in bright strokes, rejected ones
// dim, one glyph label per kept box when a glyph set is given, and a score
// bar under each kept box (length = score clamped to [0,2], half box width
// per unit).
ImageBuffer draw_reading_overlay(const ImageBuffer& img, const PlateReading& reading,
                                 const synth::GlyphSet* glyphs = nullptr);

} // namespace lpr::pipeline

#endif // LPR_PIPELINE_PIPELINE_HPP
