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

#ifndef LPR_EVAL_EVAL_HPP
#define LPR_EVAL_EVAL_HPP

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "lpr/dpm/detector.hpp"
#include "lpr/dpm/model.hpp"
#include "lpr/geometry.hpp"
#include "lpr/image.hpp"
#include "lpr/synth/synth.hpp"

#include <json.hpp>

namespace lpr::eval {

// Character-level confusion counts over the full label set plus one extra
// slot: as a row it receives spurious predictions (no ground-truth char),
// as a column it receives missed ground-truth chars. Rows are ground truth,
// columns predictions; each real-label row sums to that character's
// ground-truth count.
struct ConfusionMatrix {
    std::string labels = dpm::FULL_ALPHABET;
    std::vector<std::int64_t> counts; // side() x side(), row-major

    ConfusionMatrix() : counts(side() * side(), 0) {}

    std::size_t side() const { return labels.size() + 1; }
    int missed_index() const { return static_cast<int>(labels.size()); }
    int index_of(char c) const {
        auto p = labels.find(c);
        return p == std::string::npos ? -1 : static_cast<int>(p);
    }
    std::int64_t& at(int gt, int pred) { return counts[gt * side() + pred]; }
    std::int64_t at(int gt, int pred) const { return counts[gt * side() + pred]; }
    std::int64_t row_sum(int gt) const {
        std::int64_t s = 0;
        for (std::size_t p = 0; p < side(); ++p) s += at(gt, static_cast<int>(p));
        return s;
    }
};

// Pairs the confusion report always calls out, confused in both directions
// by glyph shape.
inline constexpr std::array<std::pair<char, char>, 4> KNOWN_CONFUSABLE_PAIRS = {
    {{'0', 'D'}, {'S', '8'}, {'3', '9'}, {'Y', 'V'}}};

// Uppercased with all whitespace removed; comparisons use this form.
std::string normalize_plate_string(const std::string& s);

// Adds one plate's minimal-edit-distance alignment (unit costs; ties prefer
// substitution, then deletion, then insertion) into the matrix. Characters
// outside the label set are skipped.
void align_into_confusion(const std::string& predicted, const std::string& truth,
                          ConfusionMatrix& cm);

struct DetectionAccuracy {
    int n = 0;
    int correct = 0;
    double accuracy = 0.0;
};

// A prediction is correct iff IoU with its ground-truth box exceeds the
// threshold (strict). Both maps must hold exactly the same non-empty id set.
DetectionAccuracy plate_detection_accuracy(const std::map<std::string, BoundingBox>& preds,
                                           const std::map<std::string, BoundingBox>& gts,
                                           double threshold = 0.8);

struct RecognitionResult {
    int n = 0;
    int correct = 0;
    double accuracy = 0.0;
    ConfusionMatrix confusion;
};

// Exact-match rate of normalized strings plus the aligned confusion matrix.
// Both maps must hold exactly the same non-empty id set.
RecognitionResult recognition_accuracy(const std::map<std::string, std::string>& readings,
                                       const std::map<std::string, std::string>& gts);

struct PrCounts {
    std::int64_t tp = 0, fp = 0, fn = 0;
    // empty denominators count as perfect: no prediction implies no false alarm
    double precision() const {
        return tp + fp > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 1.0;
    }
    double recall() const {
        return tp + fn > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 1.0;
    }
};

// Box-level matching per image: walking predictions by descending score,
// each matches the highest-IoU unmatched ground-truth box of the same label
// with IoU >= iou_threshold. Both maps must hold the same id set.
PrCounts char_detection_pr(
    const std::map<std::string, std::vector<dpm::Detection>>& preds,
    const std::map<std::string, std::vector<synth::LabeledBox>>& gts,
    double iou_threshold = 0.5);

struct LatencyStats {
    int n = 0;
    double mean_ms = 0.0;
    double p50_ms = 0.0;
    double p95_ms = 0.0;
    std::vector<double> samples_ms; // in measurement order
};

// Nearest-rank percentiles and mean over the given samples.
LatencyStats latency_from_samples(std::vector<double> samples_ms);

// Runs fn over every image `warmup` untimed passes, then `reps` timed
// passes; one sample per (pass, image). reps >= 1.
LatencyStats timing_benchmark(const std::function<void(const ImageBuffer&)>& fn,
                              const std::vector<ImageBuffer>& images, int warmup,
                              int reps);

struct EvalReport {
    int n_images = 0;
    bool has_plate_detection = false;
    DetectionAccuracy plate_detection;
    int recog_correct = 0;
    double recog_accuracy = 0.0;
    ConfusionMatrix confusion;
    bool has_char_pr = false;
    PrCounts chars;
    bool has_latency = false;
    LatencyStats latency;
};

nlohmann::json report_to_json(const EvalReport& report);

// Human-readable table: accuracies, character precision/recall, the known
// confusable pairs in both directions, the largest off-diagonal confusion
// cells, and latency when present.
void print_report(std::ostream& os, const EvalReport& report);

} // namespace lpr::eval

#endif // LPR_EVAL_EVAL_HPP
