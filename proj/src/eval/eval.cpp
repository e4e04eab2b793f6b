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

#include "lpr/eval/eval.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <ostream>

#include "lpr/error.hpp"

namespace lpr::eval {

namespace {

template <typename A, typename B>
void require_same_ids(const std::map<std::string, A>& preds,
                      const std::map<std::string, B>& gts) {
    if (preds.size() != gts.size())
        raise(ErrorKind::keying, "prediction and ground-truth id sets differ in size");
    auto pi = preds.begin();
    for (const auto& [id, v] : gts) {
        (void)v;
        if (pi->first != id)
            raise(ErrorKind::keying, "prediction and ground-truth ids differ at '" +
                                         (pi->first < id ? pi->first : id) + "'");
        ++pi;
    }
}

} // namespace

std::string normalize_plate_string(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (std::isspace(static_cast<unsigned char>(c))) continue;
        out.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
    }
    return out;
}

void align_into_confusion(const std::string& predicted, const std::string& truth,
                          ConfusionMatrix& cm) {
    const std::size_t m = truth.size(), n = predicted.size();
    // D[i][j]: edit distance between truth[0,i) and predicted[0,j)
    std::vector<int> D((m + 1) * (n + 1));
    auto at = [&](std::size_t i, std::size_t j) -> int& { return D[i * (n + 1) + j]; };
    for (std::size_t i = 0; i <= m; ++i) at(i, 0) = static_cast<int>(i);
    for (std::size_t j = 0; j <= n; ++j) at(0, j) = static_cast<int>(j);
    for (std::size_t i = 1; i <= m; ++i)
        for (std::size_t j = 1; j <= n; ++j) {
            int sub = at(i - 1, j - 1) + (truth[i - 1] == predicted[j - 1] ? 0 : 1);
            at(i, j) = std::min({sub, at(i - 1, j) + 1, at(i, j - 1) + 1});
        }

    const int missed = cm.missed_index();
    std::size_t i = m, j = n;
    while (i > 0 || j > 0) {
        if (i > 0 && j > 0 &&
            at(i, j) == at(i - 1, j - 1) + (truth[i - 1] == predicted[j - 1] ? 0 : 1)) {
            int g = cm.index_of(truth[i - 1]);
            int p = cm.index_of(predicted[j - 1]);
            if (g >= 0 && p >= 0) ++cm.at(g, p);
            --i;
            --j;
        } else if (i > 0 && at(i, j) == at(i - 1, j) + 1) {
            int g = cm.index_of(truth[i - 1]);
            if (g >= 0) ++cm.at(g, missed);
            --i;
        } else {
            int p = cm.index_of(predicted[j - 1]);
            if (p >= 0) ++cm.at(missed, p);
            --j;
        }
    }
}

DetectionAccuracy plate_detection_accuracy(const std::map<std::string, BoundingBox>& preds,
                                           const std::map<std::string, BoundingBox>& gts,
                                           double threshold) {
    if (!(threshold >= 0.0 && threshold <= 1.0))
        raise(ErrorKind::parameter, "overlap threshold must lie in [0,1]");
    if (gts.empty()) raise(ErrorKind::precondition, "no images to evaluate");
    require_same_ids(preds, gts);

    DetectionAccuracy r;
    r.n = static_cast<int>(gts.size());
    for (const auto& [id, gt] : gts)
        if (iou(preds.at(id), gt) > threshold) ++r.correct;
    r.accuracy = static_cast<double>(r.correct) / r.n;
    return r;
}

RecognitionResult recognition_accuracy(const std::map<std::string, std::string>& readings,
                                       const std::map<std::string, std::string>& gts) {
    if (gts.empty()) raise(ErrorKind::precondition, "no plates to evaluate");
    require_same_ids(readings, gts);

    RecognitionResult r;
    r.n = static_cast<int>(gts.size());
    for (const auto& [id, gt_raw] : gts) {
        std::string pred = normalize_plate_string(readings.at(id));
        std::string gt = normalize_plate_string(gt_raw);
        if (pred == gt) ++r.correct;
        align_into_confusion(pred, gt, r.confusion);
    }
    r.accuracy = static_cast<double>(r.correct) / r.n;
    return r;
}

PrCounts char_detection_pr(const std::map<std::string, std::vector<dpm::Detection>>& preds,
                           const std::map<std::string, std::vector<synth::LabeledBox>>& gts,
                           double iou_threshold) {
    if (!(iou_threshold > 0.0 && iou_threshold <= 1.0))
        raise(ErrorKind::parameter, "match threshold must lie in (0,1]");
    require_same_ids(preds, gts);

    PrCounts pr;
    for (const auto& [id, gt_boxes] : gts) {
        const auto& dets = preds.at(id);
        std::vector<std::size_t> order(dets.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return dets[a].score > dets[b].score;
        });

        std::vector<char> used(gt_boxes.size(), 0);
        for (std::size_t di : order) {
            int best = -1;
            double best_iou = 0.0;
            for (std::size_t gi = 0; gi < gt_boxes.size(); ++gi) {
                if (used[gi] || gt_boxes[gi].label != dets[di].label) continue;
                double v = iou(dets[di].box, gt_boxes[gi].box);
                if (v >= iou_threshold && v > best_iou) {
                    best_iou = v;
                    best = static_cast<int>(gi);
                }
            }
            if (best >= 0) {
                used[best] = 1;
                ++pr.tp;
            } else {
                ++pr.fp;
            }
        }
        for (char u : used)
            if (!u) ++pr.fn;
    }
    return pr;
}

LatencyStats latency_from_samples(std::vector<double> samples_ms) {
    if (samples_ms.empty())
        raise(ErrorKind::precondition, "no latency samples");
    LatencyStats s;
    s.n = static_cast<int>(samples_ms.size());
    double sum = 0.0;
    for (double v : samples_ms) sum += v;
    s.mean_ms = sum / s.n;

    std::vector<double> sorted = samples_ms;
    std::sort(sorted.begin(), sorted.end());
    auto rank = [&](double q) {
        std::size_t k = static_cast<std::size_t>(std::ceil(q * sorted.size()));
        return sorted[std::min(sorted.size() - 1, k > 0 ? k - 1 : 0)];
    };
    s.p50_ms = rank(0.50);
    s.p95_ms = rank(0.95);
    s.samples_ms = std::move(samples_ms);
    return s;
}

LatencyStats timing_benchmark(const std::function<void(const ImageBuffer&)>& fn,
                              const std::vector<ImageBuffer>& images, int warmup,
                              int reps) {
    if (reps < 1) raise(ErrorKind::parameter, "need at least one timed repetition");
    if (warmup < 0) raise(ErrorKind::parameter, "warmup count cannot be negative");
    if (images.empty()) raise(ErrorKind::precondition, "no images to benchmark");

    for (int w = 0; w < warmup; ++w)
        for (const auto& img : images) fn(img);

    std::vector<double> samples;
    samples.reserve(static_cast<std::size_t>(reps) * images.size());
    for (int r = 0; r < reps; ++r)
        for (const auto& img : images) {
            auto t0 = std::chrono::steady_clock::now();
            fn(img);
            auto t1 = std::chrono::steady_clock::now();
            samples.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
        }
    return latency_from_samples(std::move(samples));
}

nlohmann::json report_to_json(const EvalReport& report) {
    nlohmann::json j = {{"schema", "plate-eval/1"},
                        {"n_images", report.n_images},
                        {"recognition",
                         {{"correct", report.recog_correct},
                          {"accuracy", report.recog_accuracy}}},
                        {"confusion",
                         {{"labels", report.confusion.labels},
                          {"missed_index", report.confusion.missed_index()},
                          {"counts", report.confusion.counts}}}};
    if (report.has_plate_detection)
        j["plate_detection"] = {{"correct", report.plate_detection.correct},
                                {"n", report.plate_detection.n},
                                {"accuracy", report.plate_detection.accuracy}};
    if (report.has_char_pr)
        j["characters"] = {{"tp", report.chars.tp},
                           {"fp", report.chars.fp},
                           {"fn", report.chars.fn},
                           {"precision", report.chars.precision()},
                           {"recall", report.chars.recall()}};
    if (report.has_latency)
        j["latency_ms"] = {{"n", report.latency.n},
                           {"mean", report.latency.mean_ms},
                           {"p50", report.latency.p50_ms},
                           {"p95", report.latency.p95_ms}};
    return j;
}

void print_report(std::ostream& os, const EvalReport& report) {
    os << std::setprecision(6);
    os << "images:      " << report.n_images << "\n";
    if (report.has_plate_detection)
        os << "plate boxes: " << report.plate_detection.correct << "/"
           << report.plate_detection.n << " correct, accuracy "
           << report.plate_detection.accuracy << "\n";
    os << "recognition: " << report.recog_correct << "/" << report.n_images
       << " exact, accuracy " << report.recog_accuracy << "\n";
    if (report.has_char_pr)
        os << "characters:  precision " << report.chars.precision() << " (tp "
           << report.chars.tp << ", fp " << report.chars.fp << "), recall "
           << report.chars.recall() << " (fn " << report.chars.fn << ")\n";

    const auto& cm = report.confusion;
    os << "confusable pairs:";
    for (const auto& [a, b] : KNOWN_CONFUSABLE_PAIRS) {
        int ia = cm.index_of(a), ib = cm.index_of(b);
        os << "  " << a << ">" << b << ":" << (ia >= 0 && ib >= 0 ? cm.at(ia, ib) : 0)
           << " " << b << ">" << a << ":" << (ia >= 0 && ib >= 0 ? cm.at(ib, ia) : 0);
    }
    os << "\n";

    struct Cell {
        std::int64_t count;
        int gt, pred;
    };
    std::vector<Cell> cells;
    for (std::size_t g = 0; g < cm.side(); ++g)
        for (std::size_t p = 0; p < cm.side(); ++p) {
            if (g == p) continue;
            std::int64_t c = cm.at(static_cast<int>(g), static_cast<int>(p));
            if (c > 0) cells.push_back({c, static_cast<int>(g), static_cast<int>(p)});
        }
    std::sort(cells.begin(), cells.end(), [](const Cell& a, const Cell& b) {
        if (a.count != b.count) return a.count > b.count;
        if (a.gt != b.gt) return a.gt < b.gt;
        return a.pred < b.pred;
    });
    if (!cells.empty()) {
        os << "top confusions (truth>read, '.' = none):\n";
        const std::size_t limit = 20;
        for (std::size_t i = 0; i < cells.size() && i < limit; ++i) {
            char g = cells[i].gt == cm.missed_index() ? '.' : cm.labels[cells[i].gt];
            char p = cells[i].pred == cm.missed_index() ? '.' : cm.labels[cells[i].pred];
            os << "  " << g << " > " << p << "  " << cells[i].count << "\n";
        }
    }
    if (report.has_latency)
        os << "latency:     mean " << report.latency.mean_ms << " ms, p50 "
           << report.latency.p50_ms << " ms, p95 " << report.latency.p95_ms << " ms (n="
           << report.latency.n << ")\n";
}

} // namespace lpr::eval
