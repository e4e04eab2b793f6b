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
//
// platedpm: synthesize plate data, train character models, recognize plates,
// evaluate readings, and benchmark the recognizer. One subcommand per step;
// every run is reproducible for a fixed --seed and any --threads value.
// Exit codes: 0 success, 1 runtime error, 2 argument error, 3 failed
// assertion gate.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "lpr/dpm/model_io.hpp"
#include "lpr/error.hpp"
#include "lpr/eval/eval.hpp"
#include "lpr/image_codec.hpp"
#include "lpr/pipeline/pipeline.hpp"
#include "lpr/synth/synth.hpp"
#include "lpr/train/train.hpp"

#include <CLI11.hpp>
#include <json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

int default_threads() {
    unsigned n = std::thread::hardware_concurrency();
    return n > 0 ? static_cast<int>(n) : 1;
}

std::string stem_of(const std::string& path) { return fs::path(path).stem().string(); }

int missing_argument(const std::string& what) {
    std::cerr << "error: " << what << " is required\n";
    return 2;
}

// --- synth ----------------------------------------------------------------------

struct SynthArgs {
    int n = 0;
    std::string out;
    std::string font = "assets/plate_font.json";
    std::uint64_t seed = 1;
    double train_frac = 0.8;
    double val_frac = 0.2;
    double nir_mix = 0.5;
    bool no_augment = false;
    int threads = default_threads();
    bool show_config = false;
};

int run_synth(const SynthArgs& a) {
    json cfg_json = {{"n", a.n},           {"out", a.out},
                     {"font", a.font},     {"seed", a.seed},
                     {"train_frac", a.train_frac}, {"val_frac", a.val_frac},
                     {"nir_mix", a.nir_mix},       {"augment", !a.no_augment},
                     {"threads", a.threads}};
    if (a.show_config) {
        std::cout << cfg_json.dump(2) << "\n";
        return 0;
    }
    if (a.out.empty()) return missing_argument("--out");

    lpr::synth::GlyphSet glyphs = lpr::synth::load_glyph_set(a.font);
    lpr::synth::DatasetConfig cfg;
    cfg.count = a.n;
    cfg.train_fraction = a.train_frac;
    cfg.val_fraction = a.val_frac;
    cfg.nir_mix = a.nir_mix;
    cfg.seed = a.seed;
    cfg.augment_train = !a.no_augment;

    auto records = lpr::synth::generate_dataset(cfg, glyphs, a.out, a.threads);
    int train = 0, val = 0;
    for (const auto& r : records) (r.split == "train" ? train : val) += 1;
    std::cout << "manifest: " << (fs::path(a.out) / "manifest.jsonl").string() << "\n"
              << "records: " << records.size() << " (train " << train << ", val " << val
              << ")\n";
    return 0;
}

// --- train ----------------------------------------------------------------------

struct TrainArgs {
    std::string manifest;
    std::string dataset; // defaults to the manifest's directory
    std::string out;
    std::string split = "train";
    lpr::train::TrainingConfig cfg;
    bool quiet = false;
    bool show_config = false;
};

int run_train(const TrainArgs& a) {
    json cfg_json = {{"manifest", a.manifest},
                     {"dataset", a.dataset},
                     {"out", a.out},
                     {"split", a.split},
                     {"alphabet", a.cfg.alphabet},
                     {"lambda0", a.cfg.lambda0},
                     {"decay", a.cfg.decay},
                     {"epochs", a.cfg.epochs},
                     {"rounds", a.cfg.latent_rounds},
                     {"reg", a.cfg.reg_c},
                     {"neg_per_pos", a.cfg.negatives_per_positive},
                     {"max_pos", a.cfg.max_positives_per_class},
                     {"bg_per_round", a.cfg.backgrounds_per_round},
                     {"seed", a.cfg.rng_seed},
                     {"threads", a.cfg.threads}};
    if (a.show_config) {
        std::cout << cfg_json.dump(2) << "\n";
        return 0;
    }
    if (a.manifest.empty()) return missing_argument("--manifest");
    if (a.out.empty()) return missing_argument("--out");

    std::string dataset = a.dataset.empty()
                              ? fs::path(a.manifest).parent_path().string()
                              : a.dataset;
    auto records = lpr::synth::load_manifest(a.manifest);
    auto samples = lpr::train::samples_from_manifest(records, dataset, a.split);
    auto set = lpr::train::train_character_models(samples, a.cfg,
                                                  a.quiet ? nullptr : &std::cout);
    lpr::dpm::save_model(set, a.out);
    std::cout << "model: " << a.out << " (" << set.classes.size() << " classes)\n";
    return 0;
}

// --- recognize ------------------------------------------------------------------

struct RecognizeArgs {
    std::string model;
    std::vector<std::string> images;
    std::string localizer = "none"; // none | annotation | projection
    std::string boxes;              // annotation backend input
    std::string out;                // readings file; empty = stdout
    std::string overlay_dir;
    std::string font; // enables glyph labels on overlays
    lpr::pipeline::RecognizeOptions opts;
    std::string overlap_mode = "min-area";
    bool show_config = false;
};

int run_recognize(const RecognizeArgs& a) {
    json cfg_json = {{"model", a.model},
                     {"localizer", a.localizer},
                     {"boxes", a.boxes},
                     {"out", a.out},
                     {"overlay", a.overlay_dir},
                     {"threshold", a.opts.threshold},
                     {"overlap", a.opts.overlap_ratio},
                     {"overlap_mode", a.overlap_mode},
                     {"margin", a.opts.report_margin},
                     {"threads", a.opts.threads},
                     {"images", a.images.size()}};
    if (a.show_config) {
        std::cout << cfg_json.dump(2) << "\n";
        return 0;
    }
    if (a.model.empty()) return missing_argument("--model (or PLATEDPM_MODEL)");
    if (a.images.empty()) return missing_argument("at least one image");
    if (a.localizer == "annotation" && a.boxes.empty())
        return missing_argument("--boxes with the annotation localizer");

    auto set = lpr::dpm::load_model(a.model);
    lpr::pipeline::RecognizeOptions opts = a.opts;
    opts.overlap_mode = a.overlap_mode == "iou" ? lpr::pipeline::OverlapMode::iou
                                                : lpr::pipeline::OverlapMode::min_area;

    lpr::pipeline::PlateLocalizer loc;
    if (a.localizer == "annotation") {
        loc.backend = lpr::pipeline::LocalizerBackend::annotation_backed;
        loc.annotations = lpr::pipeline::load_plate_boxes(a.boxes);
    } else {
        loc.backend = lpr::pipeline::LocalizerBackend::projection_heuristic;
    }

    std::optional<lpr::synth::GlyphSet> glyphs;
    if (!a.font.empty()) glyphs = lpr::synth::load_glyph_set(a.font);
    if (!a.overlay_dir.empty()) fs::create_directories(a.overlay_dir);

    std::ostringstream body;
    for (const auto& path : a.images) {
        const std::string id = stem_of(path);
        lpr::ImageBuffer img = lpr::load_image(path);

        std::optional<lpr::pipeline::PlateReading> reading;
        if (a.localizer == "none") {
            reading = lpr::pipeline::recognize_plate(img, set, opts);
        } else {
            loc.image_id = id;
            reading = lpr::pipeline::recognize_image(img, loc, set, opts);
        }

        if (!reading) {
            json j = {{"schema", "plate-reading/1"}, {"id", id},         {"no_plate", true},
                      {"plate_box", {0, 0, 0, 0}},   {"text", ""},       {"unsatisfiable", true},
                      {"chars", json::array()},      {"rejected", json::array()}};
            body << j.dump() << "\n";
            continue;
        }
        body << lpr::pipeline::reading_to_json(id, *reading).dump() << "\n";
        if (!a.overlay_dir.empty()) {
            lpr::ImageBuffer shown =
                a.localizer == "none" ? img : lpr::crop(img, reading->plate_box);
            lpr::ImageBuffer over = lpr::pipeline::draw_reading_overlay(
                shown, *reading, glyphs ? &*glyphs : nullptr);
            lpr::save_png(over, (fs::path(a.overlay_dir) / (id + ".png")).string());
        }
    }

    if (a.out.empty()) {
        std::cout << body.str();
    } else {
        std::ofstream f(a.out);
        if (!f) lpr::raise(lpr::ErrorKind::io, "cannot write readings to " + a.out);
        f << body.str();
    }
    return 0;
}

// --- eval -----------------------------------------------------------------------

struct EvalArgs {
    std::string readings;
    std::string manifest;
    std::string split = "val";
    double iou_threshold = 0.8;
    double match_iou = 0.5;
    double assert_accuracy = -1.0; // < 0 disables the gate
    bool as_json = false;
    bool show_config = false;
};

int run_eval(const EvalArgs& a) {
    json cfg_json = {{"readings", a.readings},       {"manifest", a.manifest},
                     {"split", a.split},             {"iou", a.iou_threshold},
                     {"match_iou", a.match_iou},     {"assert_accuracy", a.assert_accuracy},
                     {"json", a.as_json}};
    if (a.show_config) {
        std::cout << cfg_json.dump(2) << "\n";
        return 0;
    }
    if (a.readings.empty()) return missing_argument("--readings");
    if (a.manifest.empty()) return missing_argument("--manifest");

    std::ifstream rf(a.readings);
    if (!rf) lpr::raise(lpr::ErrorKind::io, "cannot open readings: " + a.readings);
    auto rows = lpr::pipeline::read_readings(rf);

    auto records = lpr::synth::load_manifest(a.manifest);
    std::map<std::string, std::string> gt_text;
    std::map<std::string, lpr::BoundingBox> gt_box;
    std::map<std::string, std::vector<lpr::synth::LabeledBox>> gt_chars;
    for (const auto& r : records) {
        if (!a.split.empty() && r.split != a.split) continue;
        const std::string id = stem_of(r.image_path);
        gt_text[id] = r.plate;
        gt_box[id] = r.plate_box;
        gt_chars[id] = r.chars;
    }

    std::map<std::string, std::string> texts;
    std::map<std::string, lpr::BoundingBox> boxes;
    std::map<std::string, std::vector<lpr::dpm::Detection>> chars;
    for (const auto& [id, reading] : rows) {
        texts[id] = reading.text;
        boxes[id] = reading.plate_box;
        chars[id] = reading.ordered;
    }

    lpr::eval::EvalReport report;
    auto rec = lpr::eval::recognition_accuracy(texts, gt_text);
    report.n_images = rec.n;
    report.recog_correct = rec.correct;
    report.recog_accuracy = rec.accuracy;
    report.confusion = std::move(rec.confusion);
    report.has_plate_detection = true;
    report.plate_detection =
        lpr::eval::plate_detection_accuracy(boxes, gt_box, a.iou_threshold);
    report.has_char_pr = true;
    report.chars = lpr::eval::char_detection_pr(chars, gt_chars, a.match_iou);

    if (a.as_json)
        std::cout << lpr::eval::report_to_json(report).dump(2) << "\n";
    else
        lpr::eval::print_report(std::cout, report);

    if (a.assert_accuracy >= 0.0 && report.recog_accuracy < a.assert_accuracy) {
        std::cerr << "accuracy gate failed: " << report.recog_accuracy << " < "
                  << a.assert_accuracy << "\n";
        return 3;
    }
    return 0;
}

// --- bench ----------------------------------------------------------------------

struct BenchArgs {
    std::string model;
    std::vector<std::string> images;
    int warmup = 1;
    int reps = 3;
    lpr::pipeline::RecognizeOptions opts;
    bool show_config = false;
};

int run_bench(const BenchArgs& a) {
    json cfg_json = {{"model", a.model},   {"warmup", a.warmup},
                     {"reps", a.reps},     {"threshold", a.opts.threshold},
                     {"threads", a.opts.threads}, {"images", a.images.size()}};
    if (a.show_config) {
        std::cout << cfg_json.dump(2) << "\n";
        return 0;
    }
    if (a.model.empty()) return missing_argument("--model (or PLATEDPM_MODEL)");
    if (a.images.empty()) return missing_argument("at least one image");

    auto set = lpr::dpm::load_model(a.model);
    std::vector<lpr::ImageBuffer> imgs;
    for (const auto& p : a.images) imgs.push_back(lpr::load_image(p));

    // one untimed pass prints the readings so thread-count comparisons can
    // diff the recognition output itself
    for (std::size_t i = 0; i < imgs.size(); ++i) {
        auto reading = lpr::pipeline::recognize_plate(imgs[i], set, a.opts);
        std::cout << stem_of(a.images[i]) << " " << reading.text << "\n";
    }

    auto stats = lpr::eval::timing_benchmark(
        [&](const lpr::ImageBuffer& img) {
            auto reading = lpr::pipeline::recognize_plate(img, set, a.opts);
            (void)reading;
        },
        imgs, a.warmup, a.reps);
    std::cout << "latency: mean " << stats.mean_ms << " ms, p50 " << stats.p50_ms
              << " ms, p95 " << stats.p95_ms << " ms (n=" << stats.n << ")\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"segmentation-free license plate recognition with part-based "
                 "character models"};
    app.require_subcommand(1);

    SynthArgs sa;
    auto* synth = app.add_subcommand("synth", "generate a labeled synthetic dataset");
    synth->add_option("--n", sa.n, "number of plates")->check(CLI::PositiveNumber);
    synth->add_option("--out", sa.out, "output directory");
    synth->add_option("--font", sa.font, "glyph asset path")->envname("PLATEDPM_FONT");
    synth->add_option("--seed", sa.seed, "dataset seed");
    synth->add_option("--train-frac", sa.train_frac, "train fraction");
    synth->add_option("--val-frac", sa.val_frac, "validation fraction");
    synth->add_option("--nir-mix", sa.nir_mix, "fraction rendered as NIR");
    synth->add_flag("--no-augment", sa.no_augment, "disable training augmentation");
    synth->add_option("--threads", sa.threads, "worker threads");
    synth->add_flag("--show-config", sa.show_config, "print effective settings and exit");

    TrainArgs ta;
    ta.cfg.threads = default_threads();
    auto* train = app.add_subcommand("train", "train character models from a manifest");
    train->add_option("--manifest", ta.manifest, "dataset manifest")
        ->check(CLI::ExistingFile);
    train->add_option("--dataset", ta.dataset, "dataset directory (default: manifest dir)");
    train->add_option("--out", ta.out, "model output path");
    train->add_option("--split", ta.split, "record split to train on");
    train->add_option("--alphabet", ta.cfg.alphabet, "classes to train");
    train->add_option("--lambda0", ta.cfg.lambda0, "initial learning rate");
    train->add_option("--decay", ta.cfg.decay, "per-epoch learning-rate decay");
    train->add_option("--epochs", ta.cfg.epochs, "SGD epochs per round (0 = init only)");
    train->add_option("--rounds", ta.cfg.latent_rounds, "latent relabeling rounds");
    train->add_option("--reg", ta.cfg.reg_c, "regularization weight");
    train->add_option("--neg-per-pos", ta.cfg.negatives_per_positive,
                      "hard-negative cache size per positive");
    train->add_option("--max-pos", ta.cfg.max_positives_per_class,
                      "positive subsample cap per class");
    train->add_option("--bg-per-round", ta.cfg.backgrounds_per_round,
                      "background images mined per round");
    train->add_option("--seed", ta.cfg.rng_seed, "training seed");
    train->add_option("--threads", ta.cfg.threads, "worker threads");
    train->add_flag("--quiet", ta.quiet, "suppress progress lines");
    train->add_flag("--show-config", ta.show_config, "print effective settings and exit");

    RecognizeArgs ra;
    ra.opts.threads = default_threads();
    auto* rec = app.add_subcommand("recognize", "read plates from images");
    rec->add_option("--model", ra.model, "model file")->envname("PLATEDPM_MODEL");
    rec->add_option("images", ra.images, "image files")->check(CLI::ExistingFile);
    rec->add_option("--localizer", ra.localizer, "none | annotation | projection")
        ->check(CLI::IsMember({"none", "annotation", "projection"}));
    rec->add_option("--boxes", ra.boxes, "plate-box file for the annotation localizer")
        ->check(CLI::ExistingFile);
    rec->add_option("--out", ra.out, "readings output file (default: stdout)");
    rec->add_option("--overlay", ra.overlay_dir, "directory for overlay PNGs");
    rec->add_option("--font", ra.font, "glyph asset for overlay labels")
        ->envname("PLATEDPM_FONT");
    rec->add_option("--threshold", ra.opts.threshold, "detection score threshold");
    rec->add_option("--overlap", ra.opts.overlap_ratio, "duplicate-suppression ratio");
    rec->add_option("--overlap-mode", ra.overlap_mode, "min-area | iou")
        ->check(CLI::IsMember({"min-area", "iou"}));
    rec->add_option("--margin", ra.opts.report_margin,
                    "record below-threshold detections within this margin");
    rec->add_option("--threads", ra.opts.threads, "worker threads");
    rec->add_flag("--show-config", ra.show_config, "print effective settings and exit");

    EvalArgs ea;
    auto* ev = app.add_subcommand("eval", "score readings against a manifest");
    ev->add_option("--readings", ea.readings, "readings file from recognize")
        ->check(CLI::ExistingFile);
    ev->add_option("--manifest", ea.manifest, "ground-truth manifest")
        ->check(CLI::ExistingFile);
    ev->add_option("--split", ea.split, "manifest split to score against");
    ev->add_option("--iou", ea.iou_threshold, "plate-box correctness threshold");
    ev->add_option("--match-iou", ea.match_iou, "character box match threshold");
    ev->add_option("--assert-accuracy", ea.assert_accuracy,
                   "exit 3 when recognition accuracy falls below this");
    ev->add_flag("--json", ea.as_json, "emit the report as JSON");
    ev->add_flag("--show-config", ea.show_config, "print effective settings and exit");

    BenchArgs ba;
    ba.opts.threads = default_threads();
    auto* bench = app.add_subcommand("bench", "measure recognition latency");
    bench->add_option("--model", ba.model, "model file")->envname("PLATEDPM_MODEL");
    bench->add_option("images", ba.images, "image files")->check(CLI::ExistingFile);
    bench->add_option("--warmup", ba.warmup, "untimed passes");
    bench->add_option("--reps", ba.reps, "timed passes");
    bench->add_option("--threshold", ba.opts.threshold, "detection score threshold");
    bench->add_option("--threads", ba.opts.threads, "worker threads");
    bench->add_flag("--show-config", ba.show_config, "print effective settings and exit");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*synth) return run_synth(sa);
        if (*train) return run_train(ta);
        if (*rec) return run_recognize(ra);
        if (*ev) return run_eval(ea);
        if (*bench) return run_bench(ba);
    } catch (const lpr::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
