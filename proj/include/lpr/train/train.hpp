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

#ifndef LPR_TRAIN_TRAIN_HPP
#define LPR_TRAIN_TRAIN_HPP

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "lpr/dpm/model.hpp"
#include "lpr/geometry.hpp"
#include "lpr/hog.hpp"
#include "lpr/image.hpp"
#include "lpr/synth/synth.hpp"

namespace lpr::train {

// The bias weight is stored against a constant feature of this magnitude so
// regularization pressure on it stays comparable to the filter weights.
inline constexpr double BIAS_FEATURE = 10.0;

struct TrainingConfig {
    double lambda0 = 0.0003; // initial learning rate
    double decay = 0.9;      // per-epoch decay factor
    int epochs = 10;         // SGD passes per latent round; 0 = init only
    int latent_rounds = 3;
    double reg_c = 0.01;
    int negatives_per_positive = 5;
    std::uint64_t rng_seed = 1;
    // artifact knobs bounding runtime on large datasets
    int max_positives_per_class = 300;
    int backgrounds_per_round = 80;
    int threads = 1;
    std::string alphabet = dpm::FULL_ALPHABET;
    HogConfig hog;
};

// Learning rate for an epoch: the decay recurrence applied `epoch` times to
// lambda0. Kept as the literal iterated product so it reproduces repeated
// application of the update rule bit for bit.
double lr_schedule(const TrainingConfig& cfg, int epoch);

struct TrainingSample {
    int image_id = 0;
    std::string image_path; // resolved path to the plate crop
    char label = 0;         // 0 for negatives
    BoundingBox box;
    bool positive = false;
};

// Flattens manifest records into per-character samples. `split` filters by
// record split ("train"/"val"); empty takes everything. Paths are resolved
// against dataset_dir.
std::vector<TrainingSample> samples_from_manifest(
    const std::vector<synth::SynthRecord>& records, const std::string& dataset_dir,
    const std::string& split = "train");

// --- weight/feature packing -------------------------------------------------
// A model's free parameters as one vector: every part filter cell-major,
// then (a, b, c, d) per edge, then bias / BIAS_FEATURE. The matching
// feature vector packs window features, (dx^2, dy^2, dx, dy) per edge and
// the constant BIAS_FEATURE, so dot(weights, features) is the model score.

std::size_t packed_size(const dpm::CharacterTreeModel& model);
std::vector<double> pack_weights(const dpm::CharacterTreeModel& model);
void unpack_weights(const std::vector<double>& w, dpm::CharacterTreeModel& model);

std::vector<double> pack_features(const dpm::CharacterTreeModel& model,
                                  const HogCellGrid& grid,
                                  const std::vector<dpm::PartPlacement>& placements);

// --- latent completion -------------------------------------------------------
struct LatentPlacement {
    int level = 0;
    double score = 0.0;
    std::vector<dpm::PartPlacement> parts;
};

// Axis-aligned box in canonical-image pixels (doubles: no premature
// rounding when mapping source annotations through the canonical resize).
struct CanonicalBox {
    double x = 0, y = 0, w = 0, h = 0;
    double center_x() const { return x + 0.5 * w; }
    double center_y() const { return y + 0.5 * h; }
};

// Best placement with the root restricted to within one cell of the
// annotated center, searched at the level whose root window height best
// matches the annotation (falling back to the next-best level when the
// grid is too small; levels tie toward the lower index, cells toward the
// smallest y then x). Empty when no level admits a placement.
std::optional<LatentPlacement> latent_positive_relabel(
    const dpm::CharacterTreeModel& model, const HogPyramid& pyr,
    const CanonicalBox& box, const HogConfig& hog);

// --- hard negative mining -----------------------------------------------------
struct MinedNegative {
    std::vector<double> features;
    int image_index = 0;
    int level = 0;
    int root_x = 0;
    int root_y = 0;
    double score = 0.0;
};

// Top-k root placements over background images that contain no instance of
// the model's class. Candidates within Chebyshev distance 1 of a higher
// scoring one (same image and level) are suppressed; ordering is score
// descending with (image, level, y, x) breaking ties. May return fewer
// than k when candidates run out. Raises on an empty background list.
std::vector<MinedNegative> mine_hard_negatives(const dpm::CharacterTreeModel& model,
                                               const std::vector<ImageBuffer>& backgrounds,
                                               int k, const HogConfig& hog);

// --- optimization --------------------------------------------------------------
// One stochastic pass over L2-regularized hinge loss max(0, 1 - y*score).
// Positives and negatives are walked in a deterministic interleaving that
// preserves their relative order; shuffle beforehand for stochasticity.
// Deformation a,b are projected to <= -1e-3 afterwards.
dpm::CharacterTreeModel sgd_hinge_epoch(const dpm::CharacterTreeModel& model,
                                        const std::vector<std::vector<double>>& positives,
                                        const std::vector<std::vector<double>>& negatives,
                                        double lr, double reg_c);

// Full objective: 0.5*reg_c*|w|^2 + mean hinge over all samples.
double hinge_objective(const dpm::CharacterTreeModel& model,
                       const std::vector<std::vector<double>>& positives,
                       const std::vector<std::vector<double>>& negatives,
                       double reg_c);

// One deterministic full-batch subgradient step on the same objective.
dpm::CharacterTreeModel full_batch_hinge_step(const dpm::CharacterTreeModel& model,
                                              const std::vector<std::vector<double>>& positives,
                                              const std::vector<std::vector<double>>& negatives,
                                              double lr, double reg_c);

// --- orchestration --------------------------------------------------------------
// Alternates latent relabeling, hard-negative mining and SGD epochs for
// every class in config.alphabet, one mixture per class. Raises a
// missing-class error naming any class without positives and a divergence
// error if the objective goes non-finite. Deterministic for a fixed
// rng_seed at any thread count. Progress lines go to `log` when non-null.
dpm::CharacterModelSet train_character_models(const std::vector<TrainingSample>& samples,
                                              const TrainingConfig& cfg,
                                              std::ostream* log = nullptr);

} // namespace lpr::train

#endif // LPR_TRAIN_TRAIN_HPP
