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

#include "lpr/train/train.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <set>
#include <sstream>

#include "lpr/dpm/distance_transform.hpp"
#include "lpr/dpm/inference.hpp"
#include "lpr/error.hpp"
#include "lpr/image_codec.hpp"
#include "lpr/parallel.hpp"
#include "lpr/rng.hpp"

namespace lpr::train {

namespace {

void validate_config(const TrainingConfig& cfg) {
    if (!(cfg.lambda0 > 0.0))
        raise(ErrorKind::parameter, "initial learning rate must be positive");
    if (!(cfg.decay > 0.0 && cfg.decay <= 1.0))
        raise(ErrorKind::parameter, "decay must lie in (0,1]");
    if (cfg.epochs < 0 || cfg.latent_rounds < 0)
        raise(ErrorKind::parameter, "epoch and round counts cannot be negative");
    if (cfg.reg_c < 0.0)
        raise(ErrorKind::parameter, "regularization weight cannot be negative");
    if (cfg.negatives_per_positive < 1)
        raise(ErrorKind::parameter, "need at least one negative per positive");
    if (cfg.max_positives_per_class < 1 || cfg.backgrounds_per_round < 1)
        raise(ErrorKind::parameter, "sampling budgets must be positive");
    if (cfg.alphabet.empty())
        raise(ErrorKind::parameter, "alphabet is empty");
    std::set<char> seen(cfg.alphabet.begin(), cfg.alphabet.end());
    if (seen.size() != cfg.alphabet.size())
        raise(ErrorKind::parameter, "alphabet has repeated characters");
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

// grayscale canonical-height view of a stored plate crop
ImageBuffer load_canonical(const std::string& path, const HogConfig& hog,
                           double& fx, double& fy) {
    ImageBuffer img = load_image(path);
    ImageBuffer gray = img.channels == 1 ? std::move(img) : to_grayscale(img);
    int canon_w = std::max(2 * hog.cell_size,
                           static_cast<int>(std::lround(
                               gray.width * static_cast<double>(hog.canonical_height) /
                               gray.height)));
    fx = static_cast<double>(canon_w) / gray.width;
    fy = static_cast<double>(hog.canonical_height) / gray.height;
    return resize(gray, canon_w, hog.canonical_height);
}

CanonicalBox to_canonical(const BoundingBox& b, double fx, double fy) {
    return {b.x * fx, b.y * fy, b.w * fx, b.h * fy};
}

// levels ordered by how well the root window height matches the box
std::vector<int> levels_by_size_match(const HogPyramid& pyr,
                                      const dpm::CharacterTreeModel& model,
                                      double box_h, const HogConfig& hog) {
    std::vector<std::pair<double, int>> scored;
    for (std::size_t k = 0; k < pyr.levels.size(); ++k) {
        double window_h = model.parts[0].cells_y * hog.cell_size / pyr.scale_of_level[k];
        scored.emplace_back(std::abs(std::log(window_h / box_h)), static_cast<int>(k));
    }
    std::stable_sort(scored.begin(), scored.end());
    std::vector<int> order;
    for (auto& [m, k] : scored) order.push_back(k);
    return order;
}

bool model_fits(const dpm::CharacterTreeModel& model, const HogCellGrid& grid) {
    for (const auto& p : model.parts)
        if (grid.cells_x < p.cells_x || grid.cells_y < p.cells_y) return false;
    return true;
}

struct ImageTable {
    std::vector<std::string> path_of;          // by image id
    std::vector<std::set<char>> labels_of;     // positive labels per image
};

ImageTable build_image_table(const std::vector<TrainingSample>& samples) {
    int max_id = -1;
    for (const auto& s : samples) max_id = std::max(max_id, s.image_id);
    ImageTable t;
    t.path_of.resize(static_cast<std::size_t>(max_id) + 1);
    t.labels_of.resize(static_cast<std::size_t>(max_id) + 1);
    for (const auto& s : samples) {
        if (s.image_id < 0)
            raise(ErrorKind::precondition, "sample has a negative image id");
        t.path_of[s.image_id] = s.image_path;
        if (s.positive) t.labels_of[s.image_id].insert(s.label);
    }
    return t;
}

} // namespace

double lr_schedule(const TrainingConfig& cfg, int epoch) {
    if (!(cfg.lambda0 > 0.0) || !(cfg.decay > 0.0 && cfg.decay <= 1.0))
        raise(ErrorKind::parameter, "learning-rate schedule parameters out of range");
    if (epoch < 0)
        raise(ErrorKind::precondition, "epoch index cannot be negative");
    double lr = cfg.lambda0;
    for (int i = 0; i < epoch; ++i) lr *= cfg.decay;
    return lr;
}

std::vector<TrainingSample> samples_from_manifest(
    const std::vector<synth::SynthRecord>& records, const std::string& dataset_dir,
    const std::string& split) {
    namespace fs = std::filesystem;
    std::vector<TrainingSample> out;
    for (const auto& r : records) {
        if (!split.empty() && r.split != split) continue;
        for (const auto& cb : r.chars) {
            TrainingSample s;
            s.image_id = r.index;
            s.image_path = (fs::path(dataset_dir) / r.image_path).string();
            s.label = cb.label;
            s.box = cb.box;
            s.positive = true;
            out.push_back(std::move(s));
        }
    }
    return out;
}

std::size_t packed_size(const dpm::CharacterTreeModel& model) {
    std::size_t n = 0;
    for (const auto& p : model.parts) n += p.weights.size();
    return n + 4 * model.edges.size() + 1;
}

std::vector<double> pack_weights(const dpm::CharacterTreeModel& model) {
    std::vector<double> w;
    w.reserve(packed_size(model));
    for (const auto& p : model.parts) w.insert(w.end(), p.weights.begin(), p.weights.end());
    for (const auto& e : model.edges) {
        w.push_back(e.deform.a);
        w.push_back(e.deform.b);
        w.push_back(e.deform.c);
        w.push_back(e.deform.d);
    }
    w.push_back(model.bias / BIAS_FEATURE);
    return w;
}

void unpack_weights(const std::vector<double>& w, dpm::CharacterTreeModel& model) {
    if (w.size() != packed_size(model))
        raise(ErrorKind::precondition, "weight vector does not match the model layout");
    std::size_t k = 0;
    for (auto& p : model.parts) {
        std::copy(w.begin() + k, w.begin() + k + p.weights.size(), p.weights.begin());
        k += p.weights.size();
    }
    for (auto& e : model.edges) {
        e.deform.a = w[k++];
        e.deform.b = w[k++];
        e.deform.c = w[k++];
        e.deform.d = w[k++];
    }
    model.bias = w[k] * BIAS_FEATURE;
}

std::vector<double> pack_features(const dpm::CharacterTreeModel& model,
                                  const HogCellGrid& grid,
                                  const std::vector<dpm::PartPlacement>& placements) {
    if (placements.size() != model.parts.size())
        raise(ErrorKind::precondition, "placement count does not match part count");
    std::vector<const dpm::PartPlacement*> by_part(model.parts.size(), nullptr);
    for (const auto& p : placements) {
        if (p.part < 0 || p.part >= static_cast<int>(model.parts.size()) || by_part[p.part])
            raise(ErrorKind::precondition, "placements must name each part once");
        by_part[p.part] = &p;
    }

    std::vector<double> psi;
    psi.reserve(packed_size(model));
    for (std::size_t i = 0; i < model.parts.size(); ++i) {
        const auto& f = model.parts[i];
        const auto* p = by_part[i];
        if (p->cell_x < 0 || p->cell_y < 0 ||
            p->cell_x + f.cells_x > grid.cells_x || p->cell_y + f.cells_y > grid.cells_y)
            raise(ErrorKind::bounds, "placement sticks out of the feature grid");
        for (int fy = 0; fy < f.cells_y; ++fy) {
            const double* row = grid.cell(p->cell_x, p->cell_y + fy);
            psi.insert(psi.end(), row, row + static_cast<std::size_t>(f.cells_x) * f.dim);
        }
    }
    for (const auto& e : model.edges) {
        double dx = by_part[e.child]->cell_x - (by_part[e.parent]->cell_x + e.anchor_dx);
        double dy = by_part[e.child]->cell_y - (by_part[e.parent]->cell_y + e.anchor_dy);
        psi.push_back(dx * dx);
        psi.push_back(dy * dy);
        psi.push_back(dx);
        psi.push_back(dy);
    }
    psi.push_back(BIAS_FEATURE);
    return psi;
}

std::optional<LatentPlacement> latent_positive_relabel(
    const dpm::CharacterTreeModel& model, const HogPyramid& pyr,
    const CanonicalBox& box, const HogConfig& hog) {
    if (!(box.w > 0.0) || !(box.h > 0.0))
        raise(ErrorKind::precondition, "annotation box must have positive extent");

    const auto& root = model.parts[0];
    for (int lvl : levels_by_size_match(pyr, model, box.h, hog)) {
        const HogCellGrid& grid = pyr.levels[lvl];
        if (!model_fits(model, grid)) continue;
        double s = pyr.scale_of_level[lvl];
        int max_x = grid.cells_x - root.cells_x;
        int max_y = grid.cells_y - root.cells_y;
        int cx = static_cast<int>(std::lround(box.center_x() * s / hog.cell_size -
                                              root.cells_x / 2.0));
        int cy = static_cast<int>(std::lround(box.center_y() * s / hog.cell_size -
                                              root.cells_y / 2.0));
        int x0 = std::max(0, cx - 1), x1 = std::min(max_x, cx + 1);
        int y0 = std::max(0, cy - 1), y1 = std::min(max_y, cy + 1);
        if (x0 > x1 || y0 > y1) continue;

        // children searched globally via their transforms; the root is
        // evaluated only on the restricted window
        std::vector<dpm::TransformedMap> messages(model.edges.size());
        std::vector<ScoreMap> maps(model.parts.size());
        for (std::size_t i = 1; i < model.parts.size(); ++i)
            maps[i] = dpm::appearance_response(grid, model.parts[i]);
        for (int e = static_cast<int>(model.edges.size()) - 1; e >= 0; --e) {
            const auto& edge = model.edges[e];
            int pw = edge.parent == 0 ? max_x + 1 : maps[edge.parent].width;
            int ph = edge.parent == 0 ? max_y + 1 : maps[edge.parent].height;
            messages[e] = dpm::distance_transform_message(maps[edge.child], edge.deform,
                                                          edge.anchor_dx, edge.anchor_dy,
                                                          pw, ph);
            if (edge.parent != 0) {
                ScoreMap& parent = maps[edge.parent];
                for (std::size_t i = 0; i < parent.data.size(); ++i)
                    parent.data[i] += messages[e].score.data[i];
            }
        }

        bool found = false;
        LatentPlacement best;
        for (int y = y0; y <= y1; ++y)
            for (int x = x0; x <= x1; ++x) {
                double score = model.bias;
                for (int fy = 0; fy < root.cells_y; ++fy) {
                    const double* w = root.cell(0, fy);
                    const double* v = grid.cell(x, y + fy);
                    double a = 0.0;
                    const int len = root.cells_x * root.dim;
                    for (int i = 0; i < len; ++i) a += w[i] * v[i];
                    score += a;
                }
                for (std::size_t e = 0; e < model.edges.size(); ++e)
                    if (model.edges[e].parent == 0)
                        score += messages[e].score.at(x, y);
                if (!found || score > best.score) {
                    found = true;
                    best.score = score;
                    best.level = lvl;
                    best.parts.assign(model.parts.size(), {});
                    best.parts[0] = {0, x, y};
                    for (std::size_t e = 0; e < model.edges.size(); ++e) {
                        const auto& edge = model.edges[e];
                        const auto& par = best.parts[edge.parent];
                        best.parts[edge.child] = {edge.child,
                                                  messages[e].argx.at(par.cell_x, par.cell_y),
                                                  messages[e].argy.at(par.cell_x, par.cell_y)};
                    }
                }
            }
        if (found) return best;
    }
    return std::nullopt;
}

std::vector<MinedNegative> mine_hard_negatives(const dpm::CharacterTreeModel& model,
                                               const std::vector<ImageBuffer>& backgrounds,
                                               int k, const HogConfig& hog) {
    if (backgrounds.empty())
        raise(ErrorKind::precondition, "hard-negative mining needs at least one background");
    if (k <= 0) return {};

    const int per_image_cap =
        std::max(4, static_cast<int>((2LL * k + static_cast<int>(backgrounds.size()) - 1) /
                                     static_cast<int>(backgrounds.size())));

    std::vector<MinedNegative> pool;
    for (std::size_t bi = 0; bi < backgrounds.size(); ++bi) {
        const ImageBuffer& src = backgrounds[bi];
        ImageBuffer gray = src.channels == 1 ? src : to_grayscale(src);
        int canon_w = std::max(2 * hog.cell_size,
                               static_cast<int>(std::lround(
                                   gray.width * static_cast<double>(hog.canonical_height) /
                                   gray.height)));
        ImageBuffer canon = resize(gray, canon_w, hog.canonical_height);

        int min_cx = 1, min_cy = 1;
        for (const auto& p : model.parts) {
            min_cx = std::max(min_cx, p.cells_x);
            min_cy = std::max(min_cy, p.cells_y);
        }
        HogPyramid pyr = build_pyramid(canon, hog.pyramid_levels, hog.scale_step, hog,
                                       min_cx, min_cy);

        struct Cand {
            double score;
            int level, y, x;
        };
        std::vector<Cand> cands;
        std::vector<dpm::TreeInference> infs(pyr.levels.size());
        for (std::size_t lvl = 0; lvl < pyr.levels.size(); ++lvl) {
            if (!model_fits(model, pyr.levels[lvl])) continue;
            infs[lvl] = dpm::score_tree(pyr.levels[lvl], model);
            const ScoreMap& m = infs[lvl].root_score;
            for (int y = 0; y < m.height; ++y)
                for (int x = 0; x < m.width; ++x)
                    cands.push_back({m.at(x, y), static_cast<int>(lvl), y, x});
        }
        std::stable_sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
            if (a.score != b.score) return a.score > b.score;
            if (a.level != b.level) return a.level < b.level;
            if (a.y != b.y) return a.y < b.y;
            return a.x < b.x;
        });

        std::vector<Cand> taken;
        for (const auto& c : cands) {
            if (static_cast<int>(taken.size()) >= per_image_cap) break;
            bool close = false;
            for (const auto& t : taken)
                if (t.level == c.level && std::abs(t.x - c.x) <= 1 && std::abs(t.y - c.y) <= 1) {
                    close = true;
                    break;
                }
            if (close) continue;
            taken.push_back(c);
        }
        for (const auto& t : taken) {
            MinedNegative n;
            n.image_index = static_cast<int>(bi);
            n.level = t.level;
            n.root_x = t.x;
            n.root_y = t.y;
            n.score = t.score;
            auto parts = dpm::backtrack(model, infs[t.level], t.x, t.y);
            n.features = pack_features(model, pyr.levels[t.level], parts);
            pool.push_back(std::move(n));
        }
    }

    std::stable_sort(pool.begin(), pool.end(), [](const MinedNegative& a, const MinedNegative& b) {
        if (a.score != b.score) return a.score > b.score;
        if (a.image_index != b.image_index) return a.image_index < b.image_index;
        if (a.level != b.level) return a.level < b.level;
        if (a.root_y != b.root_y) return a.root_y < b.root_y;
        return a.root_x < b.root_x;
    });
    if (static_cast<int>(pool.size()) > k) pool.resize(static_cast<std::size_t>(k));
    return pool;
}

dpm::CharacterTreeModel sgd_hinge_epoch(const dpm::CharacterTreeModel& model,
                                        const std::vector<std::vector<double>>& positives,
                                        const std::vector<std::vector<double>>& negatives,
                                        double lr, double reg_c) {
    std::vector<double> w = pack_weights(model);
    for (const auto& s : positives)
        if (s.size() != w.size())
            raise(ErrorKind::precondition, "positive feature size does not match the model");
    for (const auto& s : negatives)
        if (s.size() != w.size())
            raise(ErrorKind::precondition, "negative feature size does not match the model");

    const std::size_t np = positives.size(), nn = negatives.size();
    std::size_t ip = 0, in = 0;
    const double shrink = 1.0 - lr * reg_c;
    while (ip < np || in < nn) {
        bool take_pos;
        if (ip >= np)
            take_pos = false;
        else if (in >= nn)
            take_pos = true;
        else
            take_pos = ip * nn <= in * np; // ratio-preserving interleave
        const std::vector<double>& psi = take_pos ? positives[ip++] : negatives[in++];
        const double y = take_pos ? 1.0 : -1.0;

        for (double& v : w) v *= shrink;
        if (y * dot(w, psi) < 1.0) {
            const double step = lr * y;
            for (std::size_t i = 0; i < w.size(); ++i) w[i] += step * psi[i];
        }
    }

    dpm::CharacterTreeModel out = model;
    unpack_weights(w, out);
    for (auto& e : out.edges) {
        e.deform.a = std::min(e.deform.a, -dpm::CONCAVITY_EPS);
        e.deform.b = std::min(e.deform.b, -dpm::CONCAVITY_EPS);
    }
    return out;
}

double hinge_objective(const dpm::CharacterTreeModel& model,
                       const std::vector<std::vector<double>>& positives,
                       const std::vector<std::vector<double>>& negatives,
                       double reg_c) {
    std::vector<double> w = pack_weights(model);
    double obj = 0.5 * reg_c * dot(w, w);
    const std::size_t n = positives.size() + negatives.size();
    if (n == 0) return obj;
    double hinge = 0.0;
    for (const auto& s : positives) hinge += std::max(0.0, 1.0 - dot(w, s));
    for (const auto& s : negatives) hinge += std::max(0.0, 1.0 + dot(w, s));
    return obj + hinge / static_cast<double>(n);
}

dpm::CharacterTreeModel full_batch_hinge_step(const dpm::CharacterTreeModel& model,
                                              const std::vector<std::vector<double>>& positives,
                                              const std::vector<std::vector<double>>& negatives,
                                              double lr, double reg_c) {
    std::vector<double> w = pack_weights(model);
    std::vector<double> g(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) g[i] = reg_c * w[i];
    const double n = static_cast<double>(positives.size() + negatives.size());
    if (n > 0) {
        for (const auto& s : positives)
            if (dot(w, s) < 1.0)
                for (std::size_t i = 0; i < w.size(); ++i) g[i] -= s[i] / n;
        for (const auto& s : negatives)
            if (-dot(w, s) < 1.0)
                for (std::size_t i = 0; i < w.size(); ++i) g[i] += s[i] / n;
    }
    for (std::size_t i = 0; i < w.size(); ++i) w[i] -= lr * g[i];

    dpm::CharacterTreeModel out = model;
    unpack_weights(w, out);
    for (auto& e : out.edges) {
        e.deform.a = std::min(e.deform.a, -dpm::CONCAVITY_EPS);
        e.deform.b = std::min(e.deform.b, -dpm::CONCAVITY_EPS);
    }
    return out;
}

namespace {

struct ClassOutcome {
    dpm::CharacterTreeModel model;
    std::string log;
};

ClassOutcome train_one_class(char label, const std::vector<TrainingSample>& positives_all,
                             const ImageTable& images, const TrainingConfig& cfg,
                             std::uint64_t class_seed) {
    Rng rng(class_seed);
    std::ostringstream log;

    // deterministic subsample, then image order for load locality
    std::vector<std::size_t> idx(positives_all.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    rng.shuffle(idx);
    if (static_cast<int>(idx.size()) > cfg.max_positives_per_class)
        idx.resize(static_cast<std::size_t>(cfg.max_positives_per_class));
    std::vector<TrainingSample> positives;
    for (std::size_t i : idx) positives.push_back(positives_all[i]);
    std::stable_sort(positives.begin(), positives.end(),
                     [](const TrainingSample& a, const TrainingSample& b) {
                         return a.image_id < b.image_id;
                     });

    dpm::CharacterTreeModel model = dpm::make_default_tree(label);
    // dimension copies: model is reassigned every epoch, so no references
    // into its parts may outlive an iteration
    const int root_cx = model.parts[0].cells_x;
    const int root_cy = model.parts[0].cells_y;
    const int root_dim = model.parts[0].dim;
    const int root_len = root_cx * root_cy * root_dim;

    // initialization: mean window features at the annotation-centered
    // placement of each sample's best-matching level, plus box statistics
    std::vector<double> mean_root(static_cast<std::size_t>(root_len), 0.0);
    double frac_x_sum = 0.0, frac_y_sum = 0.0;
    int n_init = 0;
    for (std::size_t si = 0; si < positives.size();) {
        const int id = positives[si].image_id;
        double fx, fy;
        ImageBuffer canon = load_canonical(images.path_of[id], cfg.hog, fx, fy);
        HogPyramid pyr = build_pyramid(canon, cfg.hog.pyramid_levels, cfg.hog.scale_step,
                                       cfg.hog, root_cx, root_cy);
        for (; si < positives.size() && positives[si].image_id == id; ++si) {
            CanonicalBox cbox = to_canonical(positives[si].box, fx, fy);
            if (!(cbox.w > 0.0) || !(cbox.h > 0.0)) continue;
            for (int lvl : levels_by_size_match(pyr, model, cbox.h, cfg.hog)) {
                const HogCellGrid& grid = pyr.levels[lvl];
                if (!model_fits(model, grid)) continue;
                double s = pyr.scale_of_level[lvl];
                int x = std::clamp(static_cast<int>(std::lround(
                                       cbox.center_x() * s / cfg.hog.cell_size -
                                       root_cx / 2.0)),
                                   0, grid.cells_x - root_cx);
                int y = std::clamp(static_cast<int>(std::lround(
                                       cbox.center_y() * s / cfg.hog.cell_size -
                                       root_cy / 2.0)),
                                   0, grid.cells_y - root_cy);
                int k = 0;
                for (int fyc = 0; fyc < root_cy; ++fyc) {
                    const double* row = grid.cell(x, y + fyc);
                    for (int i = 0; i < root_cx * root_dim; ++i) mean_root[k++] += row[i];
                }
                frac_x_sum += cbox.w * s / (root_cx * cfg.hog.cell_size);
                frac_y_sum += cbox.h * s / (root_cy * cfg.hog.cell_size);
                ++n_init;
                break;
            }
        }
    }
    if (n_init == 0)
        raise(ErrorKind::missing_class,
              std::string("class '") + label + "' has no usable positive samples");
    for (double& v : mean_root) v /= n_init;
    model.parts[0].weights = mean_root;
    // children start as the root's upper and lower halves
    for (std::size_t e = 0; e < model.edges.size(); ++e) {
        const auto& edge = model.edges[e];
        auto& child = model.parts[edge.child];
        for (int fy = 0; fy < child.cells_y; ++fy) {
            const double* src = &mean_root[static_cast<std::size_t>(
                (edge.anchor_dy + fy) * root_cx + edge.anchor_dx) * root_dim];
            std::copy(src, src + static_cast<std::size_t>(child.cells_x) * child.dim,
                      child.cell(0, fy));
        }
    }
    model.box_frac_x = std::clamp(frac_x_sum / n_init, 0.05, 2.0);
    model.box_frac_y = std::clamp(frac_y_sum / n_init, 0.05, 2.0);
    log << "class " << label << " init: positives=" << n_init
        << " box_frac=" << model.box_frac_x << "x" << model.box_frac_y << "\n";

    if (cfg.epochs == 0 || cfg.latent_rounds == 0) return {std::move(model), log.str()};

    // background pool: images with no instance of this class
    std::vector<int> background_ids;
    for (std::size_t id = 0; id < images.path_of.size(); ++id)
        if (!images.path_of[id].empty() && !images.labels_of[id].count(label))
            background_ids.push_back(static_cast<int>(id));

    std::vector<MinedNegative> cache;
    std::set<std::tuple<int, int, int, int>> cache_keys; // (image id, level, y, x)

    for (int round = 0; round < cfg.latent_rounds; ++round) {
        // latent completion for every positive under the current model
        std::vector<std::vector<double>> pos_feats;
        for (std::size_t si = 0; si < positives.size();) {
            const int id = positives[si].image_id;
            double fx, fy;
            ImageBuffer canon = load_canonical(images.path_of[id], cfg.hog, fx, fy);
            HogPyramid pyr = build_pyramid(canon, cfg.hog.pyramid_levels, cfg.hog.scale_step,
                                           cfg.hog, root_cx, root_cy);
            for (; si < positives.size() && positives[si].image_id == id; ++si) {
                CanonicalBox cbox = to_canonical(positives[si].box, fx, fy);
                if (!(cbox.w > 0.0) || !(cbox.h > 0.0)) continue;
                auto latent = latent_positive_relabel(model, pyr, cbox, cfg.hog);
                if (!latent) continue;
                pos_feats.push_back(
                    pack_features(model, pyr.levels[latent->level], latent->parts));
            }
        }
        if (pos_feats.empty())
            raise(ErrorKind::missing_class,
                  std::string("class '") + label + "' lost all positives during relabeling");

        // mine fresh negatives against the current model and fold them in
        std::vector<int> bg_ids = background_ids;
        rng.shuffle(bg_ids);
        if (static_cast<int>(bg_ids.size()) > cfg.backgrounds_per_round)
            bg_ids.resize(static_cast<std::size_t>(cfg.backgrounds_per_round));
        int mined_count = 0;
        if (!bg_ids.empty()) {
            std::vector<ImageBuffer> bgs;
            bgs.reserve(bg_ids.size());
            for (int id : bg_ids) bgs.push_back(load_image(images.path_of[id]));
            auto mined = mine_hard_negatives(model, bgs, static_cast<int>(pos_feats.size()),
                                             cfg.hog);
            for (auto& m : mined) {
                auto key = std::make_tuple(bg_ids[m.image_index], m.level, m.root_y, m.root_x);
                if (cache_keys.count(key)) continue;
                cache_keys.insert(key);
                m.image_index = std::get<0>(key);
                cache.push_back(std::move(m));
                ++mined_count;
            }
        }
        // rescore under current weights, keep the hardest
        std::vector<double> w = pack_weights(model);
        for (auto& m : cache) m.score = dot(w, m.features);
        std::stable_sort(cache.begin(), cache.end(),
                         [](const MinedNegative& a, const MinedNegative& b) {
                             if (a.score != b.score) return a.score > b.score;
                             if (a.image_index != b.image_index)
                                 return a.image_index < b.image_index;
                             if (a.level != b.level) return a.level < b.level;
                             if (a.root_y != b.root_y) return a.root_y < b.root_y;
                             return a.root_x < b.root_x;
                         });
        const std::size_t cap =
            static_cast<std::size_t>(cfg.negatives_per_positive) * pos_feats.size();
        if (cache.size() > cap) {
            for (std::size_t i = cap; i < cache.size(); ++i)
                cache_keys.erase(std::make_tuple(cache[i].image_index, cache[i].level,
                                                 cache[i].root_y, cache[i].root_x));
            cache.resize(cap);
        }
        std::vector<std::vector<double>> neg_feats;
        neg_feats.reserve(cache.size());
        for (const auto& m : cache) neg_feats.push_back(m.features);

        for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
            const int global_epoch = round * cfg.epochs + epoch;
            const double lr = lr_schedule(cfg, global_epoch);
            rng.shuffle(pos_feats);
            rng.shuffle(neg_feats);
            model = sgd_hinge_epoch(model, pos_feats, neg_feats, lr, cfg.reg_c);
            const double obj = hinge_objective(model, pos_feats, neg_feats, cfg.reg_c);
            if (!std::isfinite(obj))
                raise(ErrorKind::divergence,
                      std::string("objective went non-finite for class '") + label + "'");
            log << "class " << label << " round " << round << " epoch " << global_epoch
                << " lr " << lr << " obj " << obj << " pos " << pos_feats.size() << " neg "
                << neg_feats.size() << " mined " << (epoch == 0 ? mined_count : 0) << "\n";
        }
    }
    return {std::move(model), log.str()};
}

} // namespace

dpm::CharacterModelSet train_character_models(const std::vector<TrainingSample>& samples,
                                              const TrainingConfig& cfg,
                                              std::ostream* log) {
    validate_config(cfg);
    ImageTable images = build_image_table(samples);

    std::map<char, std::vector<TrainingSample>> by_class;
    for (const auto& s : samples)
        if (s.positive) by_class[s.label].push_back(s);
    for (char c : cfg.alphabet)
        if (!by_class.count(c))
            raise(ErrorKind::missing_class,
                  std::string("no positive samples for class '") + c + "'");

    std::vector<ClassOutcome> outcomes(cfg.alphabet.size());
    parallel_for(cfg.alphabet.size(), cfg.threads, [&](std::size_t ci) {
        const char label = cfg.alphabet[ci];
        outcomes[ci] = train_one_class(label, by_class.at(label), images, cfg,
                                       Rng::derive(cfg.rng_seed, ci));
    });

    dpm::CharacterModelSet set;
    set.alphabet = cfg.alphabet;
    set.hog = cfg.hog;
    set.classes.resize(cfg.alphabet.size());
    for (std::size_t ci = 0; ci < cfg.alphabet.size(); ++ci) {
        set.classes[ci].label = cfg.alphabet[ci];
        set.classes[ci].mixtures.push_back(std::move(outcomes[ci].model));
        if (log) *log << outcomes[ci].log;
    }
    dpm::validate_model_set(set);
    return set;
}

} // namespace lpr::train
