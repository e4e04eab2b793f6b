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

#ifndef LPR_SYNTH_SYNTH_HPP
#define LPR_SYNTH_SYNTH_HPP

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "lpr/geometry.hpp"
#include "lpr/image.hpp"
#include "lpr/rng.hpp"
#include "lpr/synth/font.hpp"

namespace lpr::synth {

// Letters that occur on plates; Q, W and X never do.
inline const std::string PLATE_LETTERS = "ABCDEFGHIJKLMNOPRSTUVYZ";
inline const std::string PLATE_DIGITS = "0123456789";

enum class GroupKind { digits, letters };

struct FormatGroup {
    GroupKind kind = GroupKind::digits;
    int min_len = 1;
    int max_len = 1;
};

// Plate grammar: ordered character groups with length ranges. The stock
// format is two digits, one to three letters, then two to four digits,
// with a total length of seven or eight.
struct PlateFormat {
    std::vector<FormatGroup> groups;
    int total_min = 7;
    int total_max = 8;
};

PlateFormat default_plate_format();

// Raises a parameter error unless: at least two groups, the first group is
// exactly two digits, the last group is digits with lengths inside [2,4],
// every range is sane, and some combination of lengths meets the total.
void validate_plate_format(const PlateFormat& fmt);

// True iff `text` can be produced by the format (group lengths and
// character classes all satisfied).
bool matches_plate_format(const PlateFormat& fmt, const std::string& text);

// Draws group lengths uniformly over all combinations meeting the total
// bound, then draws characters uniformly from each group's alphabet.
std::string generate_plate_string(const PlateFormat& fmt, Rng& rng);

enum class Spectrum { rgb, nir };

// Rendering knobs. NIR plates are grayscale sensor images: rendered as one
// channel and cloned to three, so all channels are identical.
struct RenderStyle {
    Spectrum spectrum = Spectrum::nir;
    std::string font_id = "plate_font";
    int char_height = 48; // >= 16
    // horizontal condensation factor; plate typefaces are much narrower
    // than text faces, so glyphs are squeezed toward a ~1:2 aspect
    double width_scale = 0.52;
    int gap = 6;
    int margin_x = 12;
    int margin_y = 8;
    double background = 0.85;
    double foreground = 0.08;
    // per-plate uniform jitter applied to background/foreground
    double intensity_jitter = 0.06;
    // RGB only: per-channel gain jitter so channels differ
    double tint_jitter = 0.08;
    // layout jitter in pixels
    int gap_jitter = 2;
    int baseline_jitter = 1;
};

struct LabeledBox {
    char label = '?';
    BoundingBox box;
};

struct RenderedPlate {
    ImageBuffer image; // 3 channels
    std::vector<LabeledBox> chars;
};

// Rasterizes `text` onto a plate background with tight per-glyph boxes in
// left-to-right order. Raises a font error for characters missing from the
// glyph set and a precondition error when the style is out of range.
RenderedPlate render_plate(const std::string& text, const RenderStyle& style,
                           const GlyphSet& glyphs, Rng& rng);

// Degradation parameters. All zero means apply_augment is the identity.
struct AugmentParams {
    double blur_sigma = 0.0;       // [0, 1.5]
    double noise_sigma = 0.0;      // [0, 0.05]
    double brightness = 0.0;       // [-0.2, 0.2], additive
    double contrast = 0.0;         // [-0.2, 0.2], gain about mid-gray
    double rotation_deg = 0.0;     // [-3, 3]
    // corner displacements as fractions of image width, |v| <= 0.02,
    // order: top-left, top-right, bottom-right, bottom-left
    std::array<double, 4> corner_dx{0, 0, 0, 0};
    std::array<double, 4> corner_dy{0, 0, 0, 0};
};

AugmentParams sample_augment(Rng& rng);

// Applies geometry (rotation then corner warp), blur, intensity jitter and
// noise, clamping to [0,1]. Noise is drawn once per pixel and shared by all
// channels, so channel-identical images stay channel-identical. `seed`
// feeds the noise field only; geometry and intensity are in `params`.
ImageBuffer apply_augment(const ImageBuffer& img, const AugmentParams& params,
                          std::uint64_t noise_seed);

// Maps a box through the same geometric warp apply_augment uses: corners
// are transformed and the result is their integer bounding box clamped to
// the image.
BoundingBox warp_box(const BoundingBox& box, const AugmentParams& params,
                     int img_w, int img_h);

// Convenience form drawing parameters and noise from one generator.
ImageBuffer augment(const ImageBuffer& img, Rng& rng);

// One manifest entry.
struct SynthRecord {
    int index = 0;
    std::string split;      // "train" or "val"
    std::string image_path; // relative to the dataset directory
    std::string plate;
    BoundingBox plate_box;
    std::vector<LabeledBox> chars;
    Spectrum spectrum = Spectrum::nir;
    std::uint64_t seed = 0;
    bool augmented = false;
};

struct DatasetConfig {
    int count = 0;
    double train_fraction = 0.8;
    double val_fraction = 0.2;
    double nir_mix = 0.5; // fraction of records rendered as NIR
    std::uint64_t seed = 1;
    PlateFormat format = default_plate_format();
    RenderStyle style;
    bool augment_train = true;
};

// Writes images/NNNNNN.png plus manifest.jsonl under out_dir and returns
// the records. Every record derives its own generator from (seed, index),
// so output is identical for any thread count. Train records are augmented
// when configured; val records are always clean.
std::vector<SynthRecord> generate_dataset(const DatasetConfig& cfg,
                                          const GlyphSet& glyphs,
                                          const std::string& out_dir,
                                          int threads = 1);

// Reads a manifest written by generate_dataset. Raises format errors on
// schema mismatches.
std::vector<SynthRecord> load_manifest(const std::string& path);

void write_manifest(const DatasetConfig& cfg, const std::vector<SynthRecord>& records,
                    const std::string& path);

} // namespace lpr::synth

#endif // LPR_SYNTH_SYNTH_HPP
