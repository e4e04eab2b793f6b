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

#ifndef LPR_DPM_MODEL_IO_HPP
#define LPR_DPM_MODEL_IO_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "lpr/dpm/model.hpp"

namespace lpr::dpm {

// Single-file model container. Layout is fixed little-endian:
//   magic "PDPM", u32 version,
//   feature config (i32 cell_size, f64 clamp, i32 levels, f64 scale_step,
//                   i32 canonical_height),
//   u32 alphabet length + bytes,
//   u32 class count, then per class:
//     u8 label, u32 mixture count, then per mixture:
//       f64 bias, f64 box_frac_x, f64 box_frac_y,
//       u32 part count, per part: i32 cells_x, i32 cells_y, i32 dim,
//         f64 weights (cell-major),
//       u32 edge count, per edge: i32 parent, i32 child,
//         i32 anchor_dx, i32 anchor_dy, f64 a, f64 b, f64 c, f64 d.
inline constexpr std::uint32_t MODEL_FORMAT_VERSION = 1;

std::vector<std::uint8_t> serialize_model(const CharacterModelSet& set);
CharacterModelSet deserialize_model(const std::vector<std::uint8_t>& bytes);

void save_model(const CharacterModelSet& set, const std::string& path);
CharacterModelSet load_model(const std::string& path);

// Human-readable export of the same content (weights included) for
// inspection and diffing.
std::string model_to_json(const CharacterModelSet& set);

} // namespace lpr::dpm

#endif // LPR_DPM_MODEL_IO_HPP
