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

#ifndef LPR_DPM_DETECTOR_HPP
#define LPR_DPM_DETECTOR_HPP

#include <vector>

#include "lpr/dpm/inference.hpp"
#include "lpr/dpm/model.hpp"
#include "lpr/image.hpp"

namespace lpr::dpm {

// Smallest plate crop detect_characters accepts, in source pixels.
inline constexpr int MIN_PLATE_WIDTH = 16;
inline constexpr int MIN_PLATE_HEIGHT = 8;

// Keeps the highest-scoring detections whose pairwise IoU stays at or
// below `iou`; input order decides ties. Used per class.
std::vector<Detection> nms(std::vector<Detection> dets, double iou);

// Runs every class of the model set over a plate crop and returns all
// character detections with score strictly above `threshold`, boxes in
// source-image pixels. The crop is resized to the model's canonical
// height before the pyramid is built. Per-class NMS at IoU 0.5 runs
// before merging; the merged list is ordered by score descending, then
// label, then box x, then box y, independent of `threads`.
std::vector<Detection> detect_characters(const CharacterModelSet& set,
                                         const ImageBuffer& plate,
                                         double threshold,
                                         int threads = 1);

} // namespace lpr::dpm

#endif // LPR_DPM_DETECTOR_HPP
