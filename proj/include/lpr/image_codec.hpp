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

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lpr/image.hpp"

namespace lpr {

// Decodes an 8-bit PNG or JPEG stream. Output has 1 or 3 channels with values
// scaled to [0,1]; palette images are expanded and an alpha channel, when
// present, is stripped.
ImageBuffer decode_image(const std::vector<std::uint8_t>& bytes);

ImageBuffer load_image(const std::string& path);

// 8-bit PNG, grayscale for 1-channel input and RGB for 3-channel input.
std::vector<std::uint8_t> encode_png(const ImageBuffer& img);

void save_png(const ImageBuffer& img, const std::string& path);

} // namespace lpr
