// Copyright 2026 The dxr Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "dxr/image.hpp"

namespace dxr {

/// Decodes binary (P5) or ASCII (P2) PGM with maxval <= 255.
///
/// Errors are FormatError with kind kMalformedHeader, kUnsupported
/// (maxval > 255, other magic numbers) or kTruncated.
/// Pixel values are taken verbatim; no rescaling to 255 is done for smaller
/// maxvals, so values above maxval are rejected as malformed.
Image read_pgm(std::span<const std::uint8_t> bytes);

/// Encodes as P5: "P5\n<w> <h>\n255\n" followed by the raw pixels.
std::vector<std::uint8_t> write_pgm(const Image& img);

Image load_pgm(const std::filesystem::path& path);
void save_pgm(const Image& img, const std::filesystem::path& path);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace dxr
