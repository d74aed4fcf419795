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

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dxr/image.hpp"

namespace dxr {

/// 64-bit perceptual hash. Bit i (value `(bits >> i) & 1`) belongs to the
/// i-th coefficient of the 8x8 low-frequency DCT block in row-major order.
struct PHash {
  std::uint64_t bits = 0;

  bool bit(int i) const noexcept { return (bits >> i) & 1U; }
  /// 16 lowercase hex digits, most significant nibble first.
  std::string hex() const;
  static PHash from_hex(const std::string& text);

  friend bool operator==(PHash, PHash) = default;
};

inline constexpr std::size_t kHashSide = 32;
inline constexpr std::size_t kHashBlock = 8;

/// Box-filter (area-average) resize to side x side. Each output pixel is the
/// coverage-weighted mean of the source pixels its footprint overlaps.
std::vector<double> resize_area(const Image& img, std::size_t side);

/// Orthonormal 2-D DCT-II of the 32x32 area-resized image, restricted to the
/// top-left 8x8 block, row-major (vertical frequency major).
std::array<double, 64> low_frequency_dct(const Image& img);

/// Bit i is set iff coefficient i exceeds the mean of the 63 AC coefficients.
/// The DC bit is always clear. Comparisons carry a tolerance of
/// 1e-9 * (1 + |DC|) so that numerically-zero AC terms of flat images do not
/// flip bits.
PHash phash(const Image& img);

/// Hashes every image, in parallel. Identical to calling phash() per image.
std::vector<PHash> phash_all(std::span<const Image> images);

int hamming(PHash a, PHash b) noexcept;

/// 0.0 / 1.0 coordinates, bit i -> coordinate i.
std::vector<double> hash_to_vector(PHash h);

}  // namespace dxr
