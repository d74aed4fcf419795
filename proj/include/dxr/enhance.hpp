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
#include <cstddef>
#include <cstdint>
#include <vector>

#include "dxr/image.hpp"

namespace dxr {

/// Tile grid and clip factor for contrast-limited adaptive equalization.
/// The clip factor multiplies the height a uniform 256-bin histogram of the
/// tile would have.
struct ClaheParams {
  std::size_t tiles_x = 8;
  std::size_t tiles_y = 8;
  double clip_factor = 2.0;

  /// Throws InvalidArgument if the grid is empty or larger than the image,
  /// or if clip_factor < 1 (or NaN).
  void validate(const Image& img) const;
};

/// Signed result of the Laplacian; not clamped.
struct SignedMap {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::int32_t> values;

  std::int32_t at(std::size_t row, std::size_t col) const { return values[row * width + col]; }
};

using Histogram = std::array<std::uint32_t, 256>;
using Lut = std::array<std::uint8_t, 256>;

/// 4-neighbour discrete Laplacian [[0,1,0],[1,-4,1],[0,1,0]] with edge
/// replication.
SignedMap laplacian(const Image& img);

/// clamp(s - lap(s), 0, 255).
Image sharpen(const Image& img);

/// Exact median over the (2r+1)^2 window, edge replication. radius >= 1.
Image median_filter(const Image& img, std::size_t radius);

Histogram histogram(const Image& img);

/// v -> round(255 * (cdf(v) - cdf_min) / (N - cdf_min)), half rounds up,
/// values below cdf_min map to 0. A histogram with a single occupied bin
/// yields the identity table.
Lut equalization_lut(const Histogram& hist);

Image hist_equalize(const Image& img);

/// CLAHE tile histograms count each pixel as this many units, so that the
/// fractional clip height clip_factor * pixels / 256 is represented exactly
/// (for clip factors that are multiples of 1/pixels) with integer counts.
inline constexpr std::uint32_t kClaheCountScale = 256;

/// Clip limit of a tile in scaled units: floor(clip_factor * pixels),
/// i.e. clip_factor * (pixels / 256) pixels, kept within [1, 256 * pixels].
std::uint32_t clahe_clip_limit(std::size_t tile_pixels, double clip_factor);

/// Truncates bins above `limit` and hands the excess back uniformly: every
/// bin gets excess / 256, and the remainder goes one count each to bins
/// 0, 1, 2, ... Returns the excess. The total count is preserved.
std::uint32_t clip_histogram(Histogram& hist, std::uint32_t limit);

/// Half-open pixel range [begin, end) of tile `index` out of `tiles` along an
/// axis of length `extent`.
struct TileSpan {
  std::size_t begin;
  std::size_t end;
};
TileSpan tile_span(std::size_t extent, std::size_t tiles, std::size_t index);

/// Per-tile mapping used by clahe(): scaled histogram, clip, then the
/// equalization table. Constant tiles map to the identity.
Lut clahe_tile_lut(const Image& img, TileSpan rows, TileSpan cols, double clip_factor);

/// Per-tile clipped equalization, bilinearly interpolated between the four
/// nearest tile centres (edge tiles replicate).
Image clahe(const Image& img, const ClaheParams& p);

/// sharpen -> median_filter -> clahe.
Image enhance_chain(const Image& img, const ClaheParams& p, std::size_t median_radius);

/// Peak signal-to-noise ratio in dB; +inf for identical images.
double psnr(const Image& a, const Image& b);

/// Straightforward single-threaded versions of the kernels above. They are
/// kept as the reference the parallel kernels are tested (bit-for-bit) and
/// benchmarked against.
namespace serial {

SignedMap laplacian(const Image& img);
Image sharpen(const Image& img);
Image median_filter(const Image& img, std::size_t radius);
Image hist_equalize(const Image& img);
Image clahe(const Image& img, const ClaheParams& p);

}  // namespace serial

}  // namespace dxr
