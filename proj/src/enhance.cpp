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


#include "dxr/enhance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "dxr/error.hpp"

namespace dxr {

void ClaheParams::validate(const Image& img) const {
  if (tiles_x == 0 || tiles_y == 0) throw InvalidArgument("clahe: tile counts must be >= 1");
  if (!(clip_factor >= 1.0)) throw InvalidArgument("clahe: clip_factor must be >= 1");
  if (tiles_x > img.width() || tiles_y > img.height()) {
    throw InvalidArgument("clahe: tile grid " + std::to_string(tiles_x) + "x" + std::to_string(tiles_y) +
                          " exceeds image " + std::to_string(img.width()) + "x" +
                          std::to_string(img.height()));
  }
}

SignedMap laplacian(const Image& img) {
  const auto w = static_cast<std::ptrdiff_t>(img.width());
  const auto h = static_cast<std::ptrdiff_t>(img.height());
  SignedMap out{img.width(), img.height(), std::vector<std::int32_t>(img.size())};
  const std::uint8_t* px = img.pixels().data();

#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t r = 0; r < h; ++r) {
    const std::uint8_t* up = px + std::max<std::ptrdiff_t>(r - 1, 0) * w;
    const std::uint8_t* mid = px + r * w;
    const std::uint8_t* down = px + std::min<std::ptrdiff_t>(r + 1, h - 1) * w;
    std::int32_t* dst = out.values.data() + r * w;
    for (std::ptrdiff_t c = 0; c < w; ++c) {
      const std::ptrdiff_t cl = c > 0 ? c - 1 : 0;
      const std::ptrdiff_t cr = c + 1 < w ? c + 1 : w - 1;
      dst[c] = std::int32_t{up[c]} + down[c] + mid[cl] + mid[cr] - 4 * std::int32_t{mid[c]};
    }
  }
  return out;
}

Image sharpen(const Image& img) {
  const SignedMap lap = laplacian(img);
  Image out(img.width(), img.height());
  const auto src = img.pixels();
  auto dst = out.pixels();
  const auto n = static_cast<std::ptrdiff_t>(img.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i)
    dst[i] = static_cast<std::uint8_t>(std::clamp(std::int32_t{src[i]} - lap.values[i], 0, 255));
  return out;
}

Image median_filter(const Image& img, std::size_t radius) {
  if (radius == 0) throw InvalidArgument("median_filter: radius must be >= 1");
  const auto w = static_cast<std::ptrdiff_t>(img.width());
  const auto h = static_cast<std::ptrdiff_t>(img.height());
  const auto rad = static_cast<std::ptrdiff_t>(radius);
  const std::uint32_t rank = static_cast<std::uint32_t>((2 * radius + 1) * (2 * radius + 1) / 2 + 1);
  Image out(img.width(), img.height());

  // Sliding-histogram median, one row per iteration.
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t r = 0; r < h; ++r) {
    std::uint32_t hist[256] = {};
    for (std::ptrdiff_t dr = -rad; dr <= rad; ++dr)
      for (std::ptrdiff_t dc = -rad; dc <= rad; ++dc) ++hist[img.clamped(r + dr, dc)];
    for (std::ptrdiff_t c = 0; c < w; ++c) {
      if (c > 0) {
        for (std::ptrdiff_t dr = -rad; dr <= rad; ++dr) {
          --hist[img.clamped(r + dr, c - 1 - rad)];
          ++hist[img.clamped(r + dr, c + rad)];
        }
      }
      std::uint32_t seen = 0;
      int v = 0;
      for (; v < 256; ++v) {
        seen += hist[v];
        if (seen >= rank) break;
      }
      out.at(static_cast<std::size_t>(r), static_cast<std::size_t>(c)) = static_cast<std::uint8_t>(v);
    }
  }
  return out;
}

Histogram histogram(const Image& img) {
  Histogram hist{};
  for (const auto v : img.pixels()) ++hist[v];
  return hist;
}

Lut equalization_lut(const Histogram& hist) {
  std::uint64_t total = 0;
  std::uint64_t cdf_min = 0;
  for (const auto count : hist) {
    if (cdf_min == 0 && count > 0) cdf_min = count;
    total += count;
  }
  Lut lut{};
  if (total == cdf_min) {
    for (int v = 0; v < 256; ++v) lut[v] = static_cast<std::uint8_t>(v);
    return lut;
  }
  const std::uint64_t denom = total - cdf_min;
  std::uint64_t cdf = 0;
  for (int v = 0; v < 256; ++v) {
    cdf += hist[v];
    if (cdf < cdf_min) {
      lut[v] = 0;
      continue;
    }
    // round(255 * num / denom), halves up, in exact integer arithmetic
    const std::uint64_t num = 255 * (cdf - cdf_min);
    lut[v] = static_cast<std::uint8_t>((2 * num + denom) / (2 * denom));
  }
  return lut;
}

Image hist_equalize(const Image& img) {
  const Lut lut = equalization_lut(histogram(img));
  Image out(img.width(), img.height());
  const auto src = img.pixels();
  auto dst = out.pixels();
  const auto n = static_cast<std::ptrdiff_t>(img.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) dst[i] = lut[src[i]];
  return out;
}

std::uint32_t clahe_clip_limit(std::size_t tile_pixels, double clip_factor) {
  const double total = static_cast<double>(tile_pixels) * kClaheCountScale;
  // clip_factor * (pixels / 256) bins' worth, in 1/256 counts
  const double raw = std::floor(clip_factor * static_cast<double>(tile_pixels));
  return static_cast<std::uint32_t>(std::clamp(raw, 1.0, total));
}

std::uint32_t clip_histogram(Histogram& hist, std::uint32_t limit) {
  std::uint32_t excess = 0;
  for (auto& count : hist) {
    if (count > limit) {
      excess += count - limit;
      count = limit;
    }
  }
  const std::uint32_t share = excess / 256;
  const std::uint32_t remainder = excess % 256;
  for (std::uint32_t v = 0; v < 256; ++v) hist[v] += share + (v < remainder ? 1 : 0);
  return excess;
}

TileSpan tile_span(std::size_t extent, std::size_t tiles, std::size_t index) {
  return {index * extent / tiles, (index + 1) * extent / tiles};
}

Lut clahe_tile_lut(const Image& img, TileSpan rows, TileSpan cols, double clip_factor) {
  Histogram hist{};
  for (std::size_t r = rows.begin; r < rows.end; ++r)
    for (std::size_t c = cols.begin; c < cols.end; ++c) ++hist[img.at(r, c)];
  const std::size_t occupied = static_cast<std::size_t>(
      std::count_if(hist.begin(), hist.end(), [](std::uint32_t n) { return n > 0; }));
  if (occupied <= 1) return equalization_lut(hist);
  const std::size_t pixels = (rows.end - rows.begin) * (cols.end - cols.begin);
  for (auto& count : hist) count *= kClaheCountScale;
  clip_histogram(hist, clahe_clip_limit(pixels, clip_factor));
  return equalization_lut(hist);
}

namespace {

struct AxisWeights {
  std::vector<std::size_t> lo;
  std::vector<std::size_t> hi;
  std::vector<double> frac;  // weight of `hi`
};

AxisWeights axis_weights(std::size_t extent, std::size_t tiles) {
  std::vector<double> centers(tiles);
  for (std::size_t t = 0; t < tiles; ++t) {
    const TileSpan s = tile_span(extent, tiles, t);
    centers[t] = 0.5 * static_cast<double>(s.begin + s.end - 1);
  }
  AxisWeights aw{std::vector<std::size_t>(extent), std::vector<std::size_t>(extent), std::vector<double>(extent)};
  std::size_t t = 0;
  for (std::size_t x = 0; x < extent; ++x) {
    const double pos = static_cast<double>(x);
    while (t + 1 < tiles && centers[t + 1] <= pos) ++t;
    if (pos <= centers[0]) {
      aw.lo[x] = aw.hi[x] = 0;
      aw.frac[x] = 0.0;
    } else if (t + 1 >= tiles) {
      aw.lo[x] = aw.hi[x] = tiles - 1;
      aw.frac[x] = 0.0;
    } else {
      aw.lo[x] = t;
      aw.hi[x] = t + 1;
      aw.frac[x] = (pos - centers[t]) / (centers[t + 1] - centers[t]);
    }
  }
  return aw;
}

}  // namespace

Image clahe(const Image& img, const ClaheParams& p) {
  p.validate(img);
  const std::size_t ntiles = p.tiles_x * p.tiles_y;
  std::vector<Lut> luts(ntiles);

  const auto nt = static_cast<std::ptrdiff_t>(ntiles);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t t = 0; t < nt; ++t) {
    const std::size_t ty = static_cast<std::size_t>(t) / p.tiles_x;
    const std::size_t tx = static_cast<std::size_t>(t) % p.tiles_x;
    luts[t] = clahe_tile_lut(img, tile_span(img.height(), p.tiles_y, ty), tile_span(img.width(), p.tiles_x, tx),
                             p.clip_factor);
  }

  const AxisWeights wx = axis_weights(img.width(), p.tiles_x);
  const AxisWeights wy = axis_weights(img.height(), p.tiles_y);
  Image out(img.width(), img.height());
  const auto h = static_cast<std::ptrdiff_t>(img.height());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t rr = 0; rr < h; ++rr) {
    const auto r = static_cast<std::size_t>(rr);
    const double fy = wy.frac[r];
    for (std::size_t c = 0; c < img.width(); ++c) {
      const std::uint8_t v = img.at(r, c);
      const double fx = wx.frac[c];
      const double m00 = luts[wy.lo[r] * p.tiles_x + wx.lo[c]][v];
      const double m01 = luts[wy.lo[r] * p.tiles_x + wx.hi[c]][v];
      const double m10 = luts[wy.hi[r] * p.tiles_x + wx.lo[c]][v];
      const double m11 = luts[wy.hi[r] * p.tiles_x + wx.hi[c]][v];
      const double value = (1.0 - fy) * ((1.0 - fx) * m00 + fx * m01) + fy * ((1.0 - fx) * m10 + fx * m11);
      out.at(r, c) = static_cast<std::uint8_t>(std::clamp(std::floor(value + 0.5), 0.0, 255.0));
    }
  }
  return out;
}

Image enhance_chain(const Image& img, const ClaheParams& p, std::size_t median_radius) {
  p.validate(img);
  return clahe(median_filter(sharpen(img), median_radius), p);
}

double psnr(const Image& a, const Image& b) {
  if (a.width() != b.width() || a.height() != b.height()) throw InvalidArgument("psnr: size mismatch");
  double sse = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = static_cast<double>(a.pixels()[i]) - static_cast<double>(b.pixels()[i]);
    sse += d * d;
  }
  if (sse == 0.0) return std::numeric_limits<double>::infinity();
  const double mse = sse / static_cast<double>(a.size());
  return 10.0 * std::log10(255.0 * 255.0 / mse);
}

}  // namespace dxr
