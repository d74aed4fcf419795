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


// Reference kernels: direct per-pixel formulations, no parallelism and no
// incremental tricks.

#include <algorithm>
#include <cmath>

#include "dxr/enhance.hpp"
#include "dxr/error.hpp"

namespace dxr::serial {

SignedMap laplacian(const Image& img) {
  static constexpr int kKernel[3][3] = {{0, 1, 0}, {1, -4, 1}, {0, 1, 0}};
  SignedMap out{img.width(), img.height(), std::vector<std::int32_t>(img.size())};
  for (std::size_t r = 0; r < img.height(); ++r) {
    for (std::size_t c = 0; c < img.width(); ++c) {
      std::int32_t acc = 0;
      for (int dr = -1; dr <= 1; ++dr)
        for (int dc = -1; dc <= 1; ++dc)
          acc += kKernel[dr + 1][dc + 1] * img.clamped(static_cast<std::ptrdiff_t>(r) + dr,
                                                       static_cast<std::ptrdiff_t>(c) + dc);
      out.values[r * img.width() + c] = acc;
    }
  }
  return out;
}

Image sharpen(const Image& img) {
  const SignedMap lap = serial::laplacian(img);
  Image out(img.width(), img.height());
  for (std::size_t r = 0; r < img.height(); ++r)
    for (std::size_t c = 0; c < img.width(); ++c)
      out.at(r, c) = static_cast<std::uint8_t>(std::clamp(img.at(r, c) - lap.at(r, c), 0, 255));
  return out;
}

Image median_filter(const Image& img, std::size_t radius) {
  if (radius == 0) throw InvalidArgument("median_filter: radius must be >= 1");
  const auto rad = static_cast<std::ptrdiff_t>(radius);
  Image out(img.width(), img.height());
  std::vector<std::uint8_t> window;
  for (std::size_t r = 0; r < img.height(); ++r) {
    for (std::size_t c = 0; c < img.width(); ++c) {
      window.clear();
      for (std::ptrdiff_t dr = -rad; dr <= rad; ++dr)
        for (std::ptrdiff_t dc = -rad; dc <= rad; ++dc)
          window.push_back(img.clamped(static_cast<std::ptrdiff_t>(r) + dr, static_cast<std::ptrdiff_t>(c) + dc));
      std::sort(window.begin(), window.end());
      out.at(r, c) = window[window.size() / 2];
    }
  }
  return out;
}

Image hist_equalize(const Image& img) {
  const Lut lut = equalization_lut(histogram(img));
  Image out(img.width(), img.height());
  for (std::size_t i = 0; i < img.size(); ++i) out.pixels()[i] = lut[img.pixels()[i]];
  return out;
}

Image clahe(const Image& img, const ClaheParams& p) {
  p.validate(img);
  std::vector<Lut> luts;
  std::vector<double> cy(p.tiles_y);
  std::vector<double> cx(p.tiles_x);
  for (std::size_t ty = 0; ty < p.tiles_y; ++ty) {
    const TileSpan rows = tile_span(img.height(), p.tiles_y, ty);
    cy[ty] = 0.5 * static_cast<double>(rows.begin + rows.end - 1);
    for (std::size_t tx = 0; tx < p.tiles_x; ++tx) {
      const TileSpan cols = tile_span(img.width(), p.tiles_x, tx);
      cx[tx] = 0.5 * static_cast<double>(cols.begin + cols.end - 1);
      luts.push_back(clahe_tile_lut(img, rows, cols, p.clip_factor));
    }
  }

  // neighbouring tile indices and the weight of the upper one
  auto locate = [](const std::vector<double>& centers, double pos, std::size_t& lo, std::size_t& hi, double& f) {
    if (pos <= centers.front()) {
      lo = hi = 0;
      f = 0.0;
      return;
    }
    if (pos >= centers.back()) {
      lo = hi = centers.size() - 1;
      f = 0.0;
      return;
    }
    lo = 0;
    while (centers[lo + 1] <= pos) ++lo;
    hi = lo + 1;
    f = (pos - centers[lo]) / (centers[hi] - centers[lo]);
  };

  Image out(img.width(), img.height());
  for (std::size_t r = 0; r < img.height(); ++r) {
    std::size_t y0, y1;
    double fy;
    locate(cy, static_cast<double>(r), y0, y1, fy);
    for (std::size_t c = 0; c < img.width(); ++c) {
      std::size_t x0, x1;
      double fx;
      locate(cx, static_cast<double>(c), x0, x1, fx);
      const std::uint8_t v = img.at(r, c);
      const double top = (1.0 - fx) * luts[y0 * p.tiles_x + x0][v] + fx * luts[y0 * p.tiles_x + x1][v];
      const double bottom = (1.0 - fx) * luts[y1 * p.tiles_x + x0][v] + fx * luts[y1 * p.tiles_x + x1][v];
      const double value = (1.0 - fy) * top + fy * bottom;
      out.at(r, c) = static_cast<std::uint8_t>(std::clamp(std::floor(value + 0.5), 0.0, 255.0));
    }
  }
  return out;
}

}  // namespace dxr::serial
