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


#include "dxr/image.hpp"

#include <algorithm>
#include <utility>

#include "dxr/error.hpp"

namespace dxr {

Image::Image(std::size_t width, std::size_t height, std::uint8_t fill)
    : width_(width), height_(height) {
  if (width == 0 || height == 0) throw InvalidArgument("image extents must be >= 1");
  pixels_.assign(width * height, fill);
}

Image::Image(std::size_t width, std::size_t height, std::vector<std::uint8_t> pixels)
    : width_(width), height_(height), pixels_(std::move(pixels)) {
  if (width == 0 || height == 0) throw InvalidArgument("image extents must be >= 1");
  if (pixels_.size() != width * height) throw InvalidArgument("pixel count does not match width*height");
}

std::uint8_t Image::clamped(std::ptrdiff_t row, std::ptrdiff_t col) const noexcept {
  const auto r = std::clamp<std::ptrdiff_t>(row, 0, static_cast<std::ptrdiff_t>(height_) - 1);
  const auto c = std::clamp<std::ptrdiff_t>(col, 0, static_cast<std::ptrdiff_t>(width_) - 1);
  return pixels_[static_cast<std::size_t>(r) * width_ + static_cast<std::size_t>(c)];
}

namespace {

Image rotate_once(const Image& img) {
  const std::size_t h = img.height();
  const std::size_t w = img.width();
  Image out(h, w);
  for (std::size_t r = 0; r < h; ++r)
    for (std::size_t c = 0; c < w; ++c) out.at(c, h - 1 - r) = img.at(r, c);
  return out;
}

}  // namespace

Image rotate(const Image& img, Rotation r) {
  const std::size_t h = img.height();
  const std::size_t w = img.width();
  switch (r.quarter_turns()) {
    case 0:
      return img;
    case 1:
      return rotate_once(img);
    case 2: {
      Image out(w, h);
      for (std::size_t row = 0; row < h; ++row)
        for (std::size_t c = 0; c < w; ++c) out.at(h - 1 - row, w - 1 - c) = img.at(row, c);
      return out;
    }
    default: {
      // inverse of one clockwise turn: (r, c) -> (W-1-c, r)
      Image out(h, w);
      for (std::size_t row = 0; row < h; ++row)
        for (std::size_t c = 0; c < w; ++c) out.at(w - 1 - c, row) = img.at(row, c);
      return out;
    }
  }
}

Image flip_horizontal(const Image& img) {
  Image out = img;
  for (std::size_t r = 0; r < img.height(); ++r) {
    auto row = out.pixels().subspan(r * img.width(), img.width());
    std::reverse(row.begin(), row.end());
  }
  return out;
}

}  // namespace dxr
