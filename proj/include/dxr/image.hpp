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

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace dxr {

/// 8-bit grayscale raster, row-major.
class Image {
 public:
  Image() = default;
  /// Throws InvalidArgument when either extent is zero.
  Image(std::size_t width, std::size_t height, std::uint8_t fill = 0);
  Image(std::size_t width, std::size_t height, std::vector<std::uint8_t> pixels);

  std::size_t width() const noexcept { return width_; }
  std::size_t height() const noexcept { return height_; }
  std::size_t size() const noexcept { return pixels_.size(); }
  bool empty() const noexcept { return pixels_.empty(); }

  std::uint8_t& at(std::size_t row, std::size_t col) noexcept { return pixels_[row * width_ + col]; }
  std::uint8_t at(std::size_t row, std::size_t col) const noexcept {
    return pixels_[row * width_ + col];
  }

  std::span<std::uint8_t> pixels() noexcept { return pixels_; }
  std::span<const std::uint8_t> pixels() const noexcept { return pixels_; }

  /// Edge-replicating accessor for window operations.
  std::uint8_t clamped(std::ptrdiff_t row, std::ptrdiff_t col) const noexcept;

  friend bool operator==(const Image&, const Image&) = default;

 private:
  std::size_t width_ = 0;
  std::size_t height_ = 0;
  std::vector<std::uint8_t> pixels_;
};

/// Clockwise quarter turns, kept canonical in {0, 1, 2, 3}.
class Rotation {
 public:
  constexpr Rotation() = default;
  constexpr explicit Rotation(int quarter_turns) noexcept : turns_(((quarter_turns % 4) + 4) % 4) {}

  constexpr int quarter_turns() const noexcept { return turns_; }
  constexpr Rotation inverse() const noexcept { return Rotation(4 - turns_); }
  constexpr Rotation operator+(Rotation o) const noexcept { return Rotation(turns_ + o.turns_); }

  friend constexpr bool operator==(Rotation, Rotation) = default;

 private:
  int turns_ = 0;
};

/// One clockwise turn sends (row r, col c) of an HxW image to
/// (row c, col H-1-r) of the WxH result; more turns compose the mapping.
Image rotate(const Image& img, Rotation r);

Image flip_horizontal(const Image& img);

}  // namespace dxr
