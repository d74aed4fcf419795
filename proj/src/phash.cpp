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


#include "dxr/phash.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "dxr/error.hpp"

namespace dxr {

std::string PHash::hex() const {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(bits));
  return buf;
}

PHash PHash::from_hex(const std::string& text) {
  if (text.size() != 16) throw InvalidArgument("phash: expected 16 hex digits");
  std::uint64_t v = 0;
  for (const char ch : text) {
    int d;
    if (ch >= '0' && ch <= '9') d = ch - '0';
    else if (ch >= 'a' && ch <= 'f') d = ch - 'a' + 10;
    else if (ch >= 'A' && ch <= 'F') d = ch - 'A' + 10;
    else throw InvalidArgument("phash: bad hex digit");
    v = (v << 4) | static_cast<std::uint64_t>(d);
  }
  return PHash{v};
}

namespace {

// Source coverage of output cell `i` along an axis: list of (index, weight).
std::vector<std::vector<std::pair<std::size_t, double>>> coverage(std::size_t src, std::size_t dst) {
  std::vector<std::vector<std::pair<std::size_t, double>>> cells(dst);
  const double scale = static_cast<double>(src) / static_cast<double>(dst);
  for (std::size_t i = 0; i < dst; ++i) {
    const double lo = static_cast<double>(i) * scale;
    const double hi = static_cast<double>(i + 1) * scale;
    for (auto s = static_cast<std::size_t>(std::floor(lo)); s < src && static_cast<double>(s) < hi; ++s) {
      const double w = std::min(hi, static_cast<double>(s + 1)) - std::max(lo, static_cast<double>(s));
      if (w > 0.0) cells[i].emplace_back(s, w);
    }
  }
  return cells;
}

}  // namespace

std::vector<double> resize_area(const Image& img, std::size_t side) {
  const auto cx = coverage(img.width(), side);
  const auto cy = coverage(img.height(), side);
  std::vector<double> out(side * side);
  for (std::size_t r = 0; r < side; ++r) {
    for (std::size_t c = 0; c < side; ++c) {
      double acc = 0.0;
      double wsum = 0.0;
      for (const auto& [sy, wy] : cy[r])
        for (const auto& [sx, wx] : cx[c]) {
          acc += wy * wx * img.at(sy, sx);
          wsum += wy * wx;
        }
      out[r * side + c] = acc / wsum;
    }
  }
  return out;
}

std::array<double, 64> low_frequency_dct(const Image& img) {
  constexpr std::size_t n = kHashSide;
  constexpr std::size_t k = kHashBlock;
  const std::vector<double> f = resize_area(img, n);

  // basis[u][x] = a(u) cos(pi (2x+1) u / 2n)
  static const auto basis = [] {
    std::array<std::array<double, n>, k> b{};
    for (std::size_t u = 0; u < k; ++u) {
      const double a = u == 0 ? std::sqrt(1.0 / n) : std::sqrt(2.0 / n);
      for (std::size_t x = 0; x < n; ++x)
        b[u][x] = a * std::cos(std::numbers::pi * static_cast<double>((2 * x + 1) * u) / (2.0 * n));
    }
    return b;
  }();

  // rows first: tmp[y][u] = sum_x f[y][x] basis[u][x]
  std::array<std::array<double, k>, n> tmp{};
  for (std::size_t y = 0; y < n; ++y)
    for (std::size_t u = 0; u < k; ++u) {
      double acc = 0.0;
      for (std::size_t x = 0; x < n; ++x) acc += f[y * n + x] * basis[u][x];
      tmp[y][u] = acc;
    }
  std::array<double, 64> out{};
  for (std::size_t v = 0; v < k; ++v)
    for (std::size_t u = 0; u < k; ++u) {
      double acc = 0.0;
      for (std::size_t y = 0; y < n; ++y) acc += tmp[y][u] * basis[v][y];
      out[v * k + u] = acc;
    }
  return out;
}

PHash phash(const Image& img) {
  const auto coef = low_frequency_dct(img);
  double mean = 0.0;
  for (std::size_t i = 1; i < 64; ++i) mean += coef[i];
  mean /= 63.0;
  const double tol = 1e-9 * (1.0 + std::abs(coef[0]));
  PHash h;
  for (std::size_t i = 1; i < 64; ++i)
    if (coef[i] > mean + tol) h.bits |= std::uint64_t{1} << i;
  return h;
}

std::vector<PHash> phash_all(std::span<const Image> images) {
  std::vector<PHash> out(images.size());
  const auto n = static_cast<std::ptrdiff_t>(images.size());
#pragma omp parallel for schedule(dynamic, 4)
  for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = phash(images[i]);
  return out;
}

int hamming(PHash a, PHash b) noexcept { return std::popcount(a.bits ^ b.bits); }

std::vector<double> hash_to_vector(PHash h) {
  std::vector<double> v(64);
  for (int i = 0; i < 64; ++i) v[i] = h.bit(i) ? 1.0 : 0.0;
  return v;
}

}  // namespace dxr
