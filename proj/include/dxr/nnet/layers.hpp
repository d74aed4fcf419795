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

// Single-sample layer kernels. Backward kernels accumulate (+=) into weight
// and bias gradients and overwrite input gradients.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <span>

namespace dxr::nn {

/// Stride-1 convolution (cross-correlation) with zero "same" padding.
/// Weights are laid out [out][in][k][k]; k must be odd.
struct ConvShape {
  std::size_t in_channels;
  std::size_t out_channels;
  std::size_t kernel;
  std::size_t height;
  std::size_t width;

  std::size_t in_size() const { return in_channels * height * width; }
  std::size_t out_size() const { return out_channels * height * width; }
  std::size_t weight_size() const { return out_channels * in_channels * kernel * kernel; }
};

namespace detail {

// Output columns [lo, hi) for which input column x + d stays inside [0, w).
inline void valid_range(std::ptrdiff_t d, std::ptrdiff_t w, std::ptrdiff_t& lo, std::ptrdiff_t& hi) {
  lo = std::max<std::ptrdiff_t>(0, -d);
  hi = std::min<std::ptrdiff_t>(w, w - d);
}

}  // namespace detail

template <class T>
void conv2d_forward(const ConvShape& s, std::span<const T> in, std::span<const T> weight, std::span<const T> bias,
                    std::span<T> out) {
  const auto h = static_cast<std::ptrdiff_t>(s.height);
  const auto w = static_cast<std::ptrdiff_t>(s.width);
  const auto k = static_cast<std::ptrdiff_t>(s.kernel);
  const std::ptrdiff_t pad = k / 2;
  const std::size_t plane = s.height * s.width;
  for (std::size_t oc = 0; oc < s.out_channels; ++oc) {
    T* dst = out.data() + oc * plane;
    std::fill(dst, dst + plane, bias[oc]);
    for (std::size_t ic = 0; ic < s.in_channels; ++ic) {
      const T* src = in.data() + ic * plane;
      const T* wk = weight.data() + (oc * s.in_channels + ic) * s.kernel * s.kernel;
      for (std::ptrdiff_t ky = 0; ky < k; ++ky) {
        std::ptrdiff_t y0, y1;
        detail::valid_range(ky - pad, h, y0, y1);
        for (std::ptrdiff_t kx = 0; kx < k; ++kx) {
          const T wv = wk[ky * k + kx];
          std::ptrdiff_t x0, x1;
          detail::valid_range(kx - pad, w, x0, x1);
          for (std::ptrdiff_t y = y0; y < y1; ++y) {
            T* drow = dst + y * w;
            const T* srow = src + (y + ky - pad) * w + (kx - pad);
            for (std::ptrdiff_t x = x0; x < x1; ++x) drow[x] += wv * srow[x];
          }
        }
      }
    }
  }
}

/// `din` may be empty when the input gradient is not needed.
template <class T>
void conv2d_backward(const ConvShape& s, std::span<const T> in, std::span<const T> weight, std::span<const T> dout,
                     std::span<T> din, std::span<T> dweight, std::span<T> dbias) {
  const auto h = static_cast<std::ptrdiff_t>(s.height);
  const auto w = static_cast<std::ptrdiff_t>(s.width);
  const auto k = static_cast<std::ptrdiff_t>(s.kernel);
  const std::ptrdiff_t pad = k / 2;
  const std::size_t plane = s.height * s.width;
  if (!din.empty()) std::fill(din.begin(), din.end(), T{});
  for (std::size_t oc = 0; oc < s.out_channels; ++oc) {
    const T* g = dout.data() + oc * plane;
    T bsum{};
    for (std::size_t i = 0; i < plane; ++i) bsum += g[i];
    dbias[oc] += bsum;
    for (std::size_t ic = 0; ic < s.in_channels; ++ic) {
      const T* src = in.data() + ic * plane;
      const std::size_t wbase = (oc * s.in_channels + ic) * s.kernel * s.kernel;
      T* dsrc = din.empty() ? nullptr : din.data() + ic * plane;
      for (std::ptrdiff_t ky = 0; ky < k; ++ky) {
        std::ptrdiff_t y0, y1;
        detail::valid_range(ky - pad, h, y0, y1);
        for (std::ptrdiff_t kx = 0; kx < k; ++kx) {
          std::ptrdiff_t x0, x1;
          detail::valid_range(kx - pad, w, x0, x1);
          const std::ptrdiff_t shift = (ky - pad) * w + (kx - pad);
          T acc{};
          for (std::ptrdiff_t y = y0; y < y1; ++y) {
            const T* grow = g + y * w;
            const T* srow = src + y * w + shift;
            for (std::ptrdiff_t x = x0; x < x1; ++x) acc += grow[x] * srow[x];
          }
          dweight[wbase + static_cast<std::size_t>(ky * k + kx)] += acc;
          if (dsrc) {
            const T wv = weight[wbase + static_cast<std::size_t>(ky * k + kx)];
            for (std::ptrdiff_t y = y0; y < y1; ++y) {
              const T* grow = g + y * w;
              T* drow = dsrc + y * w + shift;
              for (std::ptrdiff_t x = x0; x < x1; ++x) drow[x] += wv * grow[x];
            }
          }
        }
      }
    }
  }
}

template <class T>
void relu_forward(std::span<T> x) {
  for (auto& v : x) v = v > T{} ? v : T{};
}

/// `y` is the relu output; dy is masked in place.
template <class T>
void relu_backward(std::span<const T> y, std::span<T> dy) {
  for (std::size_t i = 0; i < dy.size(); ++i)
    if (!(y[i] > T{})) dy[i] = T{};
}

/// 2x2 max pooling, stride 2, even extents. Ties go to the first element in
/// row-major window order. `argmax` holds flat input indices.
struct PoolShape {
  std::size_t channels;
  std::size_t height;  // input
  std::size_t width;   // input

  std::size_t in_size() const { return channels * height * width; }
  std::size_t out_size() const { return channels * (height / 2) * (width / 2); }
};

template <class T>
void maxpool2_forward(const PoolShape& s, std::span<const T> in, std::span<T> out, std::span<std::uint32_t> argmax) {
  const std::size_t oh = s.height / 2;
  const std::size_t ow = s.width / 2;
  std::size_t o = 0;
  for (std::size_t c = 0; c < s.channels; ++c) {
    const std::size_t base = c * s.height * s.width;
    for (std::size_t y = 0; y < oh; ++y) {
      for (std::size_t x = 0; x < ow; ++x, ++o) {
        std::size_t best = base + 2 * y * s.width + 2 * x;
        const std::size_t cand[3] = {best + 1, best + s.width, best + s.width + 1};
        for (const std::size_t i : cand)
          if (in[i] > in[best]) best = i;
        out[o] = in[best];
        argmax[o] = static_cast<std::uint32_t>(best);
      }
    }
  }
}

template <class T>
void maxpool2_backward(std::span<const T> dout, std::span<const std::uint32_t> argmax, std::span<T> din) {
  std::fill(din.begin(), din.end(), T{});
  for (std::size_t o = 0; o < dout.size(); ++o) din[argmax[o]] += dout[o];
}

/// y = W x + b with W laid out [out][in].
template <class T>
void dense_forward(std::span<const T> x, std::span<const T> weight, std::span<const T> bias, std::span<T> y) {
  const std::size_t in = x.size();
  for (std::size_t o = 0; o < y.size(); ++o) {
    const T* wr = weight.data() + o * in;
    T acc{};
    for (std::size_t i = 0; i < in; ++i) acc += wr[i] * x[i];
    y[o] = acc + bias[o];
  }
}

/// `dx` may be empty.
template <class T>
void dense_backward(std::span<const T> x, std::span<const T> weight, std::span<const T> dy, std::span<T> dx,
                    std::span<T> dweight, std::span<T> dbias) {
  const std::size_t in = x.size();
  if (!dx.empty()) std::fill(dx.begin(), dx.end(), T{});
  for (std::size_t o = 0; o < dy.size(); ++o) {
    const T g = dy[o];
    dbias[o] += g;
    T* dwr = dweight.data() + o * in;
    for (std::size_t i = 0; i < in; ++i) dwr[i] += g * x[i];
    if (!dx.empty()) {
      const T* wr = weight.data() + o * in;
      for (std::size_t i = 0; i < in; ++i) dx[i] += wr[i] * g;
    }
  }
}

/// Inverted dropout: kept units are divided by the keep probability.
template <class T>
void dropout_apply(std::span<T> x, std::span<const std::uint8_t> keep, T scale) {
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = keep[i] ? x[i] * scale : T{};
}

}  // namespace dxr::nn
