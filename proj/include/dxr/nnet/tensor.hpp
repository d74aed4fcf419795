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

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dxr/error.hpp"

namespace dxr::nn {

using Shape = std::vector<std::size_t>;

inline std::size_t shape_size(const Shape& s) {
  return std::accumulate(s.begin(), s.end(), std::size_t{1}, std::multiplies<>());
}

inline std::string shape_string(const Shape& s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out += 'x';
    out += std::to_string(s[i]);
  }
  return out;
}

/// Dense row-major n-d array. T is float for models and double for
/// gradient checking.
template <class T>
class BasicTensor {
 public:
  BasicTensor() = default;
  explicit BasicTensor(Shape shape, T fill = T{}) : shape_(std::move(shape)), data_(shape_size(shape_), fill) {}
  BasicTensor(Shape shape, std::vector<T> data) : shape_(std::move(shape)), data_(std::move(data)) {
    if (data_.size() != shape_size(shape_))
      throw ShapeError("tensor: " + std::to_string(data_.size()) + " values for shape " + shape_string(shape_));
  }

  const Shape& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t dim(std::size_t i) const { return shape_.at(i); }
  std::size_t size() const noexcept { return data_.size(); }

  std::span<T> data() noexcept { return data_; }
  std::span<const T> data() const noexcept { return data_; }
  T& operator[](std::size_t i) noexcept { return data_[i]; }
  const T& operator[](std::size_t i) const noexcept { return data_[i]; }

  /// Row `i` of the leading dimension.
  std::span<T> row(std::size_t i) {
    const std::size_t stride = size() / shape_.at(0);
    return std::span<T>(data_).subspan(i * stride, stride);
  }
  std::span<const T> row(std::size_t i) const {
    const std::size_t stride = size() / shape_.at(0);
    return std::span<const T>(data_).subspan(i * stride, stride);
  }

  void fill(T v) { std::fill(data_.begin(), data_.end(), v); }

  bool all_finite() const {
    return std::all_of(data_.begin(), data_.end(), [](T v) { return std::isfinite(v); });
  }

  template <class U>
  BasicTensor<U> cast() const {
    return BasicTensor<U>(shape_, std::vector<U>(data_.begin(), data_.end()));
  }

  friend bool operator==(const BasicTensor&, const BasicTensor&) = default;

 private:
  Shape shape_;
  std::vector<T> data_;
};

using Tensor = BasicTensor<float>;

struct ParamInfo {
  std::string name;
  Shape shape;
  std::size_t offset = 0;  // in elements
  std::size_t fan_in = 0;  // 0 marks a bias

  std::size_t size() const { return shape_size(shape); }
  friend bool operator==(const ParamInfo&, const ParamInfo&) = default;
};

/// Named parameters in one contiguous buffer. Gradients and optimizer state
/// use the same layout, so they are ParamSets too.
template <class T>
class ParamSet {
 public:
  ParamSet() = default;
  explicit ParamSet(std::vector<ParamInfo> info) : info_(std::move(info)) {
    std::size_t off = 0;
    for (auto& p : info_) {
      p.offset = off;
      off += p.size();
    }
    values_.assign(off, T{});
  }

  std::size_t count() const noexcept { return info_.size(); }
  std::size_t total_size() const noexcept { return values_.size(); }
  const std::vector<ParamInfo>& info() const noexcept { return info_; }
  const ParamInfo& info(std::size_t i) const { return info_.at(i); }

  std::span<T> view(std::size_t i) {
    return std::span<T>(values_).subspan(info_[i].offset, info_[i].size());
  }
  std::span<const T> view(std::size_t i) const {
    return std::span<const T>(values_).subspan(info_[i].offset, info_[i].size());
  }
  std::span<T> flat() noexcept { return values_; }
  std::span<const T> flat() const noexcept { return values_; }

  /// Index of `name`, or count() if absent.
  std::size_t find(const std::string& name) const {
    for (std::size_t i = 0; i < info_.size(); ++i)
      if (info_[i].name == name) return i;
    return info_.size();
  }

  BasicTensor<T> tensor(std::size_t i) const {
    auto v = view(i);
    return BasicTensor<T>(info_[i].shape, std::vector<T>(v.begin(), v.end()));
  }

  void zero() { std::fill(values_.begin(), values_.end(), T{}); }

  /// Same layout, zero values.
  ParamSet like() const { return ParamSet(info_); }

  bool same_layout(const ParamSet& o) const { return info_ == o.info_; }

  template <class U>
  ParamSet<U> cast() const {
    ParamSet<U> out(info_);
    std::copy(values_.begin(), values_.end(), out.flat().begin());
    return out;
  }

  friend bool operator==(const ParamSet&, const ParamSet&) = default;

 private:
  std::vector<ParamInfo> info_;
  std::vector<T> values_;
};

}  // namespace dxr::nn
