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


#include "dxr/nnet/loss.hpp"

#include <cmath>
#include <string>

namespace dxr::nn {

void ClassWeights::validate(std::size_t num_classes) const {
  if (weight.size() != num_classes)
    throw InvalidArgument("class weights: expected " + std::to_string(num_classes) + " entries");
  bool positive = false;
  for (const double v : weight) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw InvalidArgument("class weights must be finite and >= 0");
    positive = positive || v > 0.0;
  }
  if (!positive) throw InvalidArgument("class weights: at least one entry must be positive");
}

template <class T>
BasicTensor<double> softmax_rows(const BasicTensor<T>& logits) {
  if (logits.rank() != 2) throw ShapeError("softmax: expected a 2-d tensor");
  BasicTensor<double> out(logits.shape());
  for (std::size_t n = 0; n < logits.dim(0); ++n) {
    auto x = logits.row(n);
    auto y = out.row(n);
    double m = x[0];
    for (const T v : x) m = std::max<double>(m, v);
    double z = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) {
      y[j] = std::exp(static_cast<double>(x[j]) - m);
      z += y[j];
    }
    for (auto& v : y) v /= z;
  }
  return out;
}

template <class T>
LossResult<T> weighted_cross_entropy(const BasicTensor<T>& logits, std::span<const int> labels,
                                     const ClassWeights& w) {
  if (logits.rank() != 2 || logits.dim(0) == 0) throw ShapeError("weighted_cross_entropy: expected N x C logits");
  const std::size_t n = logits.dim(0);
  const std::size_t c = logits.dim(1);
  if (labels.size() != n) throw ShapeError("weighted_cross_entropy: label count does not match batch");
  w.validate(c);
  if (!logits.all_finite()) throw NonFiniteError("weighted_cross_entropy: non-finite logits");

  LossResult<T> res;
  res.per_sample.resize(n);
  res.dlogits = BasicTensor<T>(logits.shape());
  const double inv_n = 1.0 / static_cast<double>(n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const int label = labels[i];
    if (label < 0 || static_cast<std::size_t>(label) >= c)
      throw InvalidArgument("weighted_cross_entropy: label " + std::to_string(label) + " out of range");
    auto x = logits.row(i);
    double m = x[0];
    for (const T v : x) m = std::max<double>(m, v);
    double z = 0.0;
    for (const T v : x) z += std::exp(static_cast<double>(v) - m);
    const double lse = m + std::log(z);
    const double wc = w.weight[static_cast<std::size_t>(label)];
    res.per_sample[i] = wc * (lse - static_cast<double>(x[static_cast<std::size_t>(label)]));
    total += res.per_sample[i];
    auto g = res.dlogits.row(i);
    for (std::size_t j = 0; j < c; ++j) {
      const double p = std::exp(static_cast<double>(x[j]) - lse);
      const double onehot = static_cast<int>(j) == label ? 1.0 : 0.0;
      g[j] = static_cast<T>(wc * (p - onehot) * inv_n);
    }
  }
  res.loss = total * inv_n;
  if (!std::isfinite(res.loss)) throw NonFiniteError("weighted_cross_entropy: non-finite loss");
  return res;
}

template LossResult<float> weighted_cross_entropy(const BasicTensor<float>&, std::span<const int>,
                                                  const ClassWeights&);
template LossResult<double> weighted_cross_entropy(const BasicTensor<double>&, std::span<const int>,
                                                   const ClassWeights&);
template BasicTensor<double> softmax_rows(const BasicTensor<float>&);
template BasicTensor<double> softmax_rows(const BasicTensor<double>&);

}  // namespace dxr::nn
