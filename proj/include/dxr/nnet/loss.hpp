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
#include <span>
#include <vector>

#include "dxr/nnet/tensor.hpp"

namespace dxr::nn {

/// Per-class loss weights.
struct ClassWeights {
  std::vector<double> weight;

  static ClassWeights uniform(std::size_t num_classes) { return {std::vector<double>(num_classes, 1.0)}; }

  /// Nonnegative finite entries, at least one positive, `num_classes` long.
  void validate(std::size_t num_classes) const;
};

template <class T>
struct LossResult {
  double loss = 0.0;                // mean of the per-sample losses
  std::vector<double> per_sample;   // weight[c] * (logsumexp(x) - x[c])
  BasicTensor<T> dlogits;           // d loss / d logits
};

/// Weighted cross-entropy over a batch of logits (N x C).
///
/// Each sample contributes weight[label] * (-x[label] + log sum_j exp x[j]),
/// evaluated in double with the maximum logit subtracted first. The batch
/// loss is the plain mean over N, and the gradient is
/// weight[label] * (softmax(x) - onehot(label)) / N.
template <class T>
LossResult<T> weighted_cross_entropy(const BasicTensor<T>& logits, std::span<const int> labels,
                                     const ClassWeights& w);

/// Row-wise softmax of an N x C tensor, computed in double.
template <class T>
BasicTensor<double> softmax_rows(const BasicTensor<T>& logits);

}  // namespace dxr::nn
