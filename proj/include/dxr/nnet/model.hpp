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
#include <string>
#include <vector>

#include "dxr/nnet/layers.hpp"
#include "dxr/nnet/tensor.hpp"
#include "dxr/rng.hpp"

namespace dxr::nn {

/// Architecture hyperparameters of the two-branch fusion classifier.
///
/// The default branch widths 66:96 keep the 11:16 ratio of the large-scale
/// configuration (1056:1536 features fused into 2048).
struct ModelConfig {
  std::size_t input_size = 32;
  std::size_t branch_a_dim = 66;
  std::size_t branch_b_dim = 96;
  std::size_t fusion_dim = 128;
  std::size_t num_classes = 6;
  double dropout_rate = 0.5;

  static ModelConfig large_scale();

  /// input_size must be a positive multiple of 4, dims >= 1,
  /// dropout_rate in [0, 1).
  void validate() const;

  std::size_t fused_dim() const { return branch_a_dim + branch_b_dim; }

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

/// Fixed convolution widths of the two feature branches.
inline constexpr std::size_t kBranchAChannels1 = 8;
inline constexpr std::size_t kBranchAChannels2 = 16;
inline constexpr std::size_t kBranchBChannels1 = 8;
inline constexpr std::size_t kBranchBChannels2 = 24;

/// Parameter slots, in storage (and checkpoint) order.
enum Param : std::size_t {
  kAConv1W, kAConv1B, kAConv2W, kAConv2B, kAFcW, kAFcB,
  kBConv1W, kBConv1B, kBConv2W, kBConv2B, kBFcW, kBFcB,
  kHeadFc1W, kHeadFc1B, kHeadFc2W, kHeadFc2B,
  kParamCount
};

std::vector<ParamInfo> fusion_param_layout(const ModelConfig& cfg);

enum class Exec { kSerial, kParallel };

/// Activations kept from a forward pass for one sample.
template <class T>
struct SampleActivations {
  std::vector<T> input;
  std::vector<T> a_conv1, a_pool1, a_conv2, a_pool2;
  std::vector<std::uint32_t> a_arg1, a_arg2;
  std::vector<T> b_conv1, b_pool1, b_conv2, b_pool2;
  std::vector<std::uint32_t> b_arg1, b_arg2;
  std::vector<T> fused;   // branch A features followed by branch B features
  std::vector<T> hidden;  // after relu, before dropout
  std::vector<T> dropped;
  std::vector<std::uint8_t> keep;  // empty in eval mode
  std::vector<T> logits;
};

template <class T>
struct ForwardCache {
  std::vector<SampleActivations<T>> samples;
  bool train_mode = false;
  std::uint64_t generation = 0;
  const void* owner = nullptr;
};

/// Two convolutional branches with different receptive fields, fused by
/// concatenation into a two-layer head:
///
///   A: conv3x3(8) relu pool2 conv3x3(16) relu pool2 dense(branch_a_dim)
///   B: conv5x5(8) relu pool2 conv3x3(24) relu pool2 dense(branch_b_dim)
///   concat -> dense(fusion_dim) relu dropout -> dense(num_classes)
template <class T>
class FusionNet {
 public:
  /// All parameters zero.
  explicit FusionNet(const ModelConfig& cfg);

  /// He-normal weights (std sqrt(2 / fan_in)), zero biases.
  static FusionNet initialized(const ModelConfig& cfg, std::uint64_t seed);

  const ModelConfig& config() const noexcept { return cfg_; }
  const ParamSet<T>& params() const noexcept { return params_; }
  /// Mutable access invalidates outstanding forward caches.
  ParamSet<T>& mutable_params() noexcept {
    ++generation_;
    return params_;
  }

  /// batch: N x 1 x S x S, values expected in [0, 1]. Returns N x C logits.
  /// Dropout is active only when `train_mode`; its mask is drawn from `rng`
  /// sample by sample, so the result does not depend on `exec`.
  BasicTensor<T> forward(const BasicTensor<T>& batch, bool train_mode, Rng* rng = nullptr,
                         ForwardCache<T>* cache = nullptr, Exec exec = Exec::kParallel) const;

  /// Exact reverse-mode gradients of sum_n <dlogits[n], logits[n]> with
  /// respect to every parameter. Per-sample contributions are summed in
  /// sample order regardless of `exec`.
  ParamSet<T> backward(const ForwardCache<T>& cache, const BasicTensor<T>& dlogits,
                       Exec exec = Exec::kParallel) const;

  template <class U>
  FusionNet<U> cast() const {
    FusionNet<U> out(cfg_);
    auto src = params_.flat();
    auto dst = out.mutable_params().flat();
    std::copy(src.begin(), src.end(), dst.begin());
    return out;
  }

 private:
  void forward_sample(std::span<const T> x, std::span<const std::uint8_t> keep, SampleActivations<T>& act) const;
  void backward_sample(const SampleActivations<T>& act, std::span<const T> dlogit, std::span<T> grads) const;

  ModelConfig cfg_;
  ParamSet<T> params_;
  std::uint64_t generation_ = 0;
};

extern template class FusionNet<float>;
extern template class FusionNet<double>;

using Model = FusionNet<float>;

/// Converts 8-bit pixels to a 1 x 1 x H x W slice scaled to [0, 1].
template <class T>
void normalize_into(std::span<const std::uint8_t> pixels, std::span<T> dst) {
  for (std::size_t i = 0; i < pixels.size(); ++i) dst[i] = static_cast<T>(pixels[i]) / T(255);
}

}  // namespace dxr::nn
