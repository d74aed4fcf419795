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

#include <span>
#include <string>

#include "dxr/nnet/tensor.hpp"

namespace dxr::nn {

/// velocity = momentum * velocity - lr * grad; param += velocity.
template <class T>
void sgd_step(std::span<T> params, std::span<const T> grads, std::span<T> velocity, double lr, double momentum) {
  if (params.size() != grads.size() || params.size() != velocity.size())
    throw ShapeError("sgd_step: parameter, gradient and velocity sizes differ");
  if (!(lr >= 0.0)) throw InvalidArgument("sgd_step: lr must be >= 0");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw InvalidArgument("sgd_step: momentum must be in [0,1)");
  const T m = static_cast<T>(momentum);
  const T step = static_cast<T>(lr);
  for (std::size_t i = 0; i < params.size(); ++i) {
    velocity[i] = m * velocity[i] - step * grads[i];
    params[i] += velocity[i];
  }
}

/// Momentum SGD over a ParamSet; the velocity buffer is created on first use.
template <class T>
class Sgd {
 public:
  explicit Sgd(double momentum = 0.9) : momentum_(momentum) {}

  void step(ParamSet<T>& params, const ParamSet<T>& grads, double lr) {
    if (!params.same_layout(grads)) throw ShapeError("sgd: gradient layout does not match parameters");
    if (velocity_.total_size() == 0) velocity_ = params.like();
    if (!velocity_.same_layout(params)) throw ShapeError("sgd: velocity layout does not match parameters");
    sgd_step<T>(params.flat(), grads.flat(), velocity_.flat(), lr, momentum_);
  }

  const ParamSet<T>& velocity() const noexcept { return velocity_; }

 private:
  double momentum_;
  ParamSet<T> velocity_;
};

}  // namespace dxr::nn
