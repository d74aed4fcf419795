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
#include <vector>

#include "dxr/image.hpp"
#include "dxr/nnet/model.hpp"
#include "dxr/synth.hpp"
#include "dxr/trainer.hpp"

namespace dxr {

inline constexpr std::size_t kNumPoses = 4;

/// Every image under all four quarter-turns, labelled with the turn count,
/// shuffled per (seed, epoch).
std::vector<StreamItem> orientation_stream(std::size_t num_images, std::uint64_t seed, std::size_t epoch);

/// Pose classifier with `num_classes` forced to 4. The manifest must hold
/// canonical images (rotation 0). The validation split is stratified by
/// region class and scored under all four turns.
TrainResult train_orient(const DatasetManifest& m, nn::ModelConfig model_cfg, const TrainConfig& t,
                         const EpochCallback& on_epoch = {});

struct Correction {
  Image image;
  Rotation detected;
  double confidence = 0.0;
};

/// Predicts the quarter-turn r that was applied to `img` and undoes it.
Correction correct_orientation(const nn::Model& model, const Image& img);

}  // namespace dxr
