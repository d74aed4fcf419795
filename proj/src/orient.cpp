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


#include "dxr/orient.hpp"

#include "dxr/error.hpp"
#include "dxr/nnet/loss.hpp"
#include "dxr/rng.hpp"

namespace dxr {

namespace {

constexpr std::uint64_t kSplitStream = 2;
constexpr std::uint64_t kShuffleStream = 3;

}  // namespace

std::vector<StreamItem> orientation_stream(std::size_t num_images, std::uint64_t seed, std::size_t epoch) {
  std::vector<StreamItem> out;
  out.reserve(num_images * kNumPoses);
  for (std::size_t i = 0; i < num_images; ++i)
    for (int r = 0; r < static_cast<int>(kNumPoses); ++r) out.push_back({i, Rotation(r), false, r});
  Rng rng(derive_seed(seed, epoch));
  rng.shuffle(out);
  return out;
}

TrainResult train_orient(const DatasetManifest& m, nn::ModelConfig model_cfg, const TrainConfig& t,
                         const EpochCallback& on_epoch) {
  model_cfg.num_classes = kNumPoses;
  model_cfg.validate();
  t.validate();
  if (m.size() == 0) throw InvalidArgument("orient: empty manifest");
  for (const auto& e : m.entries)
    if (e.rotation.quarter_turns() != 0) throw InvalidArgument("orient: manifest entry " + e.path + " is not canonical");

  auto split = stratified_split(m, t.validation_fraction, derive_seed(t.seed, kSplitStream));
  TrainingSet ts;
  ts.images = load_images(split.first, model_cfg.input_size);
  const std::size_t n = ts.images.size();
  const std::uint64_t shuffle_seed = derive_seed(t.seed, kShuffleStream);
  ts.stream = [n, shuffle_seed](std::size_t epoch) { return orientation_stream(n, shuffle_seed, epoch); };

  ValidationSet vs;
  vs.images = load_images(split.second, model_cfg.input_size);
  for (std::size_t i = 0; i < vs.images.size(); ++i)
    for (int r = 0; r < static_cast<int>(kNumPoses); ++r) vs.items.push_back({i, Rotation(r), false, r});

  auto result = train_loop(model_cfg, t, ts, vs, nn::ClassWeights::uniform(kNumPoses), on_epoch);
  result.train_split = std::move(split.first);
  result.val_split = std::move(split.second);
  result.metadata["task"] = "orient";
  return result;
}

Correction correct_orientation(const nn::Model& model, const Image& img) {
  if (model.config().num_classes != kNumPoses)
    throw InvalidArgument("correct_orientation: model has " + std::to_string(model.config().num_classes) +
                          " outputs, expected 4");
  const auto probs = predict_proba(model, std::span<const Image>(&img, 1));
  const int r = argmax_rows(probs).front();
  Correction c;
  c.detected = Rotation(r);
  c.confidence = probs[static_cast<std::size_t>(r)];
  c.image = rotate(img, c.detected.inverse());
  return c;
}

}  // namespace dxr
