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
#include <filesystem>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "dxr/image.hpp"
#include "dxr/nnet/checkpoint.hpp"
#include "dxr/nnet/loss.hpp"
#include "dxr/nnet/model.hpp"
#include "dxr/synth.hpp"

namespace dxr {

struct TrainConfig {
  std::size_t epochs = 40;
  std::size_t batch_size = 32;
  double lr = 0.01;
  double momentum = 0.9;
  double lr_decay_factor = 0.5;
  std::size_t lr_decay_every = 10;
  bool augment_rotations = true;
  bool augment_flips = false;
  bool weighted_loss = true;
  std::uint64_t seed = 42;
  double validation_fraction = 0.15;

  void validate() const;
};

/// lr * decay^floor(epoch / decay_every), epochs counted from 0.
double learning_rate_at(const TrainConfig& t, std::size_t epoch);

/// weight[c] = N / (C * n_c). Throws InvalidArgument when a class is empty.
nn::ClassWeights compute_class_weights(std::span<const std::size_t> counts);
nn::ClassWeights compute_class_weights(const DatasetManifest& m, int num_classes = kNumRegionClasses);

/// One training example as seen by the optimizer: an index into the image
/// list, the transform to apply on the fly and the target label.
struct StreamItem {
  std::size_t index = 0;
  Rotation rotation;
  bool flip = false;
  int label = 0;

  friend bool operator==(const StreamItem&, const StreamItem&) = default;
};

/// Seeded permutation of the manifest for one epoch. With `rotations`, each
/// item also gets a uniform quarter-turn; the label stays the region class.
std::vector<StreamItem> augment_epoch(const DatasetManifest& m, std::uint64_t seed, std::size_t epoch,
                                      bool rotations, bool flips = false);

struct EpochLog {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  double val_acc = 0.0;
  double lr = 0.0;

  friend bool operator==(const EpochLog&, const EpochLog&) = default;
};

struct TrainLog {
  std::vector<EpochLog> epochs;
  std::size_t best_epoch = 0;

  /// `epoch,train_loss,val_loss,val_acc,lr`, full precision.
  std::string to_csv() const;
  void write_csv(const std::filesystem::path& path) const;

  friend bool operator==(const TrainLog&, const TrainLog&) = default;
};

/// Called after every completed epoch.
using EpochCallback = std::function<void(const EpochLog&)>;

/// Images and stream generator for the generic loop below.
struct TrainingSet {
  std::vector<Image> images;
  std::function<std::vector<StreamItem>(std::size_t epoch)> stream;
};

struct ValidationSet {
  std::vector<Image> images;
  std::vector<StreamItem> items;
};

struct TrainResult {
  nn::Model model;  // parameters of the best validation epoch
  TrainLog log;
  nn::ClassWeights weights;
  DatasetManifest train_split;
  DatasetManifest val_split;
  std::map<std::string, std::string> metadata;

  void save_checkpoint(const std::filesystem::path& path) const;
};

/// Momentum SGD with step decay over an arbitrary stream. Keeps the model
/// from the epoch with the highest validation accuracy (earliest on ties).
/// Every random draw comes from `t.seed`.
TrainResult train_loop(const nn::ModelConfig& model_cfg, const TrainConfig& t, const TrainingSet& train,
                       const ValidationSet& val, const nn::ClassWeights& weights,
                       const EpochCallback& on_epoch = {});

/// Region classifier: stratified train/validation split, class weights from
/// the training part, rotation augmentation on the fly.
TrainResult train(const DatasetManifest& m, const nn::ModelConfig& model_cfg, const TrainConfig& t,
                  const EpochCallback& on_epoch = {});

/// Loads every image of the manifest and checks that it is `size` x `size`.
std::vector<Image> load_images(const DatasetManifest& m, std::size_t size);

/// Copies transformed images into an N x 1 x S x S batch in [0, 1].
nn::Tensor make_batch(std::span<const Image> images, std::span<const StreamItem> items, std::size_t first,
                      std::size_t count);

/// Eval-mode softmax probabilities (N x C) for canonical images.
nn::BasicTensor<double> predict_proba(const nn::Model& model, std::span<const Image> images,
                                      std::size_t batch_size = 64);

/// Row-wise argmax, lowest index on ties.
std::vector<int> argmax_rows(const nn::BasicTensor<double>& probs);

}  // namespace dxr
