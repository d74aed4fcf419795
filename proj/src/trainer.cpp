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


#include "dxr/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "dxr/error.hpp"
#include "dxr/nnet/sgd.hpp"
#include "dxr/rng.hpp"

namespace dxr {

namespace {

// Seed streams derived from TrainConfig::seed.
constexpr std::uint64_t kInitStream = 1;
constexpr std::uint64_t kSplitStream = 2;
constexpr std::uint64_t kShuffleStream = 3;
constexpr std::uint64_t kDropoutStream = 4;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void TrainConfig::validate() const {
  if (epochs == 0) throw InvalidArgument("train: epochs must be >= 1");
  if (batch_size == 0) throw InvalidArgument("train: batch_size must be >= 1");
  if (!(lr >= 0.0) || !std::isfinite(lr)) throw InvalidArgument("train: lr must be finite and >= 0");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw InvalidArgument("train: momentum must be in [0,1)");
  if (!(lr_decay_factor > 0.0 && lr_decay_factor <= 1.0))
    throw InvalidArgument("train: lr_decay_factor must be in (0,1]");
  if (lr_decay_every == 0) throw InvalidArgument("train: lr_decay_every must be >= 1");
  if (!(validation_fraction > 0.0 && validation_fraction < 1.0))
    throw InvalidArgument("train: validation_fraction must be in (0,1)");
}

double learning_rate_at(const TrainConfig& t, std::size_t epoch) {
  return t.lr * std::pow(t.lr_decay_factor, static_cast<double>(epoch / t.lr_decay_every));
}

nn::ClassWeights compute_class_weights(std::span<const std::size_t> counts) {
  if (counts.empty()) throw InvalidArgument("class weights: no classes");
  const double total = static_cast<double>(std::accumulate(counts.begin(), counts.end(), std::size_t{0}));
  const double c = static_cast<double>(counts.size());
  nn::ClassWeights w;
  for (std::size_t k = 0; k < counts.size(); ++k) {
    if (counts[k] == 0) throw InvalidArgument("class weights: class " + std::to_string(k) + " has no samples");
    w.weight.push_back(total / (c * static_cast<double>(counts[k])));
  }
  return w;
}

nn::ClassWeights compute_class_weights(const DatasetManifest& m, int num_classes) {
  const auto counts = m.class_counts(num_classes);
  return compute_class_weights(counts);
}

std::vector<StreamItem> augment_epoch(const DatasetManifest& m, std::uint64_t seed, std::size_t epoch,
                                      bool rotations, bool flips) {
  Rng rng(derive_seed(seed, epoch));
  std::vector<std::size_t> order(m.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  rng.shuffle(order);
  std::vector<StreamItem> out;
  out.reserve(order.size());
  for (std::size_t i : order) {
    StreamItem s;
    s.index = i;
    s.label = m.entries[i].class_id;
    if (rotations) s.rotation = Rotation(static_cast<int>(rng.uniform_index(4)));
    if (flips) s.flip = rng.bernoulli(0.5);
    out.push_back(s);
  }
  return out;
}

std::string TrainLog::to_csv() const {
  std::string out = "epoch,train_loss,val_loss,val_acc,lr\n";
  for (const auto& e : epochs)
    out += std::to_string(e.epoch) + "," + fmt(e.train_loss) + "," + fmt(e.val_loss) + "," + fmt(e.val_acc) + "," +
           fmt(e.lr) + "\n";
  return out;
}

void TrainLog::write_csv(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << to_csv();
  if (!out) throw IoError("write failed: " + path.string());
}

void TrainResult::save_checkpoint(const std::filesystem::path& path) const {
  nn::save_checkpoint(model, path, metadata);
}

std::vector<Image> load_images(const DatasetManifest& m, std::size_t size) {
  std::vector<Image> out;
  out.reserve(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) {
    Image img = m.load(i);
    if (img.width() != size || img.height() != size)
      throw ShapeError("image " + m.entries[i].path + " is " + std::to_string(img.width()) + "x" +
                       std::to_string(img.height()) + ", model expects " + std::to_string(size) + "x" +
                       std::to_string(size));
    out.push_back(std::move(img));
  }
  return out;
}

nn::Tensor make_batch(std::span<const Image> images, std::span<const StreamItem> items, std::size_t first,
                      std::size_t count) {
  if (count == 0 || first + count > items.size()) throw InvalidArgument("make_batch: range outside stream");
  const Image& ref = images[items[first].index];
  const std::size_t h = ref.height(), w = ref.width();
  nn::Tensor batch({count, 1, h, w});
  for (std::size_t k = 0; k < count; ++k) {
    const StreamItem& s = items[first + k];
    Image img = rotate(images[s.index], s.rotation);
    if (s.flip) img = flip_horizontal(img);
    if (img.width() != w || img.height() != h) throw ShapeError("make_batch: images of different sizes");
    nn::normalize_into<float>(img.pixels(), batch.row(k));
  }
  return batch;
}

nn::BasicTensor<double> predict_proba(const nn::Model& model, std::span<const Image> images, std::size_t batch_size) {
  const std::size_t c = model.config().num_classes;
  nn::BasicTensor<double> out({images.size(), c});
  std::vector<StreamItem> items(images.size());
  for (std::size_t i = 0; i < items.size(); ++i) items[i].index = i;
  for (std::size_t first = 0; first < images.size(); first += batch_size) {
    const std::size_t n = std::min(batch_size, images.size() - first);
    const auto logits = model.forward(make_batch(images, items, first, n), false);
    const auto p = nn::softmax_rows(logits);
    std::copy(p.data().begin(), p.data().end(), out.data().begin() + static_cast<std::ptrdiff_t>(first * c));
  }
  return out;
}

std::vector<int> argmax_rows(const nn::BasicTensor<double>& probs) {
  std::vector<int> out;
  for (std::size_t i = 0; i < probs.dim(0); ++i) {
    const auto row = probs.row(i);
    out.push_back(static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin()));
  }
  return out;
}

TrainResult train_loop(const nn::ModelConfig& model_cfg, const TrainConfig& t, const TrainingSet& train,
                       const ValidationSet& val, const nn::ClassWeights& weights, const EpochCallback& on_epoch) {
  model_cfg.validate();
  t.validate();
  weights.validate(model_cfg.num_classes);
  if (train.images.empty()) throw InvalidArgument("train: empty training set");

  auto model = nn::Model::initialized(model_cfg, derive_seed(t.seed, kInitStream));
  TrainResult result{model, {}, weights, {}, {}, {}};
  nn::Sgd<float> opt(t.momentum);
  Rng dropout_rng(derive_seed(t.seed, kDropoutStream));
  double best_acc = -1.0;

  for (std::size_t epoch = 0; epoch < t.epochs; ++epoch) {
    const double lr = learning_rate_at(t, epoch);
    const auto stream = train.stream(epoch);
    double loss_sum = 0.0;
    for (std::size_t first = 0; first < stream.size(); first += t.batch_size) {
      const std::size_t n = std::min(t.batch_size, stream.size() - first);
      const auto batch = make_batch(train.images, stream, first, n);
      std::vector<int> labels(n);
      for (std::size_t k = 0; k < n; ++k) labels[k] = stream[first + k].label;
      nn::ForwardCache<float> cache;
      const auto logits = model.forward(batch, true, &dropout_rng, &cache);
      const auto loss = nn::weighted_cross_entropy(logits, labels, weights);
      if (!std::isfinite(loss.loss))
        throw NonFiniteError("train: non-finite loss at epoch " + std::to_string(epoch));
      const auto grads = model.backward(cache, loss.dlogits);
      opt.step(model.mutable_params(), grads, lr);
      loss_sum += loss.loss * static_cast<double>(n);
    }

    EpochLog e;
    e.epoch = epoch;
    e.lr = lr;
    e.train_loss = stream.empty() ? 0.0 : loss_sum / static_cast<double>(stream.size());
    if (!val.items.empty()) {
      double vloss = 0.0;
      std::size_t correct = 0;
      for (std::size_t first = 0; first < val.items.size(); first += 64) {
        const std::size_t n = std::min<std::size_t>(64, val.items.size() - first);
        const auto logits = model.forward(make_batch(val.images, val.items, first, n), false);
        std::vector<int> labels(n);
        for (std::size_t k = 0; k < n; ++k) labels[k] = val.items[first + k].label;
        vloss += nn::weighted_cross_entropy(logits, labels, weights).loss * static_cast<double>(n);
        const auto pred = argmax_rows(nn::softmax_rows(logits));
        for (std::size_t k = 0; k < n; ++k) correct += pred[k] == labels[k] ? 1 : 0;
      }
      e.val_loss = vloss / static_cast<double>(val.items.size());
      e.val_acc = static_cast<double>(correct) / static_cast<double>(val.items.size());
    }
    result.log.epochs.push_back(e);
    if (on_epoch) on_epoch(e);
    // Without validation data the last epoch is kept.
    if (val.items.empty() || e.val_acc > best_acc) {
      best_acc = e.val_acc;
      result.log.best_epoch = epoch;
      result.model = model;
    }
  }

  const auto& best = result.log.epochs[result.log.best_epoch];
  result.metadata["best_epoch"] = std::to_string(result.log.best_epoch);
  result.metadata["best_val_acc"] = fmt(best.val_acc);
  result.metadata["epochs"] = std::to_string(t.epochs);
  result.metadata["seed"] = std::to_string(t.seed);
  std::string w;
  for (std::size_t c = 0; c < weights.weight.size(); ++c) w += (c ? " " : "") + fmt(weights.weight[c]);
  result.metadata["class_weights"] = w;
  return result;
}

TrainResult train(const DatasetManifest& m, const nn::ModelConfig& model_cfg, const TrainConfig& t,
                  const EpochCallback& on_epoch) {
  model_cfg.validate();
  t.validate();
  if (m.size() == 0) throw InvalidArgument("train: empty manifest");
  const int nc = static_cast<int>(model_cfg.num_classes);
  const auto all_counts = m.class_counts(nc);
  for (int c = 0; c < nc; ++c)
    if (all_counts[static_cast<std::size_t>(c)] == 0)
      throw InvalidArgument("train: class " + std::to_string(c) + " is absent from the manifest");

  auto split = stratified_split(m, t.validation_fraction, derive_seed(t.seed, kSplitStream), nc);
  DatasetManifest train_split = std::move(split.first);
  DatasetManifest val_split = std::move(split.second);
  const auto counts = train_split.class_counts(nc);
  for (int c = 0; c < nc; ++c)
    if (counts[static_cast<std::size_t>(c)] == 0)
      throw InvalidArgument("train: class " + std::to_string(c) + " is missing from the training split");

  const auto weights = t.weighted_loss ? compute_class_weights(counts) : nn::ClassWeights::uniform(model_cfg.num_classes);

  TrainingSet ts;
  ts.images = load_images(train_split, model_cfg.input_size);
  const std::uint64_t shuffle_seed = derive_seed(t.seed, kShuffleStream);
  ts.stream = [&train_split, shuffle_seed, &t](std::size_t epoch) {
    return augment_epoch(train_split, shuffle_seed, epoch, t.augment_rotations, t.augment_flips);
  };

  ValidationSet vs;
  vs.images = load_images(val_split, model_cfg.input_size);
  for (std::size_t i = 0; i < val_split.size(); ++i) {
    StreamItem s;
    s.index = i;
    s.label = val_split.entries[i].class_id;
    vs.items.push_back(s);
  }

  auto result = train_loop(model_cfg, t, ts, vs, weights, on_epoch);
  result.train_split = std::move(train_split);
  result.val_split = std::move(val_split);
  result.metadata["task"] = "region";
  result.metadata["weighted_loss"] = t.weighted_loss ? "1" : "0";
  return result;
}

}  // namespace dxr
