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


#include "dxr/nnet/model.hpp"

#include <exception>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace dxr::nn {

ModelConfig ModelConfig::large_scale() {
  ModelConfig cfg;
  cfg.branch_a_dim = 1056;
  cfg.branch_b_dim = 1536;
  cfg.fusion_dim = 2048;
  return cfg;
}

void ModelConfig::validate() const {
  if (input_size == 0 || input_size % 4 != 0) throw InvalidArgument("model: input_size must be a positive multiple of 4");
  if (branch_a_dim == 0 || branch_b_dim == 0 || fusion_dim == 0 || num_classes == 0)
    throw InvalidArgument("model: layer widths must be >= 1");
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) throw InvalidArgument("model: dropout_rate must be in [0,1)");
}

std::vector<ParamInfo> fusion_param_layout(const ModelConfig& cfg) {
  cfg.validate();
  const std::size_t q = cfg.input_size / 4;
  const std::size_t a_flat = kBranchAChannels2 * q * q;
  const std::size_t b_flat = kBranchBChannels2 * q * q;
  auto weight = [](std::string name, Shape shape) {
    std::size_t fan = 1;
    for (std::size_t i = 1; i < shape.size(); ++i) fan *= shape[i];
    return ParamInfo{std::move(name), std::move(shape), 0, fan};
  };
  auto bias = [](std::string name, std::size_t n) { return ParamInfo{std::move(name), {n}, 0, 0}; };
  return {
      weight("branch_a.conv1.weight", {kBranchAChannels1, 1, 3, 3}),
      bias("branch_a.conv1.bias", kBranchAChannels1),
      weight("branch_a.conv2.weight", {kBranchAChannels2, kBranchAChannels1, 3, 3}),
      bias("branch_a.conv2.bias", kBranchAChannels2),
      weight("branch_a.fc.weight", {cfg.branch_a_dim, a_flat}),
      bias("branch_a.fc.bias", cfg.branch_a_dim),
      weight("branch_b.conv1.weight", {kBranchBChannels1, 1, 5, 5}),
      bias("branch_b.conv1.bias", kBranchBChannels1),
      weight("branch_b.conv2.weight", {kBranchBChannels2, kBranchBChannels1, 3, 3}),
      bias("branch_b.conv2.bias", kBranchBChannels2),
      weight("branch_b.fc.weight", {cfg.branch_b_dim, b_flat}),
      bias("branch_b.fc.bias", cfg.branch_b_dim),
      weight("head.fc1.weight", {cfg.fusion_dim, cfg.fused_dim()}),
      bias("head.fc1.bias", cfg.fusion_dim),
      weight("head.fc2.weight", {cfg.num_classes, cfg.fusion_dim}),
      bias("head.fc2.bias", cfg.num_classes),
  };
}

template <class T>
FusionNet<T>::FusionNet(const ModelConfig& cfg) : cfg_(cfg), params_(fusion_param_layout(cfg)) {}

template <class T>
FusionNet<T> FusionNet<T>::initialized(const ModelConfig& cfg, std::uint64_t seed) {
  FusionNet net(cfg);
  Rng rng(seed);
  auto& ps = net.mutable_params();
  for (std::size_t i = 0; i < ps.count(); ++i) {
    const auto& info = ps.info(i);
    if (info.fan_in == 0) continue;
    const double stddev = std::sqrt(2.0 / static_cast<double>(info.fan_in));
    for (auto& v : ps.view(i)) v = static_cast<T>(stddev * rng.normal());
  }
  return net;
}

namespace {

template <class T>
void require_finite(std::span<const T> v, const char* what) {
  for (const T x : v)
    if (!std::isfinite(x)) throw NonFiniteError(std::string("non-finite value after ") + what);
}

int worker_count(Exec exec) {
#ifdef _OPENMP
  return exec == Exec::kParallel ? omp_get_max_threads() : 1;
#else
  (void)exec;
  return 1;
#endif
}

// Runs body(i) for i in [0, n), in parallel when asked, rethrowing the first
// (lowest index) failure afterwards.
template <class F>
void for_each_sample(std::size_t n, Exec exec, F&& body) {
  std::vector<std::exception_ptr> errors(n);
  const auto count = static_cast<std::ptrdiff_t>(n);
  if (exec == Exec::kParallel) {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < count; ++i) {
      try {
        body(static_cast<std::size_t>(i));
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  } else {
    for (std::ptrdiff_t i = 0; i < count; ++i) {
      try {
        body(static_cast<std::size_t>(i));
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace

template <class T>
void FusionNet<T>::forward_sample(std::span<const T> x, std::span<const std::uint8_t> keep,
                                  SampleActivations<T>& act) const {
  const std::size_t s = cfg_.input_size;
  const std::size_t h = s / 2;
  const auto& p = params_;
  act.input.assign(x.begin(), x.end());

  auto branch = [&](std::size_t w1, std::size_t k1, std::size_t c1, std::size_t c2, std::size_t fc,
                    std::vector<T>& conv1, std::vector<T>& pool1, std::vector<std::uint32_t>& arg1,
                    std::vector<T>& conv2, std::vector<T>& pool2, std::vector<std::uint32_t>& arg2,
                    std::span<T> features) {
    const ConvShape s1{1, c1, k1, s, s};
    conv1.resize(s1.out_size());
    conv2d_forward<T>(s1, x, p.view(w1), p.view(w1 + 1), conv1);
    relu_forward<T>(conv1);
    require_finite<T>(conv1, "conv1");
    const PoolShape p1{c1, s, s};
    pool1.resize(p1.out_size());
    arg1.resize(p1.out_size());
    maxpool2_forward<T>(p1, conv1, pool1, arg1);

    const ConvShape s2{c1, c2, 3, h, h};
    conv2.resize(s2.out_size());
    conv2d_forward<T>(s2, pool1, p.view(w1 + 2), p.view(w1 + 3), conv2);
    relu_forward<T>(conv2);
    require_finite<T>(conv2, "conv2");
    const PoolShape p2{c2, h, h};
    pool2.resize(p2.out_size());
    arg2.resize(p2.out_size());
    maxpool2_forward<T>(p2, conv2, pool2, arg2);

    dense_forward<T>(pool2, p.view(fc), p.view(fc + 1), features);
    require_finite<T>(features, "branch dense");
  };

  act.fused.assign(cfg_.fused_dim(), T{});
  std::span<T> fused(act.fused);
  branch(kAConv1W, 3, kBranchAChannels1, kBranchAChannels2, kAFcW, act.a_conv1, act.a_pool1, act.a_arg1, act.a_conv2,
         act.a_pool2, act.a_arg2, fused.first(cfg_.branch_a_dim));
  branch(kBConv1W, 5, kBranchBChannels1, kBranchBChannels2, kBFcW, act.b_conv1, act.b_pool1, act.b_arg1, act.b_conv2,
         act.b_pool2, act.b_arg2, fused.subspan(cfg_.branch_a_dim));

  act.hidden.resize(cfg_.fusion_dim);
  dense_forward<T>(act.fused, p.view(kHeadFc1W), p.view(kHeadFc1B), act.hidden);
  relu_forward<T>(act.hidden);
  require_finite<T>(act.hidden, "fusion dense");

  act.dropped = act.hidden;
  act.keep.assign(keep.begin(), keep.end());
  if (!keep.empty()) dropout_apply<T>(act.dropped, keep, static_cast<T>(1.0 / (1.0 - cfg_.dropout_rate)));

  act.logits.resize(cfg_.num_classes);
  dense_forward<T>(act.dropped, p.view(kHeadFc2W), p.view(kHeadFc2B), act.logits);
  require_finite<T>(act.logits, "output dense");
}

template <class T>
BasicTensor<T> FusionNet<T>::forward(const BasicTensor<T>& batch, bool train_mode, Rng* rng, ForwardCache<T>* cache,
                                     Exec exec) const {
  const std::size_t s = cfg_.input_size;
  if (batch.rank() != 4 || batch.dim(0) == 0 || batch.dim(1) != 1 || batch.dim(2) != s || batch.dim(3) != s) {
    throw ShapeError("forward: expected N x 1 x " + std::to_string(s) + " x " + std::to_string(s) + " input, got " +
                     shape_string(batch.shape()));
  }
  if (!batch.all_finite()) throw NonFiniteError("forward: non-finite input");
  const std::size_t n = batch.dim(0);
  const bool use_dropout = train_mode && cfg_.dropout_rate > 0.0;
  if (use_dropout && rng == nullptr) throw InvalidArgument("forward: train mode with dropout needs an rng");

  std::vector<std::vector<std::uint8_t>> keep(n);
  if (use_dropout) {
    const double keep_prob = 1.0 - cfg_.dropout_rate;
    for (auto& k : keep) {
      k.resize(cfg_.fusion_dim);
      for (auto& bit : k) bit = rng->bernoulli(keep_prob) ? 1 : 0;
    }
  }

  std::vector<SampleActivations<T>> acts(n);
  for_each_sample(n, exec, [&](std::size_t i) { forward_sample(batch.row(i), keep[i], acts[i]); });

  BasicTensor<T> logits({n, cfg_.num_classes});
  for (std::size_t i = 0; i < n; ++i) std::copy(acts[i].logits.begin(), acts[i].logits.end(), logits.row(i).begin());

  if (cache) {
    cache->samples = std::move(acts);
    cache->train_mode = train_mode;
    cache->generation = generation_;
    cache->owner = this;
  }
  return logits;
}

template <class T>
void FusionNet<T>::backward_sample(const SampleActivations<T>& act, std::span<const T> dlogit, std::span<T> grads) const {
  const std::size_t s = cfg_.input_size;
  const std::size_t h = s / 2;
  const auto& p = params_;
  auto g = [&](std::size_t i) { return grads.subspan(p.info(i).offset, p.info(i).size()); };

  std::vector<T> d_dropped(cfg_.fusion_dim);
  dense_backward<T>(act.dropped, p.view(kHeadFc2W), dlogit, d_dropped, g(kHeadFc2W), g(kHeadFc2B));
  std::vector<T>& d_hidden = d_dropped;
  if (!act.keep.empty()) dropout_apply<T>(d_hidden, act.keep, static_cast<T>(1.0 / (1.0 - cfg_.dropout_rate)));
  relu_backward<T>(act.hidden, d_hidden);

  std::vector<T> d_fused(cfg_.fused_dim());
  dense_backward<T>(act.fused, p.view(kHeadFc1W), d_hidden, d_fused, g(kHeadFc1W), g(kHeadFc1B));

  auto branch = [&](std::size_t w1, std::size_t k1, std::size_t c1, std::size_t c2, std::size_t fc,
                    const std::vector<T>& conv1, const std::vector<T>& pool1, const std::vector<std::uint32_t>& arg1,
                    const std::vector<T>& conv2, const std::vector<T>& pool2, const std::vector<std::uint32_t>& arg2,
                    std::span<const T> d_features) {
    std::vector<T> d_pool2(pool2.size());
    dense_backward<T>(pool2, p.view(fc), d_features, d_pool2, g(fc), g(fc + 1));
    std::vector<T> d_conv2(conv2.size());
    maxpool2_backward<T>(d_pool2, arg2, d_conv2);
    relu_backward<T>(conv2, d_conv2);
    std::vector<T> d_pool1(pool1.size());
    conv2d_backward<T>(ConvShape{c1, c2, 3, h, h}, pool1, p.view(w1 + 2), d_conv2, d_pool1, g(w1 + 2), g(w1 + 3));
    std::vector<T> d_conv1(conv1.size());
    maxpool2_backward<T>(d_pool1, arg1, d_conv1);
    relu_backward<T>(conv1, d_conv1);
    conv2d_backward<T>(ConvShape{1, c1, k1, s, s}, act.input, p.view(w1), d_conv1, {}, g(w1), g(w1 + 1));
  };

  std::span<const T> df(d_fused);
  branch(kAConv1W, 3, kBranchAChannels1, kBranchAChannels2, kAFcW, act.a_conv1, act.a_pool1, act.a_arg1, act.a_conv2,
         act.a_pool2, act.a_arg2, df.first(cfg_.branch_a_dim));
  branch(kBConv1W, 5, kBranchBChannels1, kBranchBChannels2, kBFcW, act.b_conv1, act.b_pool1, act.b_arg1, act.b_conv2,
         act.b_pool2, act.b_arg2, df.subspan(cfg_.branch_a_dim));
}

template <class T>
ParamSet<T> FusionNet<T>::backward(const ForwardCache<T>& cache, const BasicTensor<T>& dlogits, Exec exec) const {
  if (cache.owner != this || cache.samples.empty()) throw StateError("backward: missing forward cache");
  if (cache.generation != generation_) throw StateError("backward: stale forward cache (parameters changed)");
  const std::size_t n = cache.samples.size();
  if (dlogits.rank() != 2 || dlogits.dim(0) != n || dlogits.dim(1) != cfg_.num_classes) {
    throw ShapeError("backward: dlogits must be " + std::to_string(n) + "x" + std::to_string(cfg_.num_classes) +
                     ", got " + shape_string(dlogits.shape()));
  }

  ParamSet<T> grads = params_.like();
  auto total = grads.flat();
  const std::size_t width = params_.total_size();
  const std::size_t block = static_cast<std::size_t>(std::max(1, worker_count(exec)));
  std::vector<T> buffers(block * width);

  for (std::size_t start = 0; start < n; start += block) {
    const std::size_t m = std::min(block, n - start);
    for_each_sample(m, exec, [&](std::size_t t) {
      std::span<T> buf(buffers.data() + t * width, width);
      std::fill(buf.begin(), buf.end(), T{});
      backward_sample(cache.samples[start + t], dlogits.row(start + t), buf);
    });
    for (std::size_t t = 0; t < m; ++t) {
      const T* buf = buffers.data() + t * width;
      for (std::size_t i = 0; i < width; ++i) total[i] += buf[i];
    }
  }
  require_finite<T>(grads.flat(), "backward");
  return grads;
}

template class FusionNet<float>;
template class FusionNet<double>;

}  // namespace dxr::nn
