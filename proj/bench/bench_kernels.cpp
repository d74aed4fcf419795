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


// Wall-clock comparison of the OpenMP kernels against their serial
// reference implementations. Usage: bench_kernels [image_side] [repeats]

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "dxr/enhance.hpp"
#include "dxr/nnet/loss.hpp"
#include "dxr/nnet/model.hpp"
#include "dxr/rng.hpp"

namespace {

double time_ms(int repeats, const std::function<void()>& fn) {
  fn();  // warm-up
  const auto t0 = std::chrono::steady_clock::now();
  for (int i = 0; i < repeats; ++i) fn();
  const auto t1 = std::chrono::steady_clock::now();
  return std::chrono::duration<double, std::milli>(t1 - t0).count() / repeats;
}

void row(const char* name, double serial, double parallel, bool same) {
  std::printf("%-18s serial %9.3f ms  parallel %9.3f ms  speedup %5.2fx  %s\n", name, serial, parallel,
              serial / parallel, same ? "identical" : "MISMATCH");
}

}  // namespace

int main(int argc, char** argv) {
  const std::size_t side = argc > 1 ? std::strtoul(argv[1], nullptr, 10) : 512;
  const int repeats = argc > 2 ? std::atoi(argv[2]) : 5;
#ifdef _OPENMP
  std::printf("threads: %d\n", omp_get_max_threads());
#else
  std::printf("threads: 1 (built without OpenMP)\n");
#endif

  dxr::Rng rng(7);
  dxr::Image img(side, side);
  for (auto& p : img.pixels()) p = static_cast<std::uint8_t>(rng.uniform_index(256));
  const dxr::ClaheParams cp;

  dxr::Image a, b;
  const double ss = time_ms(repeats, [&] { a = dxr::serial::sharpen(img); });
  const double sp = time_ms(repeats, [&] { b = dxr::sharpen(img); });
  row("sharpen", ss, sp, a == b);
  const double ms = time_ms(repeats, [&] { a = dxr::serial::median_filter(img, 2); });
  const double mp = time_ms(repeats, [&] { b = dxr::median_filter(img, 2); });
  row("median r=2", ms, mp, a == b);
  const double hs = time_ms(repeats, [&] { a = dxr::serial::hist_equalize(img); });
  const double hp = time_ms(repeats, [&] { b = dxr::hist_equalize(img); });
  row("hist_equalize", hs, hp, a == b);
  const double cs = time_ms(repeats, [&] { a = dxr::serial::clahe(img, cp); });
  const double cpar = time_ms(repeats, [&] { b = dxr::clahe(img, cp); });
  row("clahe 8x8", cs, cpar, a == b);

  namespace nn = dxr::nn;
  const nn::ModelConfig cfg;
  const auto model = nn::Model::initialized(cfg, 1);
  const std::size_t n = 32;
  nn::Tensor batch({n, 1, cfg.input_size, cfg.input_size});
  for (auto& v : batch.data()) v = static_cast<float>(rng.uniform01());
  nn::Tensor la, lb;
  const double fs = time_ms(repeats, [&] { la = model.forward(batch, false, nullptr, nullptr, nn::Exec::kSerial); });
  const double fp = time_ms(repeats, [&] { lb = model.forward(batch, false, nullptr, nullptr, nn::Exec::kParallel); });
  row("forward n=32", fs, fp, la == lb);

  nn::ForwardCache<float> cache;
  const auto logits = model.forward(batch, false, nullptr, &cache);
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) labels[i] = static_cast<int>(i % cfg.num_classes);
  const auto loss = nn::weighted_cross_entropy(logits, labels, nn::ClassWeights::uniform(cfg.num_classes));
  nn::ParamSet<float> ga, gb;
  const double bs = time_ms(repeats, [&] { ga = model.backward(cache, loss.dlogits, nn::Exec::kSerial); });
  const double bp = time_ms(repeats, [&] { gb = model.backward(cache, loss.dlogits, nn::Exec::kParallel); });
  bool same = true;
  for (std::size_t i = 0; i < ga.total_size(); ++i) same = same && ga.flat()[i] == gb.flat()[i];
  row("backward n=32", bs, bp, same);
  return 0;
}
