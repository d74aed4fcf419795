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


// Acceptance run: one PASS/FAIL line per criterion, INFO lines for context.
// Usage: acceptance [work_dir]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "dxr/cli.hpp"
#include "dxr/enhance.hpp"
#include "dxr/kmeans.hpp"
#include "dxr/metrics.hpp"
#include "dxr/nnet/layers.hpp"
#include "dxr/nnet/loss.hpp"
#include "dxr/nnet/model.hpp"
#include "dxr/orient.hpp"
#include "dxr/phash.hpp"
#include "dxr/rng.hpp"
#include "dxr/synth.hpp"
#include "dxr/trainer.hpp"

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

int g_failures = 0;

void verdict(int id, bool ok, const std::string& detail) {
  std::printf("%s criterion %d: %s\n", ok ? "PASS" : "FAIL", id, detail.c_str());
  std::fflush(stdout);
  if (!ok) ++g_failures;
}

void info(int id, const std::string& detail) {
  std::printf("INFO criterion %d: %s\n", id, detail.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

std::map<std::string, std::string> tree(const fs::path& root) {
  std::map<std::string, std::string> t;
  for (const auto& e : fs::recursive_directory_iterator(root))
    if (e.is_regular_file()) t[fs::relative(e.path(), root).string()] = slurp(e.path());
  return t;
}

bool cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = dxr::cli::run(args, out, err);
  if (code != 0) std::printf("  dxr %s failed: %s", args.empty() ? "" : args[0].c_str(), err.str().c_str());
  return code == 0;
}

// ---------------------------------------------------------------- 1

// |a - n| / max(|a|, |n|), with the denominator floored at 1e-6 so that two
// gradients that are both numerically zero count as agreeing.
double rel_error(double analytic, double numeric) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), 1e-6});
}

struct GradStats {
  std::size_t checked = 0;
  double worst = 0.0;
};

// Central differences with step 1e-3 on `count` random coordinates of `vars`.
GradStats check_coords(std::vector<double*> vars, const std::vector<double>& analytic,
                       const std::function<double()>& f, std::size_t count, dxr::Rng& rng) {
  GradStats s;
  const double h = 1e-3;
  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t i = rng.uniform_index(vars.size());
    const double orig = *vars[i];
    *vars[i] = orig + h;
    const double up = f();
    *vars[i] = orig - h;
    const double down = f();
    *vars[i] = orig;
    s.worst = std::max(s.worst, rel_error(analytic[i], (up - down) / (2.0 * h)));
    ++s.checked;
  }
  return s;
}

std::vector<double> normals(dxr::Rng& rng, std::size_t n, double away_from_zero = 0.0) {
  std::vector<double> v(n);
  for (auto& x : v) {
    do x = rng.normal();
    while (std::abs(x) < away_from_zero);
  }
  return v;
}

template <class... Vs>
std::vector<double*> pointers(Vs&... vs) {
  std::vector<double*> out;
  (..., [&](std::vector<double>& v) { for (auto& x : v) out.push_back(&x); }(vs));
  return out;
}

template <class... Vs>
std::vector<double> concat(const Vs&... vs) {
  std::vector<double> out;
  (..., out.insert(out.end(), vs.begin(), vs.end()));
  return out;
}

void criterion_gradients() {
  using namespace dxr::nn;
  const auto t0 = Clock::now();
  dxr::Rng rng(2024);
  const std::size_t samples = 200;
  std::vector<std::pair<std::string, GradStats>> results;

  auto dot = [](const std::vector<double>& a, const std::vector<double>& b) {
    return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
  };

  for (std::size_t k : {std::size_t{3}, std::size_t{5}}) {
    const ConvShape s{3, 4, k, 6, 6};
    auto in = normals(rng, s.in_size()), w = normals(rng, s.weight_size()), b = normals(rng, 4);
    const auto dir = normals(rng, s.out_size());
    auto f = [&] {
      std::vector<double> out(s.out_size());
      conv2d_forward<double>(s, in, w, b, out);
      return dot(out, dir);
    };
    std::vector<double> din(in.size()), dw(w.size(), 0.0), db(b.size(), 0.0);
    conv2d_backward<double>(s, in, w, dir, din, dw, db);
    results.emplace_back("conv" + std::to_string(k) + "x" + std::to_string(k),
                         check_coords(pointers(in, w, b), concat(din, dw, db), f, samples, rng));
  }
  {
    // inputs kept away from the kink, where the derivative is undefined
    auto x = normals(rng, 300, 0.01);
    const auto dir = normals(rng, 300);
    auto f = [&] {
      auto y = x;
      relu_forward<double>(y);
      return dot(y, dir);
    };
    auto y = x;
    relu_forward<double>(y);
    auto dy = dir;
    relu_backward<double>(y, dy);
    results.emplace_back("relu", check_coords(pointers(x), dy, f, samples, rng));
  }
  {
    const PoolShape s{3, 8, 8};
    auto x = normals(rng, s.in_size());
    const auto dir = normals(rng, s.out_size());
    auto f = [&] {
      std::vector<double> out(s.out_size());
      std::vector<std::uint32_t> arg(s.out_size());
      maxpool2_forward<double>(s, x, out, arg);
      return dot(out, dir);
    };
    std::vector<double> out(s.out_size()), dx(x.size());
    std::vector<std::uint32_t> arg(s.out_size());
    maxpool2_forward<double>(s, x, out, arg);
    maxpool2_backward<double>(dir, arg, dx);
    results.emplace_back("maxpool", check_coords(pointers(x), dx, f, samples, rng));
  }
  {
    auto x = normals(rng, 20), w = normals(rng, 200), b = normals(rng, 10);
    const auto dir = normals(rng, 10);
    auto f = [&] {
      std::vector<double> y(10);
      dense_forward<double>(x, w, b, y);
      return dot(y, dir);
    };
    std::vector<double> dx(20), dw(200, 0.0), db(10, 0.0);
    dense_backward<double>(x, w, dir, dx, dw, db);
    results.emplace_back("dense", check_coords(pointers(x, w, b), concat(dx, dw, db), f, samples, rng));
  }
  {
    auto x = normals(rng, 300);
    const auto dir = normals(rng, 300);
    std::vector<std::uint8_t> keep(300);
    for (auto& k : keep) k = rng.bernoulli(0.5) ? 1 : 0;
    auto f = [&] {
      auto y = x;
      dropout_apply<double>(y, keep, 2.0);
      return dot(y, dir);
    };
    auto dx = dir;
    dropout_apply<double>(dx, keep, 2.0);
    results.emplace_back("dropout", check_coords(pointers(x), dx, f, samples, rng));
  }
  {
    const std::size_t n = 3, c = 6;
    auto logits = normals(rng, n * c);
    const std::vector<int> labels{0, 5, 2};
    const ClassWeights cw{{1.0, 0.7, 2.0, 1.2, 3.0, 5.6}};
    auto f = [&] {
      return weighted_cross_entropy(BasicTensor<double>({n, c}, logits), labels, cw).loss;
    };
    const auto g = weighted_cross_entropy(BasicTensor<double>({n, c}, logits), labels, cw).dlogits;
    results.emplace_back("weighted-ce", check_coords(pointers(logits), {g.data().begin(), g.data().end()}, f,
                                                     samples, rng));
  }
  for (const bool train_mode : {false, true}) {
    auto net = FusionNet<double>::initialized(ModelConfig{}, 7);
    for (std::size_t p = 0; p < kParamCount; ++p)
      if (net.params().info(p).fan_in == 0)
        for (auto& v : net.mutable_params().view(p)) v = 0.05 * rng.normal();
    BasicTensor<double> x({2, 1, 32, 32});
    for (auto& v : x.data()) v = rng.uniform01();
    const std::vector<int> labels{1, 4};
    const ClassWeights cw{{1.0, 0.8, 1.0, 1.0, 2.1, 5.6}};
    auto loss = [&](const FusionNet<double>& model, ForwardCache<double>* cache) {
      dxr::Rng drop(31);
      const auto logits = model.forward(x, train_mode, &drop, cache, Exec::kSerial);
      return weighted_cross_entropy(logits, labels, cw);
    };
    ForwardCache<double> cache;
    const auto l = loss(net, &cache);
    const auto g = net.backward(cache, l.dlogits, Exec::kSerial);
    std::vector<double*> vars;
    for (auto& v : net.mutable_params().flat()) vars.push_back(&v);
    const std::vector<double> analytic(g.flat().begin(), g.flat().end());
    const auto st = check_coords(vars, analytic, [&] { return loss(net, nullptr).loss; }, 2 * samples, rng);
    results.emplace_back(train_mode ? "fusion-model(train)" : "fusion-model(eval)", st);
  }

  const double secs = seconds_since(t0);
  bool ok = secs < 60.0;
  std::string detail;
  for (const auto& [name, st] : results) {
    ok = ok && st.checked >= samples && st.worst < 1e-3;
    detail += name + " n=" + std::to_string(st.checked) + " max_rel=" + fmt("%.2e", st.worst) + "; ";
  }
  verdict(1, ok, "gradient check (step 1e-3, tol 1e-3): " + detail + fmt("%.1f s", secs));
}

// ---------------------------------------------------------------- 2

long double oracle_loss(const std::vector<double>& x, int label, double w) {
  long double s = 0.0L;
  for (double v : x) s += std::exp(static_cast<long double>(v));
  return static_cast<long double>(w) * (std::log(s) - static_cast<long double>(x[static_cast<std::size_t>(label)]));
}

void criterion_loss() {
  using namespace dxr::nn;
  dxr::Rng rng(77);
  double worst = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const std::size_t c = 2 + rng.uniform_index(9);
    std::vector<double> x(c);
    const double scale = t % 3 == 0 ? 30.0 : 3.0;
    for (auto& v : x) v = scale * rng.normal();
    const int label = static_cast<int>(rng.uniform_index(c));
    ClassWeights w{std::vector<double>(c)};
    for (auto& v : w.weight) v = 0.1 + 9.9 * rng.uniform01();
    const std::vector<int> labels{label};
    const double got = weighted_cross_entropy(BasicTensor<double>({1, c}, x), labels, w).loss;
    worst = std::max(worst, static_cast<double>(std::abs(static_cast<long double>(got) -
                                                         oracle_loss(x, label, w.weight[static_cast<std::size_t>(label)]))));
  }
  const std::vector<int> l0{0};
  const double ln2 = weighted_cross_entropy(BasicTensor<double>({1, 2}), l0, ClassWeights::uniform(2)).loss;
  const double f2 = weighted_cross_entropy(BasicTensor<double>({1, 2}, std::vector<double>{2.0, 0.0}), l0,
                                           ClassWeights{{3.0, 1.0}})
                        .loss;
  const bool ok = worst < 1e-6 && std::abs(ln2 - 0.693147) < 1e-6 && std::abs(f2 - 0.380784) < 1e-6;
  verdict(2, ok, "weighted CE vs long-double oracle on 1000 triples, max abs err " + fmt("%.2e", worst) +
                     "; fixtures ln2=" + fmt("%.6f", ln2) + " 3*(-2+ln(e^2+1))=" + fmt("%.6f", f2));
}

// ---------------------------------------------------------------- 3

void criterion_auc() {
  dxr::Rng rng(303);
  double worst = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const std::size_t n = 2 + rng.uniform_index(199);
    std::vector<double> s(n);
    std::vector<int> y(n);
    const std::uint64_t levels = t % 2 == 0 ? 4 + rng.uniform_index(10) : 1000000;
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = static_cast<double>(rng.uniform_index(levels)) / static_cast<double>(levels);
      y[i] = rng.bernoulli(0.4) ? 1 : 0;
    }
    // inject exact ties between the two classes
    for (std::size_t k = 0; k < n / 10; ++k) s[rng.uniform_index(n)] = s[rng.uniform_index(n)];
    y[rng.uniform_index(n)] = 1;
    std::size_t zero_at;
    do zero_at = rng.uniform_index(n);
    while (n > 1 && y[zero_at] == 1 && std::count(y.begin(), y.end(), 1) == 1);
    y[zero_at] = 0;
    if (std::count(y.begin(), y.end(), 1) == 0) y[(zero_at + 1) % n] = 1;

    std::uint64_t wins2 = 0, pairs = 0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (y[i] == 1 && y[j] == 0) {
          ++pairs;
          wins2 += s[i] > s[j] ? 2 : (s[i] == s[j] ? 1 : 0);
        }
    const double brute = static_cast<double>(wins2) / (2.0 * static_cast<double>(pairs));
    worst = std::max(worst, std::abs(dxr::roc_curve(s, y).auc - brute));
  }
  const std::vector<double> fs{0.1, 0.4, 0.35, 0.8};
  const std::vector<int> fy{0, 0, 1, 1};
  const double fixture = dxr::roc_curve(fs, fy).auc;
  verdict(3, worst < 1e-9 && std::abs(fixture - 0.75) < 1e-12,
          "trapezoidal AUC vs pairwise statistic on 1000 sets, max abs diff " + fmt("%.2e", worst) + "; fixture " +
              fmt("%.4f", fixture));
}

// ---------------------------------------------------------------- 4

int psnr_wins(std::size_t size, std::size_t trials) {
  int wins = 0;
  for (std::size_t t = 0; t < trials; ++t) {
    dxr::SynthParams p;
    p.image_size = size;
    p.noise_impulse_prob = 0.0;
    const auto clean = dxr::generate_image(static_cast<int>(t % 6), p, dxr::derive_seed(99, t));
    auto noisy = clean;
    dxr::Rng rng(dxr::derive_seed(1234, t));
    for (auto& v : noisy.pixels())
      if (rng.bernoulli(0.05)) v = rng.bernoulli(0.5) ? 255 : 0;
    const auto out = dxr::enhance_chain(noisy, dxr::ClaheParams{}, 1);
    wins += dxr::psnr(out, clean) > dxr::psnr(noisy, clean) ? 1 : 0;
  }
  return wins;
}

void criterion_enhance() {
  using dxr::Image;
  bool fixtures = true;
  std::string failed;
  auto expect = [&](bool cond, const char* what) {
    if (!cond) {
      fixtures = false;
      failed += std::string(" ") + what;
    }
  };
  {
    Image dot(3, 3, 0);
    dot.at(1, 1) = 100;
    const auto lap = dxr::laplacian(dot);
    expect(lap.at(1, 1) == -400, "laplacian-center");
    expect(lap.at(0, 1) == 100 && lap.at(1, 0) == 100 && lap.at(1, 2) == 100 && lap.at(2, 1) == 100,
           "laplacian-neighbours");
    expect(dxr::sharpen(dot).at(1, 1) == 255, "sharpen-center");
    const Image flat(7, 5, 140);
    expect(dxr::laplacian(flat).values == std::vector<std::int32_t>(35, 0), "laplacian-constant");
    expect(dxr::sharpen(flat) == flat, "sharpen-constant");
    expect(dxr::median_filter(flat, 1) == flat, "median-constant");
    Image ramp(8, 6);
    for (std::size_t r = 0; r < 6; ++r)
      for (std::size_t c = 0; c < 8; ++c) ramp.at(r, c) = static_cast<std::uint8_t>(10 + 3 * c + 5 * r);
    const auto lr = dxr::laplacian(ramp);
    bool interior = true;
    for (std::size_t r = 1; r < 5; ++r)
      for (std::size_t c = 1; c < 7; ++c) interior = interior && lr.at(r, c) == 0;
    expect(interior, "laplacian-ramp");
    Image win(3, 3);
    const std::uint8_t vals[9] = {200, 12, 13, 255, 11, 14, 12, 13, 12};
    std::copy(vals, vals + 9, win.pixels().begin());
    expect(dxr::median_filter(win, 1).at(1, 1) == 13, "median-window");
    Image salt(9, 9, 0);
    salt.at(4, 4) = 255;
    expect(dxr::median_filter(salt, 1) == Image(9, 9, 0), "median-salt");
  }

  // clip invariant on the tile histograms of 100 random images
  bool clip_ok = true;
  std::size_t tiles_checked = 0;
  dxr::Rng rng(404);
  for (int t = 0; t < 100; ++t) {
    const std::size_t w = 16 + rng.uniform_index(100), h = 16 + rng.uniform_index(100);
    Image img(w, h);
    const int lo = static_cast<int>(rng.uniform_index(128)), span = 1 + static_cast<int>(rng.uniform_index(128));
    for (auto& v : img.pixels()) v = static_cast<std::uint8_t>(lo + static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(span))));
    const std::size_t tiles = 1 + rng.uniform_index(8);
    const double cf = 1.0 + 7.0 * rng.uniform01();
    for (std::size_t ty = 0; ty < tiles; ++ty)
      for (std::size_t tx = 0; tx < tiles; ++tx) {
        const auto rs = dxr::tile_span(h, tiles, ty), cs = dxr::tile_span(w, tiles, tx);
        dxr::Histogram hist{};
        for (std::size_t r = rs.begin; r < rs.end; ++r)
          for (std::size_t c = cs.begin; c < cs.end; ++c) hist[img.at(r, c)] += dxr::kClaheCountScale;
        const std::size_t pixels = (rs.end - rs.begin) * (cs.end - cs.begin);
        const std::uint64_t before = std::accumulate(hist.begin(), hist.end(), std::uint64_t{0});
        const auto limit = dxr::clahe_clip_limit(pixels, cf);
        const auto excess = dxr::clip_histogram(hist, limit);
        const std::uint64_t after = std::accumulate(hist.begin(), hist.end(), std::uint64_t{0});
        const std::uint32_t share = excess / 256 + (excess % 256 ? 1 : 0);
        const auto top = *std::max_element(hist.begin(), hist.end());
        clip_ok = clip_ok && before == after && top <= limit + share;
        ++tiles_checked;
      }
  }

  const int wins = psnr_wins(64, 100);
  verdict(4, fixtures && clip_ok && wins >= 95,
          std::string("fixtures ") + (fixtures ? "exact" : "FAILED:" + failed) + "; clip invariant on " +
              std::to_string(tiles_checked) + " tiles of 100 images " + (clip_ok ? "holds" : "VIOLATED") +
              "; PSNR improved in " + std::to_string(wins) + "/100 trials (64x64, 5% impulse)");
  info(4, "PSNR improved in " + std::to_string(psnr_wins(32, 100)) + "/100 at 32x32 and " +
              std::to_string(psnr_wins(128, 100)) + "/100 at 128x128 (same chain, default parameters)");
}

// ---------------------------------------------------------------- 5, 6

struct EvalSummary {
  bool ok = false;
  double accuracy = 0.0, weighted_accuracy = 0.0, macro_auc = 0.0, recall5 = 0.0;
};

EvalSummary read_eval(const fs::path& json_path) {
  EvalSummary s;
  std::ifstream in(json_path);
  if (!in) return s;
  const auto j = nlohmann::json::parse(in);
  const auto rep = dxr::report_from_json(j);
  s.ok = true;
  s.accuracy = rep.accuracy;
  s.weighted_accuracy = rep.weighted_sensitivity;
  s.macro_auc = rep.macro_auc;
  s.recall5 = rep.classes.size() > 5 ? rep.classes[5].sensitivity : std::nan("");
  return s;
}

void criteria_pipeline(const fs::path& work) {
  const auto data = work / "data";
  const auto t0 = Clock::now();
  bool ran = cli({"synth", "--seed", "42", "--out-dir", data.string()});
  ran = ran && cli({"train", "--seed", "42", "--manifest", (data / "train.csv").string(), "--out-dir",
                    (work / "weighted").string()});
  ran = ran && cli({"eval", "--model", (work / "weighted" / "model.ckpt").string(), "--manifest",
                    (data / "test.csv").string(), "--out-dir", (work / "weighted_eval").string()});
  const double secs = seconds_since(t0);
  const auto weighted = ran ? read_eval(work / "weighted_eval" / "eval.json") : EvalSummary{};
  std::size_t test_size = 0;
  if (ran) test_size = dxr::read_manifest(data / "test.csv").size();
  verdict(5, weighted.ok && weighted.macro_auc >= 0.90 && weighted.weighted_accuracy >= 0.85 && secs < 600.0,
          "default dataset (scale 0.2, seed 42), held-out " + std::to_string(test_size) + " images: macro AUC " +
              fmt("%.4f", weighted.macro_auc) + ", weighted accuracy " + fmt("%.4f", weighted.weighted_accuracy) +
              " (plain accuracy " + fmt("%.4f", weighted.accuracy) + "), synth+train+eval " + fmt("%.1f s", secs));

  bool uniform_ran = cli({"train", "--seed", "42", "--uniform-loss", "--manifest", (data / "train.csv").string(),
                          "--out-dir", (work / "uniform").string()});
  uniform_ran = uniform_ran && cli({"eval", "--model", (work / "uniform" / "model.ckpt").string(), "--manifest",
                                    (data / "test.csv").string(), "--out-dir", (work / "uniform_eval").string()});
  const auto uniform = uniform_ran ? read_eval(work / "uniform_eval" / "eval.json") : EvalSummary{};
  {
    std::ofstream rep(work / "imbalance_report.csv");
    rep << "loss,class5_recall,accuracy,macro_auc\n";
    rep << "weighted," << fmt("%.4f", weighted.recall5) << "," << fmt("%.4f", weighted.accuracy) << ","
        << fmt("%.4f", weighted.macro_auc) << "\n";
    rep << "uniform," << fmt("%.4f", uniform.recall5) << "," << fmt("%.4f", uniform.accuracy) << ","
        << fmt("%.4f", uniform.macro_auc) << "\n";
  }
  verdict(6, weighted.ok && uniform.ok && std::isfinite(weighted.recall5) && std::isfinite(uniform.recall5),
          "class-5 recall on the held-out split, seed 42: weighted " + fmt("%.4f", weighted.recall5) + " vs uniform " +
              fmt("%.4f", uniform.recall5) + " (both from eval.json confusion matrices; " +
              (work / "imbalance_report.csv").string() + ")");
}

// ---------------------------------------------------------------- 7

void criterion_orientation(const fs::path& work) {
  const auto data = work / "data";
  const auto t0 = Clock::now();
  const bool ran = cli({"orient-train", "--seed", "42", "--epochs", "10", "--manifest", (data / "train.csv").string(),
                        "--out-dir", (work / "orient").string()});
  if (!ran) {
    verdict(7, false, "orient-train failed");
    return;
  }
  const auto model = dxr::nn::load_checkpoint(work / "orient" / "orient.ckpt").model();
  const auto test = dxr::read_manifest(data / "test.csv");
  std::size_t correct = 0, total = 0, identity_checked = 0;
  bool identity = true;
  for (std::size_t i = 0; i < test.size(); ++i) {
    const auto img = test.load(i);
    for (int k = 0; k < 4; ++k) {
      const auto turned = dxr::rotate(img, dxr::Rotation(k));
      const auto c = dxr::correct_orientation(model, turned);
      ++total;
      if (c.detected == dxr::Rotation(k)) {
        ++correct;
        ++identity_checked;
        identity = identity && c.image == img;
      }
    }
  }
  const double acc = total ? static_cast<double>(correct) / static_cast<double>(total) : 0.0;
  verdict(7, acc >= 0.95 && identity && identity_checked > 0,
          "quarter-turn accuracy " + fmt("%.4f", acc) + " on " + std::to_string(total) +
              " held-out (image, turn) pairs; corrected == original on all " + std::to_string(identity_checked) +
              " correct detections: " + (identity ? "yes" : "NO") + "; " + fmt("%.1f s", seconds_since(t0)));
}

// ---------------------------------------------------------------- 8

// Reruns synth, train and eval with the seed used for criterion 5.
void criterion_determinism(const fs::path& work) {
  const auto data = work / "data";
  const auto data2 = work / "data_rerun";
  const bool ran = fs::exists(work / "weighted" / "model.ckpt") && fs::exists(work / "weighted_eval" / "eval.json");
  bool rerun = cli({"synth", "--seed", "42", "--out-dir", data2.string()});
  rerun = rerun && cli({"train", "--seed", "42", "--manifest", (data / "train.csv").string(), "--out-dir",
                        (work / "weighted_rerun").string()});
  rerun = rerun && cli({"eval", "--model", (work / "weighted_rerun" / "model.ckpt").string(), "--manifest",
                        (data / "test.csv").string(), "--out-dir", (work / "weighted_eval_rerun").string()});
  const bool same_data = rerun && tree(data) == tree(data2);
  const bool same_ckpt = rerun && slurp(work / "weighted" / "model.ckpt") == slurp(work / "weighted_rerun" / "model.ckpt") &&
                         slurp(work / "weighted" / "train_log.csv") == slurp(work / "weighted_rerun" / "train_log.csv");
  const bool same_eval = rerun && tree(work / "weighted_eval") == tree(work / "weighted_eval_rerun");
  verdict(8, ran && same_data && same_ckpt && same_eval,
          std::string("same-seed rerun: dataset tree ") + (same_data ? "identical" : "DIFFERS") + ", checkpoint+log " +
              (same_ckpt ? "identical" : "DIFFER") + ", eval reports " + (same_eval ? "identical" : "DIFFER"));
}

// ---------------------------------------------------------------- 9

void criterion_kmeans() {
  dxr::Rng rng(909);
  bool monotone = true;
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = 10 + rng.uniform_index(200);
    std::vector<dxr::Point> pts;
    for (std::size_t i = 0; i < n; ++i) pts.push_back(dxr::hash_to_vector(dxr::PHash{rng.next_u64()}));
    const std::size_t k = 2 + rng.uniform_index(9);
    const auto r = dxr::kmeans(pts, k, static_cast<std::uint64_t>(t));
    for (std::size_t i = 1; i < r.inertia_history.size(); ++i)
      monotone = monotone && r.inertia_history[i] <= r.inertia_history[i - 1];
  }
  // two groups of hashes around complementary centres
  std::vector<dxr::Point> pts;
  std::vector<int> truth;
  const std::uint64_t centre = 0x0f0f0f0f0f0f0f0fULL;
  for (int i = 0; i < 60; ++i) {
    std::uint64_t h = i % 2 ? ~centre : centre;
    h ^= 1ULL << rng.uniform_index(64);
    pts.push_back(dxr::hash_to_vector(dxr::PHash{h}));
    truth.push_back(i % 2);
  }
  bool recovered = true;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto r = dxr::kmeans(pts, 2, seed);
    const std::size_t a0 = r.assignments[0];
    for (std::size_t i = 0; i < pts.size(); ++i)
      recovered = recovered && ((r.assignments[i] == a0) == (truth[i] == truth[0]));
  }
  verdict(9, monotone && recovered,
          std::string("inertia non-increasing on 100 random hash sets: ") + (monotone ? "yes" : "NO") +
              "; two separated clusters recovered exactly for 20 seeds: " + (recovered ? "yes" : "NO"));
}

// ---------------------------------------------------------------- 10

void criterion_table(const fs::path& work) {
  const auto dir = work / "table";
  fs::create_directories(dir);
  std::ofstream(dir / "model.json")
      << R"({"num_classes": 6, "accuracy": 0.87, "balanced_precision": 0.88, "weighted": {"specificity": 0.87}})";
  std::ofstream(dir / "doctors.json")
      << R"({"num_classes": 6, "accuracy": 0.85, "balanced_precision": 0.87, "weighted": {"specificity": 0.85}})";
  const bool ran = cli({"report", (dir / "model.json").string(), "--annotator", (dir / "doctors.json").string(),
                        "--out-dir", dir.string()});
  const std::string got = ran ? slurp(dir / "comparison.csv") : "";
  const std::string want =
      "Models,Accuracy,Balance_precision,Specificity\n"
      "Doctors,0.85,0.87,0.85\n"
      "Muti-CNN,0.87,0.88,0.87\n";
  std::string shown = got;
  std::replace(shown.begin(), shown.end(), '\n', '|');
  verdict(10, got == want, "comparison rows: " + shown);
}

}  // namespace

int main(int argc, char** argv) {
  const fs::path work = argc > 1 ? fs::path(argv[1]) : fs::temp_directory_path() / "dxr_acceptance";
  fs::remove_all(work);
  fs::create_directories(work);
  const auto t0 = Clock::now();
  try {
    criterion_gradients();
    criterion_loss();
    criterion_auc();
    criterion_enhance();
    criteria_pipeline(work);
    criterion_orientation(work);
    criterion_determinism(work);
    criterion_kmeans();
    criterion_table(work);
  } catch (const std::exception& e) {
    std::printf("FAIL acceptance aborted: %s\n", e.what());
    return 1;
  }
  std::printf("acceptance: %d failing criteria, %.1f s total\n", g_failures, seconds_since(t0));
  return g_failures == 0 ? 0 : 1;
}
