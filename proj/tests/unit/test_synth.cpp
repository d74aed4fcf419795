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


#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <set>

#include "dxr/enhance.hpp"
#include "dxr/error.hpp"
#include "dxr/pgm.hpp"
#include "dxr/synth.hpp"
#include "helpers.hpp"

namespace fs = std::filesystem;
using dxr::Image;

namespace {

double region_mean(const Image& img, std::size_t r0, std::size_t r1, std::size_t c0, std::size_t c1) {
  double s = 0.0;
  for (std::size_t r = r0; r < r1; ++r)
    for (std::size_t c = c0; c < c1; ++c) s += img.at(r, c);
  return s / static_cast<double>((r1 - r0) * (c1 - c0));
}

std::size_t count_pgm(const fs::path& dir) {
  std::size_t n = 0;
  for (const auto& e : fs::directory_iterator(dir)) n += e.path().extension() == ".pgm" ? 1 : 0;
  return n;
}

}  // namespace

TEST_CASE("region profile keeps the clinical imbalance") {
  const auto full = dxr::region_profile(1.0);
  REQUIRE(full.size() == 6);
  const std::vector<std::size_t> clinical{541, 632, 513, 523, 242, 75};
  std::size_t total = 0;
  for (std::size_t c = 0; c < 6; ++c) {
    CHECK(full[c].class_id == static_cast<int>(c));
    CHECK(full[c].target_count == clinical[c]);
    total += full[c].target_count;
  }
  CHECK(total == 2526);

  const auto small = dxr::region_profile(0.2);
  const std::vector<std::size_t> scaled{108, 126, 103, 105, 48, 15};
  std::size_t n = 0;
  for (std::size_t c = 0; c < 6; ++c) {
    CHECK(small[c].target_count == scaled[c]);
    n += small[c].target_count;
  }
  CHECK(n == 505);
  CHECK(15.0 / 505.0 == doctest::Approx(75.0 / 2526.0).epsilon(0.02));
  CHECK_THROWS_AS(dxr::region_profile(-1.0), dxr::InvalidArgument);
}

TEST_CASE("generate_image is deterministic and validates its inputs") {
  const dxr::SynthParams p;
  CHECK(dxr::generate_image(3, p, 99) == dxr::generate_image(3, p, 99));
  CHECK_FALSE(dxr::generate_image(3, p, 99) == dxr::generate_image(3, p, 100));
  CHECK_THROWS_AS(dxr::generate_image(6, p, 1), dxr::InvalidArgument);
  CHECK_THROWS_AS(dxr::generate_image(-1, p, 1), dxr::InvalidArgument);
  dxr::SynthParams bad;
  bad.image_size = 8;
  CHECK_THROWS_AS(dxr::generate_image(0, bad, 1), dxr::InvalidArgument);
  bad = dxr::SynthParams{};
  bad.noise_impulse_prob = 1.5;
  CHECK_THROWS_AS(dxr::generate_image(0, bad, 1), dxr::InvalidArgument);
}

TEST_CASE("class 0 is brighter in the upper-left quadrant than in the lower half") {
  for (std::size_t size : {32u, 64u}) {
    dxr::SynthParams p;
    p.image_size = size;
    for (std::uint64_t seed = 0; seed < 60; ++seed) {
      const auto img = dxr::generate_image(0, p, seed);
      const std::size_t h = size / 2;
      REQUIRE(region_mean(img, 0, h, 0, h) > region_mean(img, h, size, 0, size));
    }
  }
}

TEST_CASE("every class puts its teeth in its own region") {
  // side: -1 left, +1 right, 0 centred
  const int side_of[6] = {-1, 1, -1, 1, 0, 0};
  dxr::SynthParams p;
  p.image_size = 48;
  p.noise_impulse_prob = 0.0;
  for (int c = 0; c < 6; ++c) {
    const bool upper = c == 0 || c == 1 || c == 4;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const auto img = dxr::generate_image(c, p, seed);
      const double top = region_mean(img, 0, 24, 0, 48);
      const double bottom = region_mean(img, 24, 48, 0, 48);
      REQUIRE((upper ? top > bottom : bottom > top));
      const double left = region_mean(img, 0, 48, 0, 16);
      const double mid = region_mean(img, 0, 48, 16, 32);
      const double right = region_mean(img, 0, 48, 32, 48);
      if (side_of[c] < 0) REQUIRE(left > right);
      if (side_of[c] > 0) REQUIRE(right > left);
      if (side_of[c] == 0) REQUIRE(mid > std::max(left, right));
    }
  }
}

TEST_CASE("without impulse noise no pixel reaches 0 or 255") {
  dxr::SynthParams p;
  p.noise_impulse_prob = 0.0;
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto img = dxr::generate_image(static_cast<int>(seed % 6), p, seed);
    for (auto v : img.pixels()) REQUIRE((v > 0 && v < 255));
  }
  p.noise_impulse_prob = 0.2;
  const auto noisy = dxr::generate_image(1, p, 4);
  CHECK(std::count_if(noisy.pixels().begin(), noisy.pixels().end(), [](auto v) { return v == 0 || v == 255; }) > 0);
}

TEST_CASE("generate_dataset writes the requested counts deterministically") {
  testutil::TempDir a("synth_a"), b("synth_b");
  const auto specs = dxr::region_profile(0.05);
  dxr::SynthParams p;
  p.rng_seed = 7;
  const auto m = dxr::generate_dataset(specs, p, a.path());
  const auto counts = m.class_counts();
  std::size_t total = 0;
  for (std::size_t c = 0; c < 6; ++c) {
    CHECK(counts[c] == specs[c].target_count);
    total += counts[c];
  }
  CHECK(m.size() == total);
  CHECK(count_pgm(a.path()) == total);
  CHECK(m.seed == 7);

  std::set<std::string> paths;
  for (const auto& e : m.entries) paths.insert(e.path);
  CHECK(paths.size() == m.size());

  dxr::generate_dataset(specs, p, b.path());
  CHECK(dxr::read_file_bytes(a.path() / "manifest.csv") == dxr::read_file_bytes(b.path() / "manifest.csv"));
  for (const auto& e : m.entries) REQUIRE(dxr::read_file_bytes(a.path() / e.path) == dxr::read_file_bytes(b.path() / e.path));

  const auto again = dxr::read_manifest(a.path() / "manifest.csv");
  CHECK(again.entries == m.entries);
  CHECK(again.seed == 7);
  CHECK(again.load(0) == m.load(0));
}

TEST_CASE("a zero target count leaves the class out") {
  testutil::TempDir dir("synth_zero");
  std::vector<dxr::ClassSpec> specs{{0, "a", 3}, {1, "b", 0}, {5, "c", 2}};
  const auto m = dxr::generate_dataset(specs, dxr::SynthParams{}, dir.path());
  const auto counts = m.class_counts();
  CHECK(counts[0] == 3);
  CHECK(counts[1] == 0);
  CHECK(counts[5] == 2);
  CHECK_THROWS_AS(dxr::generate_dataset({}, dxr::SynthParams{}, dir.path()), dxr::InvalidArgument);
}

TEST_CASE("manifest parsing errors") {
  testutil::TempDir dir("manifest");
  const auto path = dir.path() / "m.csv";
  {
    std::ofstream(path) << "file,label\nx.pgm,1\n";
  }
  CHECK_THROWS_AS(dxr::read_manifest(path), dxr::FormatError);
  {
    std::ofstream(path) << "path,class_id,rotation\nx.pgm,9,0\n";
  }
  CHECK_THROWS_AS(dxr::read_manifest(path), dxr::Error);
  CHECK_THROWS_AS(dxr::read_manifest(dir.path() / "none.csv"), dxr::IoError);
}

TEST_CASE("amplify_minority doubles the listed classes with equalized copies") {
  testutil::TempDir dir("amplify");
  std::vector<dxr::ClassSpec> specs{{0, "a", 4}, {4, "b", 3}, {5, "c", 15}};
  const auto m = dxr::generate_dataset(specs, dxr::SynthParams{}, dir.path());
  const std::vector<int> ids{4, 5};
  const auto amp = dxr::amplify_minority(m, ids);
  const auto before = m.class_counts();
  const auto after = amp.class_counts();
  CHECK(after[0] == before[0]);
  CHECK(after[4] == 6);
  CHECK(after[5] == 30);
  for (std::size_t i = m.size(); i < amp.size(); ++i) {
    const auto& added = amp.entries[i];
    CHECK(added.path.find("_he.pgm") != std::string::npos);
    const auto src_path = added.path.substr(0, added.path.size() - 7) + ".pgm";
    const auto src = std::find_if(m.entries.begin(), m.entries.end(), [&](const auto& e) { return e.path == src_path; });
    REQUIRE(src != m.entries.end());
    CHECK(src->class_id == added.class_id);
    CHECK(amp.load(i) == dxr::hist_equalize(m.load(static_cast<std::size_t>(src - m.entries.begin()))));
  }
  const std::vector<int> empty_class{2};
  CHECK(dxr::amplify_minority(m, empty_class).entries == m.entries);

  fs::remove(dir.path() / m.entries[0].path);
  const std::vector<int> zero{0};
  CHECK_THROWS_AS(dxr::amplify_minority(m, zero), dxr::IoError);
}

TEST_CASE("stratified_split keeps every class with two or more members on both sides") {
  dxr::DatasetManifest m;
  const std::vector<std::size_t> counts{108, 126, 103, 105, 48, 2};
  for (int c = 0; c < 6; ++c)
    for (std::size_t i = 0; i < counts[static_cast<std::size_t>(c)]; ++i)
      m.entries.push_back({"c" + std::to_string(c) + "_" + std::to_string(i) + ".pgm", c, dxr::Rotation()});
  for (double frac : {0.01, 0.15, 0.5, 0.95}) {
    const auto [kept, held] = dxr::stratified_split(m, frac, 3);
    CHECK(kept.size() + held.size() == m.size());
    const auto kc = kept.class_counts();
    const auto hc = held.class_counts();
    for (std::size_t c = 0; c < 6; ++c) {
      CHECK(kc[c] >= 1);
      CHECK(hc[c] >= 1);
      CHECK(kc[c] + hc[c] == counts[c]);
    }
    std::set<std::string> seen;
    for (const auto& e : kept.entries) seen.insert(e.path);
    for (const auto& e : held.entries) CHECK(seen.insert(e.path).second);
  }
  const auto [k1, h1] = dxr::stratified_split(m, 0.2, 3);
  const auto [k2, h2] = dxr::stratified_split(m, 0.2, 3);
  CHECK(h1.entries == h2.entries);
  CHECK(h1.class_counts()[0] == 22);  // round(108 * 0.2)
  CHECK_THROWS_AS(dxr::stratified_split(m, 0.0, 3), dxr::InvalidArgument);
}
