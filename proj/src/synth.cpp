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


#include "dxr/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "dxr/enhance.hpp"
#include "dxr/error.hpp"
#include "dxr/pgm.hpp"
#include "dxr/rng.hpp"

namespace fs = std::filesystem;

namespace dxr {

std::vector<ClassSpec> region_profile(double scale) {
  if (!(scale >= 0.0)) throw InvalidArgument("region_profile: scale must be >= 0");
  static const std::pair<const char*, std::size_t> kTable[kNumRegionClasses] = {
      {"only teeth 11-19", 541},
      {"only teeth 21-29", 632},
      {"only teeth 31-39", 513},
      {"only teeth 41-49", 523},
      {"crossing of classes 0 and 1", 242},
      {"crossing of classes 2 and 3", 75},
  };
  std::vector<ClassSpec> specs;
  for (int c = 0; c < kNumRegionClasses; ++c) {
    const auto n = static_cast<std::size_t>(std::llround(static_cast<double>(kTable[c].second) * scale));
    specs.push_back({c, kTable[c].first, n});
  }
  return specs;
}

void SynthParams::validate() const {
  if (image_size < 16) throw InvalidArgument("synth: image_size must be >= 16");
  if (!(noise_impulse_prob >= 0.0 && noise_impulse_prob <= 1.0))
    throw InvalidArgument("synth: noise_impulse_prob must be in [0,1]");
  if (blob_min == 0 || blob_min > blob_max) throw InvalidArgument("synth: need 1 <= blob_min <= blob_max");
}

std::vector<std::size_t> DatasetManifest::class_counts(int num_classes) const {
  std::vector<std::size_t> counts(static_cast<std::size_t>(num_classes), 0);
  for (const auto& e : entries) {
    if (e.class_id < 0 || e.class_id >= num_classes) throw InvalidArgument("manifest: class id out of range");
    ++counts[static_cast<std::size_t>(e.class_id)];
  }
  return counts;
}

fs::path DatasetManifest::resolve(const ManifestEntry& e) const {
  const fs::path p(e.path);
  return p.is_absolute() ? p : root / p;
}

Image DatasetManifest::load(std::size_t index) const { return load_pgm(resolve(entries.at(index))); }

namespace {

struct Tooth {
  double root_x, root_y;    // root end of the axis
  double crown_x, crown_y;  // crown end, facing the occlusal line
  double half_width;
  double amplitude;
  double crown_boost;
};

// Horizontal centre of the tooth group, as a fraction of the image width.
double region_center(int class_id) {
  switch (class_id) {
    case 0:
    case 2:
      return 0.27;
    case 1:
    case 3:
      return 0.73;
    default:
      return 0.5;
  }
}

bool is_upper(int class_id) { return class_id == 0 || class_id == 1 || class_id == 4; }

}  // namespace

Image generate_image(int class_id, const SynthParams& p, std::uint64_t seed) {
  if (class_id < 0 || class_id >= kNumRegionClasses)
    throw InvalidArgument("generate_image: class id must be in 0..5, got " + std::to_string(class_id));
  p.validate();
  Rng rng(derive_seed(seed, static_cast<std::uint64_t>(class_id)));
  const double s = static_cast<double>(p.image_size);

  const double base = rng.uniform(22.0, 40.0);
  const double occlusal = s * (0.5 + rng.uniform(-0.03, 0.03));
  const double gap = 0.03 * s;
  const double cx = s * (region_center(class_id) + rng.uniform(-0.04, 0.04));
  const std::size_t count = p.blob_min + rng.uniform_index(p.blob_max - p.blob_min + 1);
  const double spacing = 0.12 * s;
  const bool upper = is_upper(class_id);

  std::vector<Tooth> teeth;
  for (std::size_t i = 0; i < count; ++i) {
    const double x = cx + (static_cast<double>(i) - 0.5 * static_cast<double>(count - 1)) * spacing +
                     rng.uniform(-0.01, 0.01) * s;
    const double length = s * rng.uniform(0.30, 0.36);
    const double tilt = rng.uniform(-0.08, 0.08);
    const double crown_y = upper ? occlusal - gap : occlusal + gap;
    const double dir = upper ? -1.0 : 1.0;  // from crown towards root
    Tooth t;
    t.crown_x = x;
    t.crown_y = crown_y;
    t.root_x = x + std::sin(tilt) * length;
    t.root_y = crown_y + dir * std::cos(tilt) * length;
    t.half_width = s * rng.uniform(0.045, 0.06);
    t.amplitude = rng.uniform(150.0, 190.0) - base;
    t.crown_boost = rng.uniform(35.0, 50.0);
    teeth.push_back(t);
  }

  const std::size_t n = p.image_size;
  std::vector<double> canvas(n * n);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) {
      const double py = static_cast<double>(r) + 0.5;
      const double px = static_cast<double>(c) + 0.5;
      double value = base + 6.0 * py / s;
      for (const Tooth& t : teeth) {
        const double ax = t.crown_x - t.root_x;
        const double ay = t.crown_y - t.root_y;
        const double len2 = ax * ax + ay * ay;
        // u: 0 at the root apex, 1 at the crown edge
        const double u = ((px - t.root_x) * ax + (py - t.root_y) * ay) / len2;
        if (u < 0.0 || u > 1.0) continue;
        const double perp = std::abs((px - t.root_x) * ay - (py - t.root_y) * ax) / std::sqrt(len2);
        const double hw = t.half_width * (0.55 + 0.45 * u);
        if (perp >= hw) continue;
        const double q = perp / hw;
        const double profile = std::sqrt(1.0 - q * q);
        const double crown = u > 0.7 ? t.crown_boost : 0.0;
        value = std::max(value, base + (t.amplitude + crown) * profile);
      }
      canvas[r * n + c] = value;
    }
  }

  // film identification dot
  const std::size_t dot = std::max<std::size_t>(2, n / 16);
  const std::size_t off = std::max<std::size_t>(1, n / 32);
  for (std::size_t r = off; r < off + dot; ++r)
    for (std::size_t c = off; c < off + dot; ++c) canvas[r * n + c] = 225.0;

  Image img(n, n);
  for (std::size_t i = 0; i < n * n; ++i) {
    const double v = canvas[i] + 5.0 * rng.normal();
    img.pixels()[i] = static_cast<std::uint8_t>(std::clamp(std::lround(v), 1L, 254L));
  }
  if (p.noise_impulse_prob > 0.0) {
    for (auto& px : img.pixels())
      if (rng.bernoulli(p.noise_impulse_prob)) px = rng.bernoulli(0.5) ? 255 : 0;
  }
  return img;
}

DatasetManifest generate_dataset(std::span<const ClassSpec> specs, const SynthParams& p, const fs::path& out_dir) {
  if (specs.empty()) throw InvalidArgument("generate_dataset: no class specs");
  p.validate();
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());

  DatasetManifest m;
  m.seed = p.rng_seed;
  m.root = out_dir;
  std::vector<std::pair<int, std::uint64_t>> jobs;
  for (const auto& spec : specs) {
    if (spec.class_id < 0 || spec.class_id >= kNumRegionClasses)
      throw InvalidArgument("generate_dataset: class id out of range");
    for (std::size_t i = 0; i < spec.target_count; ++i) {
      const std::uint64_t index = jobs.size();
      jobs.emplace_back(spec.class_id, index);
      char name[64];
      std::snprintf(name, sizeof name, "img_%05llu_c%d.pgm", static_cast<unsigned long long>(index), spec.class_id);
      m.entries.push_back({name, spec.class_id, Rotation(0)});
    }
  }

  const auto njobs = static_cast<std::ptrdiff_t>(jobs.size());
  std::vector<std::string> failures(jobs.size());
#pragma omp parallel for schedule(dynamic, 8)
  for (std::ptrdiff_t j = 0; j < njobs; ++j) {
    try {
      const auto& [class_id, index] = jobs[j];
      save_pgm(generate_image(class_id, p, derive_seed(p.rng_seed, index)), m.resolve(m.entries[j]));
    } catch (const std::exception& e) {
      failures[j] = e.what();
    }
  }
  for (const auto& f : failures)
    if (!f.empty()) throw IoError("generate_dataset: " + f);

  write_manifest(m, out_dir / "manifest.csv");
  return m;
}

void write_manifest(const DatasetManifest& m, const fs::path& csv) {
  std::ostringstream out;
  out << "# seed=" << m.seed << "\n";
  out << "path,class_id,rotation\n";
  for (const auto& e : m.entries) {
    if (e.path.find_first_of(",\n\r") != std::string::npos)
      throw InvalidArgument("manifest: path contains a separator: " + e.path);
    out << e.path << ',' << e.class_id << ',' << e.rotation.quarter_turns() << '\n';
  }
  const std::string text = out.str();
  write_file_bytes(csv, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

DatasetManifest read_manifest(const fs::path& csv) {
  std::ifstream in(csv);
  if (!in) throw IoError("cannot open manifest " + csv.string());
  DatasetManifest m;
  m.root = csv.parent_path();
  std::string line;
  bool header_seen = false;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (line.rfind("# seed=", 0) == 0) m.seed = std::stoull(line.substr(7));
      continue;
    }
    if (!header_seen) {
      if (line != "path,class_id,rotation")
        throw FormatError(FormatError::Kind::kMalformedHeader, csv.string() + ": unexpected manifest header");
      header_seen = true;
      continue;
    }
    std::istringstream fields(line);
    std::string path, cls, rot;
    if (!std::getline(fields, path, ',') || !std::getline(fields, cls, ',') || !std::getline(fields, rot)) {
      throw FormatError(FormatError::Kind::kMalformedHeader,
                        csv.string() + ":" + std::to_string(lineno) + ": expected 3 fields");
    }
    try {
      const int class_id = std::stoi(cls);
      const int turns = std::stoi(rot);
      if (turns < 0 || turns > 3) throw InvalidArgument("rotation out of range");
      if (class_id < 0 || class_id >= kNumRegionClasses) throw InvalidArgument("class id out of range");
      m.entries.push_back({path, class_id, Rotation(turns)});
    } catch (const std::exception&) {
      throw FormatError(FormatError::Kind::kMalformedHeader,
                        csv.string() + ":" + std::to_string(lineno) + ": bad class_id or rotation");
    }
  }
  if (!header_seen) throw FormatError(FormatError::Kind::kMalformedHeader, csv.string() + ": missing header");
  return m;
}

DatasetManifest amplify_minority(const DatasetManifest& m, std::span<const int> class_ids) {
  DatasetManifest out = m;
  for (const auto& e : m.entries) {
    if (std::find(class_ids.begin(), class_ids.end(), e.class_id) == class_ids.end()) continue;
    const fs::path src = m.resolve(e);
    if (!fs::exists(src)) throw IoError("amplify_minority: missing source image " + src.string());
    const fs::path rel(e.path);
    const fs::path added = rel.parent_path() / (rel.stem().string() + "_he.pgm");
    save_pgm(hist_equalize(load_pgm(src)), m.resolve({added.string(), e.class_id, e.rotation}));
    out.entries.push_back({added.string(), e.class_id, e.rotation});
  }
  return out;
}

std::pair<DatasetManifest, DatasetManifest> stratified_split(const DatasetManifest& m, double held_fraction,
                                                             std::uint64_t seed, int num_classes) {
  if (!(held_fraction > 0.0 && held_fraction < 1.0))
    throw InvalidArgument("stratified_split: fraction must be in (0,1)");
  std::vector<std::vector<std::size_t>> members(static_cast<std::size_t>(num_classes));
  for (std::size_t i = 0; i < m.entries.size(); ++i) {
    const int c = m.entries[i].class_id;
    if (c < 0 || c >= num_classes) throw InvalidArgument("stratified_split: class id out of range");
    members[static_cast<std::size_t>(c)].push_back(i);
  }
  std::vector<bool> held(m.entries.size(), false);
  for (int c = 0; c < num_classes; ++c) {
    auto& idx = members[static_cast<std::size_t>(c)];
    const std::size_t n = idx.size();
    if (n < 2) continue;
    auto take = static_cast<std::size_t>(std::llround(static_cast<double>(n) * held_fraction));
    take = std::clamp<std::size_t>(take, 1, n - 1);
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(c)));
    rng.shuffle(idx);
    for (std::size_t k = 0; k < take; ++k) held[idx[k]] = true;
  }
  DatasetManifest kept{{}, m.seed, m.root};
  DatasetManifest out{{}, m.seed, m.root};
  for (std::size_t i = 0; i < m.entries.size(); ++i) (held[i] ? out : kept).entries.push_back(m.entries[i]);
  return {kept, out};
}

}  // namespace dxr
