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
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dxr/image.hpp"

namespace dxr {

inline constexpr int kNumRegionClasses = 6;

/// One region category and how many images of it to produce.
struct ClassSpec {
  int class_id = 0;
  std::string description;
  std::size_t target_count = 0;
};

/// The six region categories with their clinical counts (541, 632, 513, 523,
/// 242, 75) multiplied by `scale` and rounded half away from zero.
std::vector<ClassSpec> region_profile(double scale = 1.0);

struct SynthParams {
  std::size_t image_size = 32;
  double noise_impulse_prob = 0.01;
  std::size_t blob_min = 2;
  std::size_t blob_max = 4;
  std::uint64_t rng_seed = 42;

  void validate() const;
};

struct ManifestEntry {
  std::string path;  // relative to DatasetManifest::root unless absolute
  int class_id = 0;
  Rotation rotation;

  friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

/// Labelled image list. On disk it is a CSV with header `path,class_id,rotation`,
/// preceded by a `# seed=<n>` comment line.
struct DatasetManifest {
  std::vector<ManifestEntry> entries;
  std::uint64_t seed = 0;
  std::filesystem::path root;

  std::size_t size() const noexcept { return entries.size(); }
  std::vector<std::size_t> class_counts(int num_classes = kNumRegionClasses) const;
  std::filesystem::path resolve(const ManifestEntry& e) const;
  Image load(std::size_t index) const;
};

/// Canonical-pose synthetic radiograph. Bright tapered "teeth" with a
/// brighter crown facing the occlusal midline sit in the region that encodes
/// the class: upper-left (0), upper-right (1), lower-left (2), lower-right (3),
/// upper-centre crossing (4), lower-centre crossing (5). A small film marker
/// dot in the top-left corner fixes the orientation. Noise-free pixels stay
/// in [1, 254]; impulses are exactly 0 or 255.
Image generate_image(int class_id, const SynthParams& p, std::uint64_t seed);

/// Renders every requested image into `out_dir` (flat) and writes
/// `out_dir/manifest.csv`. Image i gets seed derive_seed(p.rng_seed, i).
DatasetManifest generate_dataset(std::span<const ClassSpec> specs, const SynthParams& p,
                                 const std::filesystem::path& out_dir);

void write_manifest(const DatasetManifest& m, const std::filesystem::path& csv);
DatasetManifest read_manifest(const std::filesystem::path& csv);

/// Adds a histogram-equalized copy of every image of the listed classes,
/// written next to its source as `<stem>_he.pgm`.
DatasetManifest amplify_minority(const DatasetManifest& m, std::span<const int> class_ids);

/// Per-class split. Each class with at least two members contributes at
/// least one entry to both sides. Returns (kept, held_out).
std::pair<DatasetManifest, DatasetManifest> stratified_split(const DatasetManifest& m, double held_fraction,
                                                             std::uint64_t seed, int num_classes = kNumRegionClasses);

}  // namespace dxr
