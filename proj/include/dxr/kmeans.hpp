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
#include <vector>

#include "dxr/phash.hpp"
#include "dxr/synth.hpp"

namespace dxr {

using Point = std::vector<double>;

struct ClusterResult {
  std::vector<std::size_t> assignments;
  std::vector<Point> centroids;
  double inertia = 0.0;
  /// Inertia after every assignment step, first entry from the seeding.
  std::vector<double> inertia_history;
  std::size_t iterations = 0;
};

/// Lloyd's algorithm with k-means++ seeding.
///
/// Nearest-centroid ties go to the lowest centroid index. A centroid left
/// without members is moved onto the point farthest from its own centroid.
/// Stops once an assignment step changes nothing or after `max_iter`
/// updates. All sums run in point order in double precision, so the result
/// does not depend on the number of threads used for the assignment step.
ClusterResult kmeans(std::span<const Point> points, std::size_t k, std::uint64_t seed, std::size_t max_iter = 100);

/// Sum of squared distances of every point to its assigned centroid.
double inertia_of(std::span<const Point> points, std::span<const Point> centroids,
                  std::span<const std::size_t> assignments);

struct ClusterRow {
  std::string path;
  int class_id = 0;
  std::size_t cluster = 0;
  PHash hash;
};

struct ClusterReport {
  std::vector<ClusterRow> rows;
  /// k rows x kNumRegionClasses columns.
  std::vector<std::vector<std::size_t>> contingency;
  ClusterResult clustering;

  /// Writes `clusters.csv` (path,class_id,cluster,hash) and
  /// `contingency.csv` (cluster,class_0..class_5,total) into `dir`.
  void write(const std::filesystem::path& dir) const;
};

ClusterReport cluster_report(const DatasetManifest& m, std::size_t k, std::uint64_t seed, std::size_t max_iter = 100);

}  // namespace dxr
