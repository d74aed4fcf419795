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


#include "dxr/kmeans.hpp"

#include <fstream>
#include <limits>

#include "dxr/error.hpp"
#include "dxr/rng.hpp"

namespace dxr {

namespace {

double sq_dist(const Point& a, const Point& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
}

std::vector<Point> seed_plus_plus(std::span<const Point> points, std::size_t k, Rng& rng) {
  const std::size_t n = points.size();
  std::vector<Point> centers;
  centers.push_back(points[rng.uniform_index(n)]);
  std::vector<double> d2(n);
  for (std::size_t i = 0; i < n; ++i) d2[i] = sq_dist(points[i], centers[0]);
  while (centers.size() < k) {
    double total = 0.0;
    for (const double d : d2) total += d;
    std::size_t pick = n - 1;
    if (total > 0.0) {
      const double target = rng.uniform01() * total;
      double run = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        run += d2[i];
        if (d2[i] > 0.0 && run > target) {
          pick = i;
          break;
        }
      }
      while (d2[pick] == 0.0) --pick;  // only reachable through rounding at the tail
    } else {
      pick = rng.uniform_index(n);
    }
    centers.push_back(points[pick]);
    for (std::size_t i = 0; i < n; ++i) d2[i] = std::min(d2[i], sq_dist(points[i], centers.back()));
  }
  return centers;
}

// Returns the number of changed assignments.
std::size_t assign(std::span<const Point> points, std::span<const Point> centroids, std::vector<std::size_t>& labels,
                   std::vector<double>& dist) {
  const auto n = static_cast<std::ptrdiff_t>(points.size());
  std::size_t changed = 0;
#pragma omp parallel for schedule(static) reduction(+ : changed)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < centroids.size(); ++c) {
      const double d = sq_dist(points[i], centroids[c]);
      if (d < best_d) {
        best_d = d;
        best = c;
      }
    }
    if (labels[i] != best) ++changed;
    labels[i] = best;
    dist[i] = best_d;
  }
  return changed;
}

}  // namespace

double inertia_of(std::span<const Point> points, std::span<const Point> centroids,
                  std::span<const std::size_t> assignments) {
  double total = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) total += sq_dist(points[i], centroids[assignments[i]]);
  return total;
}

ClusterResult kmeans(std::span<const Point> points, std::size_t k, std::uint64_t seed, std::size_t max_iter) {
  if (points.empty()) throw InvalidArgument("kmeans: empty input");
  if (k == 0) throw InvalidArgument("kmeans: k must be >= 1");
  if (k > points.size()) throw InvalidArgument("kmeans: k exceeds the number of points");
  const std::size_t dim = points[0].size();
  for (const auto& p : points)
    if (p.size() != dim) throw InvalidArgument("kmeans: points differ in dimension");

  Rng rng(seed);
  ClusterResult res;
  res.centroids = seed_plus_plus(points, k, rng);
  const std::size_t n = points.size();
  res.assignments.assign(n, std::numeric_limits<std::size_t>::max());
  std::vector<double> dist(n);

  auto sum = [&] {
    double t = 0.0;
    for (const double d : dist) t += d;
    return t;
  };

  assign(points, res.centroids, res.assignments, dist);
  res.inertia_history.push_back(sum());

  for (std::size_t it = 0; it < max_iter; ++it) {
    std::vector<Point> sums(k, Point(dim, 0.0));
    std::vector<std::size_t> sizes(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t c = res.assignments[i];
      ++sizes[c];
      for (std::size_t d = 0; d < dim; ++d) sums[c][d] += points[i][d];
    }
    std::vector<bool> taken(n, false);
    for (std::size_t c = 0; c < k; ++c) {
      if (sizes[c] > 0) {
        for (std::size_t d = 0; d < dim; ++d) res.centroids[c][d] = sums[c][d] / static_cast<double>(sizes[c]);
        continue;
      }
      std::size_t far = 0;
      double far_d = -1.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (!taken[i] && dist[i] > far_d) {
          far_d = dist[i];
          far = i;
        }
      }
      taken[far] = true;
      res.centroids[c] = points[far];
    }

    const std::size_t changed = assign(points, res.centroids, res.assignments, dist);
    res.inertia_history.push_back(sum());
    ++res.iterations;
    if (changed == 0) break;
  }
  res.inertia = res.inertia_history.back();
  return res;
}

ClusterReport cluster_report(const DatasetManifest& m, std::size_t k, std::uint64_t seed, std::size_t max_iter) {
  std::vector<Image> images(m.size());
  const auto n = static_cast<std::ptrdiff_t>(m.size());
  std::vector<std::string> failures(m.size());
#pragma omp parallel for schedule(dynamic, 8)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      images[i] = m.load(static_cast<std::size_t>(i));
    } catch (const std::exception& e) {
      failures[i] = e.what();
    }
  }
  for (const auto& f : failures)
    if (!f.empty()) throw IoError("cluster_report: " + f);

  const std::vector<PHash> hashes = phash_all(images);
  std::vector<Point> points;
  points.reserve(hashes.size());
  for (const auto h : hashes) points.push_back(hash_to_vector(h));

  ClusterReport rep;
  rep.clustering = kmeans(points, k, seed, max_iter);
  rep.contingency.assign(k, std::vector<std::size_t>(kNumRegionClasses, 0));
  for (std::size_t i = 0; i < m.size(); ++i) {
    const auto& e = m.entries[i];
    if (e.class_id < 0 || e.class_id >= kNumRegionClasses) throw InvalidArgument("cluster_report: bad class id");
    const std::size_t c = rep.clustering.assignments[i];
    rep.rows.push_back({e.path, e.class_id, c, hashes[i]});
    ++rep.contingency[c][static_cast<std::size_t>(e.class_id)];
  }
  return rep;
}

void ClusterReport::write(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "clusters.csv", std::ios::binary);
    if (!out) throw IoError("cannot write " + (dir / "clusters.csv").string());
    out << "path,class_id,cluster,hash\n";
    for (const auto& r : rows) out << r.path << ',' << r.class_id << ',' << r.cluster << ',' << r.hash.hex() << '\n';
  }
  std::ofstream out(dir / "contingency.csv", std::ios::binary);
  if (!out) throw IoError("cannot write " + (dir / "contingency.csv").string());
  out << "cluster";
  for (int c = 0; c < kNumRegionClasses; ++c) out << ",class_" << c;
  out << ",total\n";
  for (std::size_t k = 0; k < contingency.size(); ++k) {
    std::size_t total = 0;
    out << k;
    for (const auto v : contingency[k]) {
      out << ',' << v;
      total += v;
    }
    out << ',' << total << '\n';
  }
}

}  // namespace dxr
