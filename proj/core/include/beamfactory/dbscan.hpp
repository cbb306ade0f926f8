#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace beamfactory {

using FeaturePoint = std::array<double, 3>;

struct DbscanResult {
  static constexpr int kNoise = -1;

  std::vector<int> labels;  // cluster id per point, kNoise for noise
  std::vector<bool> core;   // |eps-neighborhood| (self included) >= min_pts
  int n_clusters = 0;

  std::size_t core_count() const;
};

// Density-based clustering with Euclidean eps-neighborhoods (inclusive) found
// through a uniform hash grid of cell size eps. Core flags do not depend on
// input order; border points join the first cluster that reaches them.
DbscanResult dbscan(std::span<const FeaturePoint> points, double eps, std::size_t min_pts);

}  // namespace beamfactory
