#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "driftwatch/geometry.hpp"
#include "driftwatch/report.hpp"

namespace driftwatch {

struct ClusterConfig {
  double eps = 10.0;  // pixels
  std::size_t min_pts = 5;

  // Throws InputError unless eps > 0 and min_pts >= 2.
  void validate() const;
};

struct Clustering {
  std::vector<std::vector<std::size_t>> clusters;  // point indices, ascending
  std::vector<std::size_t> noise;                  // ascending
  std::vector<bool> core;                          // per input point
};

/// DBSCAN. A point is core when at least min_pts points (itself included)
/// lie within the closed eps-ball. Points are visited in index order; a
/// border point joins the first cluster that reaches it.
Clustering dbscan(std::span<const Point2> points, const ClusterConfig& cfg);

// One cluster region per cluster, largest first (ties by first member index).
std::vector<AnomalyRegion> cluster_regions(const Clustering& clustering, std::span<const Point2> points);

}  // namespace driftwatch
