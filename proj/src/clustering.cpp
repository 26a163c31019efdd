#include "driftwatch/clustering.hpp"

#include <algorithm>
#include <deque>

#include "driftwatch/errors.hpp"

namespace driftwatch {

void ClusterConfig::validate() const {
  if (!(eps > 0.0)) {
    throw InputError("cluster eps must be > 0");
  }
  if (min_pts < 2) {
    throw InputError("cluster min_pts must be >= 2");
  }
}

Clustering dbscan(std::span<const Point2> points, const ClusterConfig& cfg) {
  cfg.validate();
  const std::size_t n = points.size();
  const double eps2 = cfg.eps * cfg.eps;

  // O(n^2) neighbourhoods; residual point counts stay in the hundreds.
  std::vector<std::vector<std::size_t>> neighbours(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double dx = points[i].x - points[j].x;
      const double dy = points[i].y - points[j].y;
      if (dx * dx + dy * dy <= eps2) {
        neighbours[i].push_back(j);
      }
    }
  }

  Clustering out;
  out.core.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.core[i] = neighbours[i].size() >= cfg.min_pts;
  }

  constexpr std::size_t kUnassigned = static_cast<std::size_t>(-1);
  std::vector<std::size_t> label(n, kUnassigned);
  for (std::size_t seed = 0; seed < n; ++seed) {
    if (label[seed] != kUnassigned || !out.core[seed]) {
      continue;
    }
    const std::size_t id = out.clusters.size();
    out.clusters.emplace_back();
    std::deque<std::size_t> frontier{seed};
    label[seed] = id;
    while (!frontier.empty()) {
      const std::size_t p = frontier.front();
      frontier.pop_front();
      out.clusters[id].push_back(p);
      if (!out.core[p]) {
        continue;
      }
      for (std::size_t q : neighbours[p]) {
        if (label[q] == kUnassigned) {
          label[q] = id;
          frontier.push_back(q);
        }
      }
    }
    std::sort(out.clusters[id].begin(), out.clusters[id].end());
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (label[i] == kUnassigned) {
      out.noise.push_back(i);
    }
  }
  return out;
}

std::vector<AnomalyRegion> cluster_regions(const Clustering& clustering, std::span<const Point2> points) {
  std::vector<const std::vector<std::size_t>*> order;
  for (const auto& c : clustering.clusters) {
    if (!c.empty()) {
      order.push_back(&c);
    }
  }
  std::stable_sort(order.begin(), order.end(), [](const auto* a, const auto* b) {
    if (a->size() != b->size()) {
      return a->size() > b->size();
    }
    return a->front() < b->front();
  });

  std::vector<AnomalyRegion> regions;
  for (const auto* c : order) {
    AnomalyRegion r;
    r.source = RegionSource::cluster;
    std::size_t cores = 0;
    for (std::size_t i : *c) {
      if (i >= points.size()) {
        throw InputError("cluster index " + std::to_string(i) + " out of range");
      }
      r.points.push_back(points[i]);
      if (i < clustering.core.size() && clustering.core[i]) {
        ++cores;
      }
    }
    r.bbox = bounding_box(r.points);
    r.score = static_cast<double>(cores) / static_cast<double>(c->size());
    regions.push_back(std::move(r));
  }
  return regions;
}

}  // namespace driftwatch
