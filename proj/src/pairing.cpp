#include "driftwatch/pairing.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "driftwatch/errors.hpp"

namespace driftwatch {

void PairingConfig::validate() const {
  if (!(max_distance > 0.0)) {
    throw InputError("pairing max_distance must be > 0");
  }
  if (!(max_yaw_diff > 0.0 && max_yaw_diff <= std::numbers::pi)) {
    throw InputError("pairing max_yaw_diff must be in (0, pi]");
  }
}

double pose_distance(const Pose& a, const Pose& b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  const double dz = a.z - b.z;
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

double yaw_difference(const Pose& a, const Pose& b) {
  double d = std::fmod(std::abs(a.yaw - b.yaw), 2.0 * std::numbers::pi);
  return d > std::numbers::pi ? 2.0 * std::numbers::pi - d : d;
}

PairingResult pair_images(const RunDataset& reference, const RunDataset& query, const PairingConfig& cfg) {
  cfg.validate();

  // References sorted by x so each query only scans the slab |dx| <= d.
  std::vector<std::size_t> by_x(reference.records.size());
  std::iota(by_x.begin(), by_x.end(), std::size_t{0});
  std::stable_sort(by_x.begin(), by_x.end(), [&](std::size_t a, std::size_t b) {
    return reference.records[a].pose.x < reference.records[b].pose.x;
  });

  PairingResult result;
  for (const auto& q : query.records) {
    auto lo = std::lower_bound(by_x.begin(), by_x.end(), q.pose.x - cfg.max_distance,
                               [&](std::size_t i, double x) { return reference.records[i].pose.x < x; });

    std::size_t best = reference.records.size();
    double best_score = 0.0;
    double best_dist = 0.0;
    double best_yaw = 0.0;
    for (auto it = lo; it != by_x.end() && reference.records[*it].pose.x <= q.pose.x + cfg.max_distance; ++it) {
      const auto& r = reference.records[*it];
      const double dist = pose_distance(r.pose, q.pose);
      const double yaw = yaw_difference(r.pose, q.pose);
      if (dist > cfg.max_distance || yaw > cfg.max_yaw_diff) {
        continue;
      }
      const double score = pairing_score(dist, yaw, cfg);
      bool better = best == reference.records.size() || score < best_score;
      if (!better && score == best_score) {
        const auto& cur = reference.records[best];
        better = r.pose.timestamp < cur.pose.timestamp || (r.pose.timestamp == cur.pose.timestamp && *it < best);
      }
      if (better) {
        best = *it;
        best_score = score;
        best_dist = dist;
        best_yaw = yaw;
      }
    }

    if (best == reference.records.size()) {
      result.unpaired.push_back(q);
    } else {
      result.pairs.push_back({reference.records[best], q, best_dist, best_yaw});
    }
  }
  return result;
}

}  // namespace driftwatch
