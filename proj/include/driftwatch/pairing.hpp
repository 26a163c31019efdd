#pragma once

#include <vector>

#include "driftwatch/dataset.hpp"

namespace driftwatch {

struct PairingConfig {
  double max_distance = 0.5;   // meters
  double max_yaw_diff = 0.35;  // radians

  // Throws InputError unless max_distance > 0 and 0 < max_yaw_diff <= pi.
  void validate() const;
};

struct ImagePair {
  ImageRecord reference;
  ImageRecord query;
  double position_gap = 0.0;
  double yaw_gap = 0.0;
};

struct PairingResult {
  std::vector<ImagePair> pairs;        // in query order
  std::vector<ImageRecord> unpaired;   // queries with no reference inside both thresholds
};

// Euclidean distance over (x, y, z).
double pose_distance(const Pose& a, const Pose& b);

// Smallest absolute angle between two headings, in [0, pi].
double yaw_difference(const Pose& a, const Pose& b);

// Normalized pairing cost; lower is better.
inline double pairing_score(double position_gap, double yaw_gap, const PairingConfig& cfg) {
  return position_gap / cfg.max_distance + yaw_gap / cfg.max_yaw_diff;
}

/// For each query record picks the reference inside both thresholds with the
/// lowest pairing_score(); ties go to the earlier reference timestamp, then to
/// the earlier manifest row. Several queries may share one reference.
PairingResult pair_images(const RunDataset& reference, const RunDataset& query, const PairingConfig& cfg);

}  // namespace driftwatch
