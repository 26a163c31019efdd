#pragma once

#include <cstddef>
#include <string>

#include "driftwatch/backend.hpp"
#include "driftwatch/calibration.hpp"
#include "driftwatch/clustering.hpp"
#include "driftwatch/dataset.hpp"
#include "driftwatch/overlap.hpp"
#include "driftwatch/pairing.hpp"
#include "driftwatch/report.hpp"
#include "driftwatch/segmentation.hpp"

namespace driftwatch {

struct PipelineConfig {
  PairingConfig pairing;
  double match_threshold = 0.2;
  ClusterConfig cluster;
  RemovalScope removal_scope = RemovalScope::all_instances;
  std::size_t min_matches = kDefaultMinMatches;
  double min_instance_score = 0.0;
  std::size_t jobs = 1;

  void validate() const;
};

struct Providers {
  const FeatureBackend& features;
  const SegmentationProvider& segmenter;
};

/// Runs detection on one reference/query image pair:
/// extract and match at the configured threshold, bound the matched query
/// points into the overlap mask, vote per segmented instance, drop unmatched
/// points covered by instances, then cluster what remains.
///
/// Never throws for provider failures: they come back as backend_error with
/// the failing stage recorded. Returns ids, counts, mask, and regions; the
/// caller fills pose gaps and timestamp.
PairReport detect_images(const std::string& reference_id, const GrayImage& reference, const std::string& query_id,
                         const GrayImage& query, const PipelineConfig& cfg, const Providers& providers);

// Decodes both images of the pair and runs detect_images().
PairReport detect_pair(const ImagePair& pair, const PipelineConfig& cfg, const Providers& providers);

/// Pairs the runs, detects every pair (up to cfg.jobs at once), and returns
/// one PairReport per query record in query order, unpaired ones included.
/// The calibration's threshold, eps, and min_pts override cfg.
AnomalyReport run_mission(const RunDataset& reference, const RunDataset& query, PipelineConfig cfg,
                          const CalibrationResult& calibration, const Providers& providers);

}  // namespace driftwatch
