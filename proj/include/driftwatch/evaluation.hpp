#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "driftwatch/geometry.hpp"
#include "driftwatch/report.hpp"

namespace driftwatch {

/// Annotated anomaly boxes per query frame; an empty list marks a clean frame.
/// File form: {"frames": {query_id: [[x_min, y_min, x_max, y_max]...]}}
struct GroundTruth {
  std::map<std::string, std::vector<RectMask>> frames;

  friend bool operator==(const GroundTruth&, const GroundTruth&) = default;
};

GroundTruth parse_truth(std::string_view text);
std::string serialize_truth(const GroundTruth& truth);
GroundTruth load_truth(const std::filesystem::path& path);
void save_truth(const GroundTruth& truth, const std::filesystem::path& path);

enum class FrameRule {
  // Presence must agree, and on anomalous frames some region must intersect some truth box.
  bbox_intersection,
  // Presence of regions must agree with presence of truth boxes.
  presence,
};

struct FrameResult {
  std::string query_id;
  double timestamp = 0.0;
  bool correct = false;
  std::size_t regions = 0;
  std::size_t truth_boxes = 0;
  double running_accuracy = 0.0;  // over frames up to and including this one
};

struct Evaluation {
  double accuracy = 0.0;
  double recall = 0.0;     // anomalous frames judged correct / anomalous frames
  double precision = 0.0;  // frames with regions judged correct / frames with regions
  std::size_t clean_frames = 0;
  std::size_t false_positive_frames = 0;  // clean frames that carry regions
  std::vector<FrameResult> frames;        // ordered by timestamp
};

bool frame_correct(const PairReport& pair, const std::vector<RectMask>& truth, FrameRule rule);

// Throws InputError if a report frame is absent from the truth.
Evaluation evaluate(const AnomalyReport& report, const GroundTruth& truth,
                    FrameRule rule = FrameRule::bbox_intersection);

// query_id,timestamp,correct,regions,truth_boxes
std::string evaluation_csv(const Evaluation& evaluation);

}  // namespace driftwatch
