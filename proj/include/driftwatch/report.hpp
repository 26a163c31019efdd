#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "driftwatch/geometry.hpp"

namespace driftwatch {

enum class RegionSource { segment_vote, cluster };

/// One detected anomaly. Segment-vote regions carry the instance class and
/// vote tallies; cluster regions carry their member points. The other
/// source's fields stay empty.
struct AnomalyRegion {
  RegionSource source = RegionSource::cluster;
  RectMask bbox;
  // segment_vote: instance score; cluster: fraction of core points.
  double score = 0.0;
  std::optional<std::string> class_label;
  std::size_t n_len = 0;
  std::size_t m_len = 0;
  std::vector<Point2> points;

  friend bool operator==(const AnomalyRegion&, const AnomalyRegion&) = default;
};

enum class PairStatus { ok, unpaired, no_overlap, backend_error };

std::string_view to_string(PairStatus status);
std::string_view to_string(RegionSource source);

struct PairCounts {
  std::size_t keypoints_q = 0;
  std::size_t keypoints_r = 0;
  std::size_t matched = 0;
  std::size_t unmatched_in_mask = 0;
  std::size_t residual_after_removal = 0;

  friend bool operator==(const PairCounts&, const PairCounts&) = default;
};

struct PairReport {
  std::string query_id;
  std::string reference_id;  // empty when unpaired
  double timestamp = 0.0;    // query timestamp
  PairStatus status = PairStatus::ok;
  std::string stage;    // failing stage for backend_error, else empty
  std::string message;  // diagnostic for non-ok statuses
  std::optional<RectMask> mask;
  double position_gap = 0.0;
  double yaw_gap = 0.0;
  std::vector<AnomalyRegion> regions;  // empty unless status == ok
  PairCounts counts;

  friend bool operator==(const PairReport&, const PairReport&) = default;
};

struct ReportCalibration {
  double delta = 0.0;
  double eps = 0.0;
  int min_pts = 0;

  friend bool operator==(const ReportCalibration&, const ReportCalibration&) = default;
};

struct AnomalyReport {
  std::string run_id;
  std::string reference_run;
  std::string query_run;
  ReportCalibration calibration;
  std::vector<PairReport> pairs;

  friend bool operator==(const AnomalyReport&, const AnomalyReport&) = default;
};

inline constexpr int kReportSchemaVersion = 1;

// Serialized form is stable: identical reports produce identical bytes.
// Throws InputError if any number in the report is non-finite.
std::string serialize_report(const AnomalyReport& report);
AnomalyReport parse_report(std::string_view text);

void save_report(const AnomalyReport& report, const std::filesystem::path& path);
AnomalyReport load_report(const std::filesystem::path& path);

}  // namespace driftwatch
