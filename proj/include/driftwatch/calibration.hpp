#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "driftwatch/backend.hpp"
#include "driftwatch/geometry.hpp"
#include "driftwatch/image.hpp"

namespace driftwatch {

/// Displacement statistics of one image pair's matches at one threshold.
/// `mean` and `stddev` are over the Euclidean distances between matched
/// coordinates; stddev is the population form. `cv` = stddev / mean, or 0
/// when every distance is 0. `defined` is false when fewer than two matches
/// exist; such pairs are left out of the threshold's average.
struct PairStats {
  std::size_t pair_index = 0;
  std::size_t matched = 0;
  double mean = 0.0;
  double stddev = 0.0;
  double cv = 0.0;
  bool defined = false;
};

using MatchedCoords = std::pair<Point2, Point2>;

PairStats pair_cv(std::span<const MatchedCoords> matches);

struct Exclusion {
  double threshold = 0.0;
  std::size_t pair_index = 0;

  friend bool operator==(const Exclusion&, const Exclusion&) = default;
};

struct CalibrationCurve {
  std::vector<double> thresholds;  // strictly increasing
  // Mean of cv / matched over the defined pairs; NaN when no pair is defined.
  std::vector<double> cv_values;
  std::vector<std::vector<PairStats>> per_pair;  // [threshold][pair]
  std::size_t pair_count = 0;
  std::vector<Exclusion> excluded;
};

// Aggregates a [threshold][pair] statistics matrix into a curve.
CalibrationCurve build_curve(std::vector<double> thresholds, std::vector<std::vector<PairStats>> per_pair);

struct CalibrationPair {
  std::string id_a;
  GrayImage image_a;
  std::string id_b;
  GrayImage image_b;
};

/// Extracts every image once, then matches each pair at every threshold.
/// Backend failures are rethrown as BackendError prefixed with the pair index.
CalibrationCurve sweep(std::span<const CalibrationPair> pairs, std::span<const double> thresholds,
                       const FeatureBackend& backend);

struct KneeResult {
  std::size_t index = 0;
  double x = 0.0;
  double y = 0.0;
  bool degenerate = false;  // no point deviates from the chord
};

/// Point lying furthest below the chord joining the first and last points;
/// ties go to the smaller x. Needs >= 3 points.
KneeResult find_knee(std::span<const double> xs, std::span<const double> ys);

// Knee of the cv curve over thresholds whose cv is defined.
KneeResult knee(const CalibrationCurve& curve);

// Distance from every point to its k-th nearest other point, ascending.
std::vector<double> k_distances(std::span<const Point2> points, std::size_t k);

/// Mean over point sets of the knee of each set's sorted min_pts-distance
/// curve. Sets with fewer than min_pts + 1 points are skipped; InputError if
/// all are skipped or min_pts < 2.
double calibrate_eps(std::span<const std::vector<Point2>> point_sets, std::size_t min_pts);

struct CalibrationResult {
  double selected_delta = 0.0;
  CalibrationCurve curve;
  double eps = 0.0;
  int min_pts = 5;
  bool degenerate_knee = false;
};

inline constexpr int kCalibrationSchemaVersion = 1;

std::string serialize_calibration(const CalibrationResult& result);
CalibrationResult parse_calibration(std::string_view text);
void save_calibration(const CalibrationResult& result, const std::filesystem::path& path);
CalibrationResult load_calibration(const std::filesystem::path& path);

// Evenly spaced thresholds from start to stop inclusive, rounded to 1e-9.
std::vector<double> threshold_grid(double start, double stop, double step);
// "start:stop:step" or a comma-separated list. Values must lie in [0, 1) and increase.
std::vector<double> parse_thresholds(std::string_view text);

std::vector<double> default_thresholds();

/// Calibration pair directory: `<dir>/pairs.jsonl`, one
/// {"id_a", "file_a", "id_b", "file_b"} object per line, paths relative to dir.
std::vector<CalibrationPair> load_calibration_pairs(const std::filesystem::path& dir);
void write_calibration_pairs(const std::filesystem::path& dir, std::span<const CalibrationPair> pairs);

}  // namespace driftwatch
