#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "driftwatch/calibration.hpp"

namespace driftwatch::plot {

struct AccuracyRow {
  std::string query_id;
  double timestamp = 0.0;
  bool correct = false;
};

// Parses the per-frame evaluation CSV; throws InputError when malformed or empty.
std::vector<AccuracyRow> parse_accuracy_csv(std::string_view text);

// Line chart of cv against threshold with the selected knee marked.
std::string curve_svg(const CalibrationResult& calibration);
std::string curve_csv(const CalibrationResult& calibration);

// Running accuracy over time.
std::string accuracy_svg(const std::vector<AccuracyRow>& rows);
std::string accuracy_csv(const std::vector<AccuracyRow>& rows);

}  // namespace driftwatch::plot
