#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "driftwatch/image.hpp"

namespace driftwatch {

// Wraps an angle into (-pi, pi].
double wrap_angle(double radians);

// Heading about +z from a unit quaternion; pitch and roll are discarded.
double yaw_from_quaternion(double qx, double qy, double qz, double qw);

struct Pose {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  double yaw = 0.0;  // radians, (-pi, pi]
  double timestamp = 0.0;

  friend bool operator==(const Pose&, const Pose&) = default;
};

struct ImageRecord {
  std::string image_id;
  std::filesystem::path image_path;  // resolved against the run root
  Pose pose;
  int width = 0;
  int height = 0;

  friend bool operator==(const ImageRecord&, const ImageRecord&) = default;
};

enum class RunRole { reference, query, calibration };

struct RunDataset {
  std::string run_id;
  RunRole role = RunRole::reference;
  std::vector<ImageRecord> records;  // non-decreasing timestamps, unique ids

  friend bool operator==(const RunDataset&, const RunDataset&) = default;
};

inline constexpr const char* kManifestName = "poses.jsonl";
inline constexpr const char* kImagesDirName = "images";

/// Loads `<dir>/poses.jsonl`. Each line carries either "yaw" or a quaternion
/// ("qx","qy","qz","qw"), never both. The run id is the directory name.
/// Images are checked for existence and a valid PNG header; pixels are not
/// decoded here.
///
/// Throws InputError naming the manifest line for a missing manifest, a
/// missing image, non-monotonic timestamps, or a duplicate image_id.
RunDataset load_run(const std::filesystem::path& dir, RunRole role = RunRole::reference);

// Appends images and manifest lines to a run directory as they are recorded.
class RunWriter {
 public:
  explicit RunWriter(std::filesystem::path dir);

  void add(const std::string& image_id, const GrayImage& image, const Pose& pose);
  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path dir_;
  std::ofstream manifest_;
};

}  // namespace driftwatch
