#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "driftwatch/geometry.hpp"
#include "driftwatch/image.hpp"

namespace driftwatch {

struct Keypoint {
  double x = 0.0;
  double y = 0.0;
  double score = 0.0;  // [0, 1]

  Point2 point() const { return {x, y}; }
  friend bool operator==(const Keypoint&, const Keypoint&) = default;
};

enum class DescriptorKind { binary, real };

std::string_view to_string(DescriptorKind kind);

/// One descriptor per keypoint. Binary descriptors are bit-packed
/// (`dim / 8` bytes per row, dim a multiple of 8); real descriptors are
/// `dim` floats per row.
struct DescriptorSet {
  DescriptorKind kind = DescriptorKind::binary;
  std::size_t dim = 0;
  std::vector<std::uint8_t> bits;
  std::vector<float> values;

  std::size_t size() const;
  std::size_t row_bytes() const { return dim / 8; }
  const std::uint8_t* binary_row(std::size_t i) const { return bits.data() + i * row_bytes(); }
  const float* real_row(std::size_t i) const { return values.data() + i * dim; }

  friend bool operator==(const DescriptorSet&, const DescriptorSet&) = default;
};

bool compatible(const DescriptorSet& a, const DescriptorSet& b);

struct Features {
  std::string image_id;
  std::vector<Keypoint> keypoints;  // descending score
  DescriptorSet descriptors;

  friend bool operator==(const Features&, const Features&) = default;
};

struct Match {
  std::size_t index_a = 0;
  std::size_t index_b = 0;
  double confidence = 0.0;

  friend bool operator==(const Match&, const Match&) = default;
};

/// One-to-one correspondences; the unmatched lists complete the partition of
/// each side's index set.
struct MatchResult {
  std::vector<Match> matches;
  std::vector<std::size_t> unmatched_a;
  std::vector<std::size_t> unmatched_b;

  friend bool operator==(const MatchResult&, const MatchResult&) = default;
};

/// Builds a MatchResult from candidate matches: keeps those with
/// confidence >= threshold, sorts by index_a, and fills the unmatched lists.
/// Throws BackendError if an index is out of range or repeats.
MatchResult assemble_matches(std::vector<Match> candidates, std::size_t count_a, std::size_t count_b,
                             double threshold);

/// Feature extraction and matching provider. Implementations are immutable
/// after construction; extract() and match() may be called concurrently.
class FeatureBackend {
 public:
  virtual ~FeatureBackend() = default;

  virtual std::string name() const = 0;
  virtual Features extract(const std::string& image_id, const GrayImage& image) const = 0;
  virtual MatchResult match(const Features& a, const Features& b, double threshold) const = 0;
};

enum class BackendKind { native, scripted, remote };

std::string_view to_string(BackendKind kind);
BackendKind parse_backend_kind(std::string_view text);

struct NativeOptions {
  std::size_t max_keypoints = 1000;
  int corner_threshold = 20;  // grey levels
  int min_arc = 9;            // contiguous ring samples, out of 16
  double nms_radius = 5.0;    // pixels
};

struct RemoteOptions {
  std::string base_url = "http://127.0.0.1:8080";
  double timeout_seconds = 30.0;
  nlohmann::json options = nlohmann::json::object();  // passed through to /v1/match
};

struct BackendConfig {
  BackendKind kind = BackendKind::native;
  double match_threshold = 0.2;
  NativeOptions native;
  std::filesystem::path fixture;
  RemoteOptions remote;

  // Throws InputError unless match_threshold is in [0, 1) and kind settings are usable.
  void validate() const;
};

std::unique_ptr<FeatureBackend> make_feature_backend(const BackendConfig& cfg);

}  // namespace driftwatch
