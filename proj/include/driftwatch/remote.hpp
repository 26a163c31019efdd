#pragma once

#include <map>
#include <string>

#include <json.hpp>

#include "driftwatch/backend.hpp"
#include "driftwatch/segmentation.hpp"

namespace driftwatch {

/// JSON-over-HTTP client for the inference service:
///   POST /v1/extract {image}                              -> {keypoints, descriptors}
///   POST /v1/match   {a, b, match_threshold, options}     -> {pairs}
///   POST /v1/segment {image}                              -> {instances}
///   GET  /v1/health                                       -> {status, models}
/// Images travel as base64 PNG. Each call opens its own connection, so one
/// client may be shared across threads.
class ServiceClient {
 public:
  explicit ServiceClient(RemoteOptions options) : options_(std::move(options)) {}

  // Throws BackendError on transport failure, non-200 status, or a body that is not JSON.
  nlohmann::json post(const std::string& path, const nlohmann::json& body) const;
  nlohmann::json get(const std::string& path) const;

  const RemoteOptions& options() const { return options_; }

 private:
  RemoteOptions options_;
};

struct ServiceHealth {
  std::string status;
  std::map<std::string, bool> models;
};

// GET /v1/health. A 503 surfaces as BackendError like any other failure.
ServiceHealth service_health(const ServiceClient& client);

class RemoteBackend final : public FeatureBackend {
 public:
  explicit RemoteBackend(RemoteOptions options) : client_(std::move(options)) {}

  std::string name() const override { return "remote"; }
  Features extract(const std::string& image_id, const GrayImage& image) const override;
  MatchResult match(const Features& a, const Features& b, double threshold) const override;

 private:
  ServiceClient client_;
};

class RemoteSegmenter final : public SegmentationProvider {
 public:
  explicit RemoteSegmenter(RemoteOptions options) : client_(std::move(options)) {}

  std::string name() const override { return "remote"; }
  std::vector<InstanceMask> segment(const std::string& image_id, const GrayImage& image) const override;

 private:
  ServiceClient client_;
};

}  // namespace driftwatch
