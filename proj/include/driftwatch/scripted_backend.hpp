#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "driftwatch/backend.hpp"
#include "driftwatch/segmentation.hpp"

namespace driftwatch {

/// Recorded extraction, matching, and segmentation results keyed by image id.
///
///   {"extractions": {id: {"keypoints": [...], "descriptors": {...}}},
///    "matches": {"<idA>|<idB>|<threshold>": {"pairs": [[ia, ib, conf]...]}},
///    "segments": {id: [instance...]}}
///
/// A match lookup at threshold t uses the entry for (idA, idB) with the
/// largest recorded threshold not above t, then drops pairs below t. An
/// entry recorded at 0 therefore answers every threshold.
class ScriptedFixture {
 public:
  static ScriptedFixture load(const std::filesystem::path& path);
  static ScriptedFixture from_json(const nlohmann::json& doc);
  nlohmann::json to_json() const;
  void save(const std::filesystem::path& path) const;

  void add_extraction(const Features& features);
  void add_matches(const std::string& id_a, const std::string& id_b, double threshold, std::vector<Match> pairs);
  void add_segments(const std::string& image_id, std::vector<InstanceMask> instances);

  const Features& extraction(const std::string& image_id) const;
  MatchResult match(const Features& a, const Features& b, double threshold) const;
  std::vector<InstanceMask> segments(const std::string& image_id) const;

 private:
  std::map<std::string, Features> extractions_;
  // "idA|idB" -> recorded threshold -> pairs
  std::map<std::string, std::map<double, std::vector<Match>>> matches_;
  std::map<std::string, std::vector<InstanceMask>> segments_;
};

class ScriptedBackend final : public FeatureBackend {
 public:
  explicit ScriptedBackend(ScriptedFixture fixture)
      : fixture_(std::make_shared<const ScriptedFixture>(std::move(fixture))) {}
  explicit ScriptedBackend(std::shared_ptr<const ScriptedFixture> fixture) : fixture_(std::move(fixture)) {}

  std::string name() const override { return "scripted"; }
  Features extract(const std::string& image_id, const GrayImage& image) const override;
  MatchResult match(const Features& a, const Features& b, double threshold) const override;

 private:
  std::shared_ptr<const ScriptedFixture> fixture_;
};

// Replays the "segments" section; ids absent from the section are a fixture miss.
class ScriptedSegmenter final : public SegmentationProvider {
 public:
  explicit ScriptedSegmenter(std::shared_ptr<const ScriptedFixture> fixture) : fixture_(std::move(fixture)) {}

  std::string name() const override { return "scripted"; }
  std::vector<InstanceMask> segment(const std::string& image_id, const GrayImage& image) const override;

 private:
  std::shared_ptr<const ScriptedFixture> fixture_;
};

}  // namespace driftwatch
