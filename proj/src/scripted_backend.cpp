#include "driftwatch/scripted_backend.hpp"

#include "driftwatch/atomic_file.hpp"
#include "driftwatch/errors.hpp"
#include "driftwatch/wire.hpp"
#include "json_fields.hpp"

namespace driftwatch {

using namespace detail;

namespace {

constexpr double kThresholdSlack = 1e-9;

std::string pair_key(const std::string& a, const std::string& b) { return a + "|" + b; }

}  // namespace

ScriptedFixture ScriptedFixture::load(const std::filesystem::path& path) {
  try {
    return from_json(parse_document(read_text_file(path), path.string()));
  } catch (const SchemaError& e) {
    throw SchemaError("fixture " + path.string() + ": " + e.what());
  }
}

ScriptedFixture ScriptedFixture::from_json(const json& doc) {
  if (!doc.is_object()) {
    schema_fail("", "fixture must be an object");
  }
  ScriptedFixture fx;
  if (doc.contains("extractions")) {
    const json& ex = doc["extractions"];
    if (!ex.is_object()) {
      schema_fail("extractions", "expected an object");
    }
    for (auto it = ex.begin(); it != ex.end(); ++it) {
      fx.extractions_[it.key()] = wire::features_from_json(it.value(), "extractions." + it.key(), it.key());
    }
  }
  if (doc.contains("matches")) {
    const json& ms = doc["matches"];
    if (!ms.is_object()) {
      schema_fail("matches", "expected an object");
    }
    for (auto it = ms.begin(); it != ms.end(); ++it) {
      const std::string& key = it.key();
      const std::string path = "matches." + key;
      const auto last = key.rfind('|');
      const auto first = key.find('|');
      if (last == std::string::npos || first == last) {
        schema_fail(path, "key must look like <idA>|<idB>|<threshold>");
      }
      double threshold = 0.0;
      try {
        std::size_t used = 0;
        threshold = std::stod(key.substr(last + 1), &used);
        if (used != key.size() - last - 1) {
          throw std::invalid_argument("trailing characters");
        }
      } catch (const std::exception&) {
        schema_fail(path, "threshold part is not a number");
      }
      const std::string pairs_path = path + ".pairs";
      fx.add_matches(key.substr(0, first), key.substr(first + 1, last - first - 1), threshold,
                     wire::matches_from_json(require(it.value(), path, "pairs"), pairs_path));
    }
  }
  if (doc.contains("segments")) {
    const json& seg = doc["segments"];
    if (!seg.is_object()) {
      schema_fail("segments", "expected an object");
    }
    for (auto it = seg.begin(); it != seg.end(); ++it) {
      const std::string path = "segments." + it.key();
      as_array(it.value(), path);
      std::vector<InstanceMask> instances;
      for (std::size_t i = 0; i < it.value().size(); ++i) {
        instances.push_back(wire::instance_from_json(it.value()[i], index_path(path, i)));
      }
      fx.add_segments(it.key(), std::move(instances));
    }
  }
  return fx;
}

json ScriptedFixture::to_json() const {
  json ex = json::object();
  for (const auto& [id, f] : extractions_) {
    ex[id] = wire::features_to_json(f);
  }
  json ms = json::object();
  for (const auto& [key, by_threshold] : matches_) {
    for (const auto& [t, pairs] : by_threshold) {
      ms[key + "|" + wire::format_threshold(t)] = {{"pairs", wire::matches_to_json(pairs)}};
    }
  }
  json seg = json::object();
  for (const auto& [id, instances] : segments_) {
    json list = json::array();
    for (const auto& inst : instances) {
      list.push_back(wire::instance_to_json(inst));
    }
    seg[id] = std::move(list);
  }
  return {{"extractions", std::move(ex)}, {"matches", std::move(ms)}, {"segments", std::move(seg)}};
}

void ScriptedFixture::save(const std::filesystem::path& path) const { write_file_atomic(path, to_json().dump() + "\n"); }

void ScriptedFixture::add_extraction(const Features& features) {
  if (features.descriptors.size() != features.keypoints.size()) {
    throw InputError("fixture extraction \"" + features.image_id + "\" has " +
                     std::to_string(features.descriptors.size()) + " descriptors for " +
                     std::to_string(features.keypoints.size()) + " keypoints");
  }
  extractions_[features.image_id] = features;
}

void ScriptedFixture::add_matches(const std::string& id_a, const std::string& id_b, double threshold,
                                  std::vector<Match> pairs) {
  matches_[pair_key(id_a, id_b)][threshold] = std::move(pairs);
}

void ScriptedFixture::add_segments(const std::string& image_id, std::vector<InstanceMask> instances) {
  sort_by_score(instances);
  segments_[image_id] = std::move(instances);
}

const Features& ScriptedFixture::extraction(const std::string& image_id) const {
  auto it = extractions_.find(image_id);
  if (it == extractions_.end()) {
    throw BackendError("fixture has no extraction for image \"" + image_id + "\"");
  }
  return it->second;
}

MatchResult ScriptedFixture::match(const Features& a, const Features& b, double threshold) const {
  if (!compatible(a.descriptors, b.descriptors)) {
    throw InputError("incompatible descriptors for \"" + a.image_id + "\" and \"" + b.image_id + "\"");
  }
  auto it = matches_.find(pair_key(a.image_id, b.image_id));
  if (it == matches_.end()) {
    throw BackendError("fixture has no matches for \"" + pair_key(a.image_id, b.image_id) + "\"");
  }
  auto entry = it->second.upper_bound(threshold + kThresholdSlack);
  if (entry == it->second.begin()) {
    throw BackendError("fixture has no matches for \"" + pair_key(a.image_id, b.image_id) + "\" at threshold " +
                       wire::format_threshold(threshold) + " or below");
  }
  --entry;
  return assemble_matches(entry->second, a.keypoints.size(), b.keypoints.size(), threshold);
}

std::vector<InstanceMask> ScriptedFixture::segments(const std::string& image_id) const {
  auto it = segments_.find(image_id);
  if (it == segments_.end()) {
    throw BackendError("fixture has no segmentation for image \"" + image_id + "\"");
  }
  return it->second;
}

Features ScriptedBackend::extract(const std::string& image_id, const GrayImage&) const {
  return fixture_->extraction(image_id);
}

MatchResult ScriptedBackend::match(const Features& a, const Features& b, double threshold) const {
  return fixture_->match(a, b, threshold);
}

std::vector<InstanceMask> ScriptedSegmenter::segment(const std::string& image_id, const GrayImage&) const {
  return fixture_->segments(image_id);
}

}  // namespace driftwatch
