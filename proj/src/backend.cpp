#include "driftwatch/backend.hpp"

#include <algorithm>

#include "driftwatch/errors.hpp"
#include "driftwatch/native_backend.hpp"
#include "driftwatch/remote.hpp"
#include "driftwatch/scripted_backend.hpp"

namespace driftwatch {

std::string_view to_string(DescriptorKind kind) { return kind == DescriptorKind::binary ? "binary" : "real"; }

std::size_t DescriptorSet::size() const {
  if (dim == 0) {
    return 0;
  }
  return kind == DescriptorKind::binary ? bits.size() / row_bytes() : values.size() / dim;
}

bool compatible(const DescriptorSet& a, const DescriptorSet& b) { return a.kind == b.kind && a.dim == b.dim; }

MatchResult assemble_matches(std::vector<Match> candidates, std::size_t count_a, std::size_t count_b,
                             double threshold) {
  std::vector<bool> used_a(count_a, false);
  std::vector<bool> used_b(count_b, false);
  MatchResult result;
  for (const auto& m : candidates) {
    if (m.index_a >= count_a || m.index_b >= count_b) {
      throw BackendError("match index out of range (" + std::to_string(m.index_a) + ", " +
                         std::to_string(m.index_b) + ")");
    }
    if (used_a[m.index_a] || used_b[m.index_b]) {
      throw BackendError("match is not one-to-one at (" + std::to_string(m.index_a) + ", " +
                         std::to_string(m.index_b) + ")");
    }
    if (!(m.confidence >= 0.0 && m.confidence <= 1.0)) {
      throw BackendError("match confidence " + std::to_string(m.confidence) + " outside [0, 1]");
    }
    used_a[m.index_a] = true;
    used_b[m.index_b] = true;
    if (m.confidence >= threshold) {
      result.matches.push_back(m);
    }
  }
  std::sort(result.matches.begin(), result.matches.end(),
            [](const Match& x, const Match& y) { return x.index_a < y.index_a; });

  std::vector<bool> matched_a(count_a, false);
  std::vector<bool> matched_b(count_b, false);
  for (const auto& m : result.matches) {
    matched_a[m.index_a] = true;
    matched_b[m.index_b] = true;
  }
  for (std::size_t i = 0; i < count_a; ++i) {
    if (!matched_a[i]) {
      result.unmatched_a.push_back(i);
    }
  }
  for (std::size_t i = 0; i < count_b; ++i) {
    if (!matched_b[i]) {
      result.unmatched_b.push_back(i);
    }
  }
  return result;
}

std::string_view to_string(BackendKind kind) {
  switch (kind) {
    case BackendKind::native:
      return "native";
    case BackendKind::scripted:
      return "scripted";
    case BackendKind::remote:
      return "remote";
  }
  return "unknown";
}

BackendKind parse_backend_kind(std::string_view text) {
  for (auto k : {BackendKind::native, BackendKind::scripted, BackendKind::remote}) {
    if (text == to_string(k)) {
      return k;
    }
  }
  throw InputError("unknown backend \"" + std::string(text) + "\" (expected native, scripted or remote)");
}

void BackendConfig::validate() const {
  if (!(match_threshold >= 0.0 && match_threshold < 1.0)) {
    throw InputError("match threshold must be in [0, 1)");
  }
  switch (kind) {
    case BackendKind::native:
      if (native.max_keypoints == 0 || native.corner_threshold <= 0 || native.min_arc < 1 || native.min_arc > 16 ||
          native.nms_radius < 0.0) {
        throw InputError("invalid native backend settings");
      }
      break;
    case BackendKind::scripted:
      if (fixture.empty()) {
        throw InputError("scripted backend requires a fixture path");
      }
      break;
    case BackendKind::remote:
      if (remote.base_url.empty() || !(remote.timeout_seconds > 0.0)) {
        throw InputError("remote backend requires a base address and a positive timeout");
      }
      break;
  }
}

std::unique_ptr<FeatureBackend> make_feature_backend(const BackendConfig& cfg) {
  cfg.validate();
  switch (cfg.kind) {
    case BackendKind::native:
      return std::make_unique<NativeBackend>(cfg.native);
    case BackendKind::scripted:
      return std::make_unique<ScriptedBackend>(ScriptedFixture::load(cfg.fixture));
    case BackendKind::remote:
      return std::make_unique<RemoteBackend>(cfg.remote);
  }
  throw InputError("unknown backend kind");
}

}  // namespace driftwatch
