#include "driftwatch/report.hpp"

#include "driftwatch/atomic_file.hpp"
#include "json_fields.hpp"

namespace driftwatch {

using namespace detail;

std::string_view to_string(PairStatus status) {
  switch (status) {
    case PairStatus::ok:
      return "ok";
    case PairStatus::unpaired:
      return "unpaired";
    case PairStatus::no_overlap:
      return "no_overlap";
    case PairStatus::backend_error:
      return "backend_error";
  }
  return "unknown";
}

std::string_view to_string(RegionSource source) {
  return source == RegionSource::segment_vote ? "segment_vote" : "cluster";
}

namespace {

PairStatus parse_status(const json& v, const std::string& path) {
  const std::string s = as_string(v, path);
  for (auto st : {PairStatus::ok, PairStatus::unpaired, PairStatus::no_overlap, PairStatus::backend_error}) {
    if (s == to_string(st)) {
      return st;
    }
  }
  schema_fail(path, "unknown status \"" + s + "\"");
}

json region_to_json(const AnomalyRegion& r) {
  json j = {{"source", to_string(r.source)}, {"bbox", rect_to_json(r.bbox)}, {"score", r.score}};
  if (r.source == RegionSource::segment_vote) {
    if (r.class_label) {
      j["class_label"] = *r.class_label;
    }
    j["n_len"] = r.n_len;
    j["m_len"] = r.m_len;
  } else {
    json pts = json::array();
    for (const auto& p : r.points) {
      pts.push_back(point_to_json(p));
    }
    j["points"] = std::move(pts);
  }
  return j;
}

AnomalyRegion region_from_json(const json& j, const std::string& path) {
  AnomalyRegion r;
  const std::string source_path = join_path(path, "source");
  const std::string source = as_string(require(j, path, "source"), source_path);
  if (source == "segment_vote") {
    r.source = RegionSource::segment_vote;
  } else if (source == "cluster") {
    r.source = RegionSource::cluster;
  } else {
    schema_fail(source_path, "unknown region source \"" + source + "\"");
  }
  r.bbox = rect_from_json(require(j, path, "bbox"), join_path(path, "bbox"));
  r.score = number_or(j, path, "score", 0.0);

  if (r.source == RegionSource::segment_vote) {
    if (j.contains("points")) {
      schema_fail(join_path(path, "points"), "not allowed on segment_vote regions");
    }
    if (j.contains("class_label") && !j["class_label"].is_null()) {
      r.class_label = as_string(j["class_label"], join_path(path, "class_label"));
    }
    if (j.contains("n_len")) {
      r.n_len = as_count(j["n_len"], join_path(path, "n_len"));
    }
    if (j.contains("m_len")) {
      r.m_len = as_count(j["m_len"], join_path(path, "m_len"));
    }
  } else {
    for (const char* key : {"class_label", "n_len", "m_len"}) {
      if (j.contains(key)) {
        schema_fail(join_path(path, key), "not allowed on cluster regions");
      }
    }
    if (j.contains("points")) {
      const std::string pts_path = join_path(path, "points");
      const json& pts = as_array(j["points"], pts_path);
      for (std::size_t i = 0; i < pts.size(); ++i) {
        r.points.push_back(point_from_json(pts[i], index_path(pts_path, i)));
      }
    }
  }
  return r;
}

json counts_to_json(const PairCounts& c) {
  return {{"keypoints_q", c.keypoints_q},
          {"keypoints_r", c.keypoints_r},
          {"matched", c.matched},
          {"unmatched_in_mask", c.unmatched_in_mask},
          {"residual_after_removal", c.residual_after_removal}};
}

PairCounts counts_from_json(const json& j, const std::string& path) {
  PairCounts c;
  if (!j.is_object()) {
    schema_fail(path, "expected an object");
  }
  auto get = [&](const char* key, std::size_t& out) {
    if (j.contains(key)) {
      out = as_count(j[key], join_path(path, key));
    }
  };
  get("keypoints_q", c.keypoints_q);
  get("keypoints_r", c.keypoints_r);
  get("matched", c.matched);
  get("unmatched_in_mask", c.unmatched_in_mask);
  get("residual_after_removal", c.residual_after_removal);
  return c;
}

json pair_to_json(const PairReport& p) {
  json j = {{"query_id", p.query_id},
            {"reference_id", p.reference_id.empty() ? json(nullptr) : json(p.reference_id)},
            {"timestamp", p.timestamp},
            {"status", to_string(p.status)}};
  if (!p.stage.empty()) {
    j["stage"] = p.stage;
  }
  if (!p.message.empty()) {
    j["message"] = p.message;
  }
  j["mask"] = p.mask ? rect_to_json(*p.mask) : json(nullptr);
  j["position_gap"] = p.position_gap;
  j["yaw_gap"] = p.yaw_gap;
  json regions = json::array();
  for (const auto& r : p.regions) {
    regions.push_back(region_to_json(r));
  }
  j["regions"] = std::move(regions);
  j["counts"] = counts_to_json(p.counts);
  return j;
}

PairReport pair_from_json(const json& j, const std::string& path) {
  PairReport p;
  p.query_id = as_string(require(j, path, "query_id"), join_path(path, "query_id"));
  p.status = parse_status(require(j, path, "status"), join_path(path, "status"));
  p.reference_id = string_or(j, path, "reference_id", "");
  p.timestamp = number_or(j, path, "timestamp", 0.0);
  p.stage = string_or(j, path, "stage", "");
  p.message = string_or(j, path, "message", "");
  if (j.contains("mask") && !j["mask"].is_null()) {
    p.mask = rect_from_json(j["mask"], join_path(path, "mask"));
  }
  p.position_gap = number_or(j, path, "position_gap", 0.0);
  p.yaw_gap = number_or(j, path, "yaw_gap", 0.0);
  if (j.contains("regions")) {
    const std::string rpath = join_path(path, "regions");
    const json& regions = as_array(j["regions"], rpath);
    for (std::size_t i = 0; i < regions.size(); ++i) {
      p.regions.push_back(region_from_json(regions[i], index_path(rpath, i)));
    }
  }
  if (!p.regions.empty() && p.status != PairStatus::ok) {
    schema_fail(join_path(path, "regions"), "regions present on a pair whose status is not ok");
  }
  if (j.contains("counts")) {
    p.counts = counts_from_json(j["counts"], join_path(path, "counts"));
  }
  return p;
}

}  // namespace

std::string serialize_report(const AnomalyReport& report) {
  json pairs = json::array();
  for (const auto& p : report.pairs) {
    pairs.push_back(pair_to_json(p));
  }
  json doc = {{"schema_version", kReportSchemaVersion},
              {"run_id", report.run_id},
              {"reference_run", report.reference_run},
              {"query_run", report.query_run},
              {"calibration",
               {{"delta", report.calibration.delta},
                {"eps", report.calibration.eps},
                {"min_pts", report.calibration.min_pts}}},
              {"pairs", std::move(pairs)}};
  require_finite(doc, "");
  return doc.dump(2) + "\n";
}

AnomalyReport parse_report(std::string_view text) {
  const json doc = parse_document(text, "report");
  const auto version = as_int(require(doc, "", "schema_version"), "schema_version");
  if (version != kReportSchemaVersion) {
    schema_fail("schema_version", "unsupported version " + std::to_string(version));
  }
  AnomalyReport r;
  r.run_id = as_string(require(doc, "", "run_id"), "run_id");
  r.reference_run = string_or(doc, "", "reference_run", "");
  r.query_run = string_or(doc, "", "query_run", "");
  if (doc.contains("calibration")) {
    const json& c = doc["calibration"];
    if (!c.is_object()) {
      schema_fail("calibration", "expected an object");
    }
    r.calibration.delta = number_or(c, "calibration", "delta", 0.0);
    r.calibration.eps = number_or(c, "calibration", "eps", 0.0);
    if (c.contains("min_pts")) {
      r.calibration.min_pts = static_cast<int>(as_int(c["min_pts"], "calibration.min_pts"));
    }
  }
  if (doc.contains("pairs")) {
    const json& pairs = as_array(doc["pairs"], "pairs");
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      r.pairs.push_back(pair_from_json(pairs[i], index_path("pairs", i)));
    }
  }
  return r;
}

void save_report(const AnomalyReport& report, const std::filesystem::path& path) {
  write_file_atomic(path, serialize_report(report));
}

AnomalyReport load_report(const std::filesystem::path& path) {
  try {
    return parse_report(read_text_file(path));
  } catch (const SchemaError& e) {
    throw SchemaError(path.string() + ": " + e.what());
  }
}

}  // namespace driftwatch
