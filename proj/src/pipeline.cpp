#include "driftwatch/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <map>
#include <thread>

#include "driftwatch/errors.hpp"

namespace driftwatch {

void PipelineConfig::validate() const {
  pairing.validate();
  cluster.validate();
  if (!(match_threshold >= 0.0 && match_threshold < 1.0)) {
    throw InputError("match threshold must be in [0, 1)");
  }
  if (jobs == 0) {
    throw InputError("jobs must be >= 1");
  }
}

namespace {

PairReport failed(PairReport report, const std::string& stage, const std::string& message) {
  report.status = PairStatus::backend_error;
  report.stage = stage;
  report.message = message;
  report.regions.clear();
  return report;
}

std::size_t mask_area(const BitMask& m) {
  return static_cast<std::size_t>(std::count(m.bits.begin(), m.bits.end(), std::uint8_t{1}));
}

}  // namespace

PairReport detect_images(const std::string& reference_id, const GrayImage& reference, const std::string& query_id,
                         const GrayImage& query, const PipelineConfig& cfg, const Providers& providers) {
  PairReport report;
  report.query_id = query_id;
  report.reference_id = reference_id;

  Features fr;
  Features fq;
  try {
    fr = providers.features.extract(reference_id, reference);
    fq = providers.features.extract(query_id, query);
  } catch (const Error& e) {
    return failed(std::move(report), "extract", e.what());
  }
  report.counts.keypoints_r = fr.keypoints.size();
  report.counts.keypoints_q = fq.keypoints.size();

  MatchResult m;
  try {
    m = providers.features.match(fr, fq, cfg.match_threshold);
  } catch (const Error& e) {
    return failed(std::move(report), "match", e.what());
  }
  report.counts.matched = m.matches.size();

  std::vector<Point2> matched_q;
  matched_q.reserve(m.matches.size());
  for (const auto& mm : m.matches) {
    matched_q.push_back(fq.keypoints[mm.index_b].point());
  }
  std::vector<Point2> unmatched_q;
  unmatched_q.reserve(m.unmatched_b.size());
  for (std::size_t i : m.unmatched_b) {
    unmatched_q.push_back(fq.keypoints[i].point());
  }

  const auto mask = overlap_mask(matched_q, cfg.min_matches);
  if (!mask) {
    report.status = PairStatus::no_overlap;
    report.message = std::to_string(matched_q.size()) + " matches, need " + std::to_string(cfg.min_matches);
    return report;
  }
  report.mask = mask;
  const auto matched_in = filter_points(matched_q, *mask).inside;
  const auto unmatched_in = filter_points(unmatched_q, *mask).inside;
  report.counts.unmatched_in_mask = unmatched_in.size();

  std::vector<InstanceMask> instances;
  try {
    instances = providers.segmenter.segment(query_id, query);
  } catch (const Error& e) {
    return failed(std::move(report), "segment", e.what());
  }
  std::erase_if(instances, [&](const InstanceMask& inst) { return inst.score < cfg.min_instance_score; });

  std::vector<std::pair<std::size_t, AnomalyRegion>> voted;
  std::vector<InstanceMask> removal;
  for (const auto& inst : instances) {
    const SegmentVote v = vote(inst, matched_in, unmatched_in);
    if (v.is_anomaly) {
      AnomalyRegion r;
      r.source = RegionSource::segment_vote;
      r.bbox = inst.bbox;
      r.score = inst.score;
      r.class_label = inst.class_label;
      r.n_len = v.n_len;
      r.m_len = v.m_len;
      voted.emplace_back(mask_area(inst.mask), std::move(r));
    }
    if (v.is_anomaly || cfg.removal_scope == RemovalScope::all_instances) {
      removal.push_back(inst);
    }
  }
  std::stable_sort(voted.begin(), voted.end(), [](const auto& a, const auto& b) { return a.first > b.first; });

  const auto residual = remove_segmented(unmatched_in, removal);
  report.counts.residual_after_removal = residual.size();

  for (auto& [area, region] : voted) {
    report.regions.push_back(std::move(region));
  }
  for (auto& region : cluster_regions(dbscan(residual, cfg.cluster), residual)) {
    report.regions.push_back(std::move(region));
  }
  report.status = PairStatus::ok;
  return report;
}

PairReport detect_pair(const ImagePair& pair, const PipelineConfig& cfg, const Providers& providers) {
  PairReport report;
  GrayImage ref;
  GrayImage qry;
  try {
    ref = read_png(pair.reference.image_path);
    qry = read_png(pair.query.image_path);
  } catch (const Error& e) {
    report = failed(PairReport{}, "decode", e.what());
    report.query_id = pair.query.image_id;
    report.reference_id = pair.reference.image_id;
  }
  if (report.stage.empty()) {
    report = detect_images(pair.reference.image_id, ref, pair.query.image_id, qry, cfg, providers);
  }
  report.timestamp = pair.query.pose.timestamp;
  report.position_gap = pair.position_gap;
  report.yaw_gap = pair.yaw_gap;
  return report;
}

AnomalyReport run_mission(const RunDataset& reference, const RunDataset& query, PipelineConfig cfg,
                          const CalibrationResult& calibration, const Providers& providers) {
  cfg.match_threshold = calibration.selected_delta;
  cfg.cluster.eps = calibration.eps;
  cfg.cluster.min_pts = static_cast<std::size_t>(calibration.min_pts);
  cfg.validate();

  AnomalyReport report;
  report.run_id = reference.run_id + "__" + query.run_id;
  report.reference_run = reference.run_id;
  report.query_run = query.run_id;
  report.calibration = {calibration.selected_delta, calibration.eps, calibration.min_pts};
  if (query.records.empty()) {
    return report;
  }
  if (reference.records.empty()) {
    throw InputError("reference run \"" + reference.run_id + "\" has no images");
  }

  const PairingResult pairing = pair_images(reference, query, cfg.pairing);
  std::vector<PairReport> detected(pairing.pairs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < pairing.pairs.size(); i = next++) {
      detected[i] = detect_pair(pairing.pairs[i], cfg, providers);
    }
  };
  const std::size_t threads = std::min(cfg.jobs, pairing.pairs.size());
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) {
      pool.emplace_back(worker);
    }
  }

  std::map<std::string, PairReport*> by_query;
  for (auto& d : detected) {
    by_query[d.query_id] = &d;
  }
  for (const auto& q : query.records) {
    auto it = by_query.find(q.image_id);
    if (it != by_query.end()) {
      report.pairs.push_back(std::move(*it->second));
    } else {
      PairReport u;
      u.query_id = q.image_id;
      u.timestamp = q.pose.timestamp;
      u.status = PairStatus::unpaired;
      u.message = "no reference within distance and heading thresholds";
      report.pairs.push_back(std::move(u));
    }
  }
  return report;
}

}  // namespace driftwatch
