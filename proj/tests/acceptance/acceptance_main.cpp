// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <httplib.h>

#include "cli.hpp"
#include "driftwatch/atomic_file.hpp"
#include "driftwatch/calibration.hpp"
#include "driftwatch/clustering.hpp"
#include "driftwatch/errors.hpp"
#include "driftwatch/evaluation.hpp"
#include "driftwatch/native_backend.hpp"
#include "driftwatch/pipeline.hpp"
#include "driftwatch/remote.hpp"
#include "driftwatch/report.hpp"
#include "driftwatch/scripted_backend.hpp"
#include "driftwatch/segmentation.hpp"
#include "driftwatch/synthgen.hpp"
#include "driftwatch/wire.hpp"
#include "published_curves.hpp"
#include "oracles.hpp"
#include "scripted_mission.hpp"
#include "stub_service.hpp"
#include "temp_dir.hpp"

using namespace driftwatch;
using namespace driftwatch::testing;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  std::string name;
  double budget_s;
  std::function<Outcome()> body;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// Calibration inputs shared by the calibration and detection criteria.
constexpr int kCalibrationNoise = 45;
constexpr int kSceneNoise = 3;
constexpr int kJitter = 3;
constexpr int kShift = 12;
constexpr std::size_t kPairsPerSeed = 3;
constexpr std::size_t kMinPts = 5;

SceneSpec calibration_scene(std::uint64_t seed) {
  SceneSpec spec = random_scene(seed, 320, 240, 3, {});
  spec.noise = kCalibrationNoise;
  return spec;
}

struct CalibrationRun {
  CalibrationResult result;
  std::vector<PairStats> at_knee;
};

CalibrationRun calibrate_native(std::uint64_t seed, const NativeBackend& be) {
  const auto shifted = generate_calibration_pairs(seed, kShift, kPairsPerSeed, calibration_scene(seed));
  std::vector<CalibrationPair> pairs;
  for (std::size_t i = 0; i < shifted.size(); ++i) {
    pairs.push_back({"a" + std::to_string(i), shifted[i].a, "b" + std::to_string(i), shifted[i].b});
  }
  const auto thresholds = default_thresholds();
  CalibrationRun run;
  run.result.curve = sweep(pairs, thresholds, be);
  const auto k = knee(run.result.curve);
  run.result.selected_delta = run.result.curve.thresholds[k.index];
  run.result.degenerate_knee = k.degenerate;
  run.at_knee = run.result.curve.per_pair[k.index];
  std::vector<std::vector<Point2>> sets;
  for (const auto& p : pairs) {
    std::vector<Point2> pts;
    for (const auto& kp : be.extract(p.id_b, p.image_b).keypoints) {
      pts.push_back(kp.point());
    }
    sets.push_back(std::move(pts));
  }
  run.result.eps = calibrate_eps(sets, kMinPts);
  run.result.min_pts = static_cast<int>(kMinPts);
  return run;
}

Outcome knee_reproduction() {
  const std::vector<double> xs(published::kThresholds.begin(), published::kThresholds.end());
  const double l515 = find_knee(xs, published::kL515).x;
  const double rgb1 = find_knee(xs, published::kRgb1).x;
  const double rgb2 = find_knee(xs, published::kRgb2).x;
  const bool ok = l515 == 0.6 && rgb1 == 0.5 && rgb2 == 0.5;
  return {ok, "L515 " + fmt("%.1f", l515) + ", RGB_1 " + fmt("%.1f", rgb1) + ", RGB_2 " + fmt("%.1f", rgb2)};
}

Outcome cv_oracle() {
  std::mt19937_64 rng(20240601);
  std::uniform_real_distribution<double> coord(-500.0, 500.0);
  std::uniform_int_distribution<int> count(0, 60);
  std::uniform_real_distribution<double> cv(0.0, 2.0);
  std::uniform_int_distribution<std::size_t> mp(0, 300);
  double worst = 0.0;
  std::size_t mismatches = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<MatchedCoords> m(static_cast<std::size_t>(count(rng)));
    for (auto& [a, b] : m) {
      a = {coord(rng), coord(rng)};
      b = {a.x + coord(rng) / 20.0, a.y + coord(rng) / 20.0};
    }
    const auto s = pair_cv(m);
    const auto o = oracle_pair_cv(m);
    const double d = std::abs(s.cv - o.cv);
    worst = std::max(worst, d);
    mismatches += d > 1e-12 || s.defined != o.defined;

    const std::size_t thresholds = 1 + trial % 10;
    const std::size_t pairs = 1 + trial % 7;
    std::vector<double> ts;
    std::vector<std::vector<PairStats>> matrix(thresholds);
    std::vector<std::vector<OracleCell>> cells(thresholds);
    for (std::size_t t = 0; t < thresholds; ++t) {
      ts.push_back(0.05 * static_cast<double>(t));
      for (std::size_t n = 0; n < pairs; ++n) {
        PairStats ps;
        ps.cv = cv(rng);
        ps.matched = mp(rng) % (trial % 3 == 0 ? 3 : 300);
        ps.defined = ps.matched >= 2;
        matrix[t].push_back(ps);
        cells[t].push_back({ps.cv, ps.matched});
      }
    }
    const auto curve = build_curve(ts, matrix);
    for (std::size_t t = 0; t < thresholds; ++t) {
      const double expected = oracle_curve_value(cells[t]);
      if (std::isnan(expected) != std::isnan(curve.cv_values[t])) {
        ++mismatches;
      } else if (!std::isnan(expected)) {
        const double e = std::abs(expected - curve.cv_values[t]);
        worst = std::max(worst, e);
        mismatches += e > 1e-12;
      }
    }
  }
  return {mismatches == 0, "1000 sets, max |diff| " + fmt("%.2e", worst) + ", mismatches " + std::to_string(mismatches)};
}

Outcome dbscan_oracle() {
  std::mt19937_64 rng(777);
  const std::vector<double> eps_grid{2.0, 5.0, 8.0, 15.0};
  const std::vector<std::size_t> min_pts_grid{2, 3, 5, 8};
  std::size_t mismatches = 0;
  std::size_t clusters = 0;
  for (int inst = 0; inst < 200; ++inst) {
    std::uniform_int_distribution<int> size(0, 200);
    std::uniform_real_distribution<double> u(0.0, 150.0);
    std::normal_distribution<double> g(0.0, 3.0 + inst % 5);
    std::vector<Point2> pts;
    const int n = size(rng);
    const int blobs = 1 + inst % 4;
    std::vector<Point2> centres;
    for (int b = 0; b < blobs; ++b) {
      centres.push_back({u(rng), u(rng)});
    }
    for (int i = 0; i < n; ++i) {
      if (i % 3 == 0) {
        pts.push_back({u(rng), u(rng)});
      } else {
        const auto& c = centres[static_cast<std::size_t>(i) % centres.size()];
        // Integer grid coordinates make exact-eps boundary distances common.
        pts.push_back({std::round(c.x + g(rng)), std::round(c.y + g(rng))});
      }
    }
    const double eps = eps_grid[static_cast<std::size_t>(inst) % eps_grid.size()];
    const std::size_t min_pts = min_pts_grid[static_cast<std::size_t>(inst / 4) % min_pts_grid.size()];
    const auto c = dbscan(pts, {eps, min_pts});
    clusters += c.clusters.size();
    mismatches += !same_partition(c, oracle_dbscan(pts, eps, min_pts));
  }
  return {mismatches == 0, "200 instances, " + std::to_string(clusters) + " clusters, mismatches " +
                               std::to_string(mismatches)};
}

Outcome calibration_end_to_end() {
  NativeBackend be{NativeOptions{}};
  std::size_t failures = 0;
  double worst_mu = 0.0;
  std::ostringstream deltas;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto run = calibrate_native(seed, be);
    const auto& curve = run.result.curve;
    const std::size_t k = static_cast<std::size_t>(std::lround(run.result.selected_delta * 10));
    bool ok = !run.result.degenerate_knee && curve.cv_values[k] <= curve.cv_values.back();
    for (const auto& s : run.at_knee) {
      ok = ok && s.defined;
      worst_mu = std::max(worst_mu, std::abs(s.mean - kShift));
      ok = ok && std::abs(s.mean - kShift) <= 1.0;
    }
    failures += !ok;
    deltas << (seed > 1 ? "," : "") << fmt("%.1f", run.result.selected_delta);
  }
  return {failures == 0, "20 seeds, failures " + std::to_string(failures) + ", max |mu-12| " + fmt("%.3f", worst_mu) +
                             ", delta* {" + deltas.str() + "}"};
}

Outcome planted_detection() {
  NativeBackend be{NativeOptions{}};
  NullSegmenter seg;
  const auto cal = calibrate_native(1000, be).result;

  struct Frame {
    std::string id;
    Scenario scenario;
  };
  std::vector<Frame> frames;
  GroundTruth truth;
  const std::vector<EditKind> kinds{EditKind::insert, EditKind::remove, EditKind::move};
  for (std::size_t i = 0; i < 100; ++i) {
    const bool anomalous = i < 50;
    SceneSpec spec =
        random_scene(5000 + i, 320, 240, 3, anomalous ? std::vector<EditKind>{kinds[i % 3]} : std::vector<EditKind>{});
    spec.noise = kSceneNoise;
    spec.max_jitter_px = kJitter;
    Frame f{(anomalous ? "anomalous_" : "clean_") + std::to_string(i), generate_scenario(spec)};
    truth.frames[f.id] = f.scenario.truth;
    frames.push_back(std::move(f));
  }

  auto run_at = [&](double delta) {
    PipelineConfig cfg;
    cfg.match_threshold = delta;
    cfg.cluster = {cal.eps, kMinPts};
    AnomalyReport report;
    report.run_id = "acceptance";
    for (std::size_t i = 0; i < frames.size(); ++i) {
      auto p = detect_images("ref", frames[i].scenario.reference, frames[i].id, frames[i].scenario.query, cfg, {be, seg});
      p.timestamp = static_cast<double>(i);
      report.pairs.push_back(std::move(p));
    }
    return evaluate(report, truth);
  };
  const auto at_star = run_at(cal.selected_delta);
  const auto at_low = run_at(0.2);
  const auto at_high = run_at(0.9);
  const double fp_rate =
      static_cast<double>(at_star.false_positive_frames) / static_cast<double>(at_star.clean_frames);
  const bool ok = at_star.recall >= 0.9 && fp_rate <= 0.1 && at_star.accuracy >= at_low.accuracy &&
                  at_star.accuracy >= at_high.accuracy;
  return {ok, "delta* " + fmt("%.1f", cal.selected_delta) + " eps " + fmt("%.2f", cal.eps) + ": recall " +
                  fmt("%.2f", at_star.recall) + ", fp rate " + fmt("%.2f", fp_rate) + ", accuracy " +
                  fmt("%.2f", at_star.accuracy) + " vs " + fmt("%.2f", at_low.accuracy) + " (0.2), " +
                  fmt("%.2f", at_high.accuracy) + " (0.9)"};
}

Outcome vote_rule() {
  std::mt19937_64 rng(31);
  std::uniform_int_distribution<std::size_t> u(0, 1000);
  std::size_t wrong = 0;
  for (int i = 0; i < 100000; ++i) {
    const std::size_t m = u(rng);
    const std::size_t n = i % 3 == 0 ? m : (i % 3 == 1 ? m + 1 : u(rng));
    const bool expected = static_cast<long long>(n) - static_cast<long long>(m) >= 1;
    wrong += is_anomalous(n, m) != expected;
  }
  // The same rule through vote() on real masks.
  InstanceMask inst;
  inst.mask = BitMask(10, 10);
  for (int y = 0; y < 5; ++y) {
    for (int x = 0; x < 5; ++x) {
      inst.mask.set(x, y);
    }
  }
  for (std::size_t n = 0; n < 6; ++n) {
    for (std::size_t m = 0; m < 6; ++m) {
      std::vector<Point2> un(n, Point2{2, 2});
      std::vector<Point2> ma(m, Point2{1, 3});
      un.push_back({8, 8});
      wrong += vote(inst, ma, un).is_anomaly != (n >= m + 1);
    }
  }
  const bool boundaries = !is_anomalous(4, 4) && is_anomalous(5, 4) && !is_anomalous(0, 0) && is_anomalous(1, 0);
  return {wrong == 0 && boundaries, "100036 cases, wrong " + std::to_string(wrong)};
}

Outcome determinism_and_round_trips() {
  TempDir dir("accept_det");
  ScriptedMissionSpec spec;
  spec.frames = 40;
  spec.anomalous = {2, 5, 9, 13, 21, 22, 30, 37};
  spec.segmented = {5, 21, 30};
  const auto m = write_scripted_mission(dir.path(), spec);
  auto scan = [&](const std::string& jobs, const std::string& out) {
    std::ostringstream o;
    std::ostringstream e;
    return cli::run({"scan", "--reference", m.reference.string(), "--query", m.query.string(), "--calib",
                     m.calibration.string(), "--out", (dir / out).string(), "--backend", "scripted", "--fixture",
                     m.fixture.string(), "--jobs", jobs},
                    o, e);
  };
  if (scan("1", "r1.json") != 0 || scan("8", "r8.json") != 0) {
    return {false, "scan failed"};
  }
  const std::string r1 = read_text_file(dir / "r1.json");
  const bool identical = r1 == read_text_file(dir / "r8.json");

  const auto report = load_report(dir / "r1.json");
  save_report(report, dir / "again.json");
  bool trips = read_text_file(dir / "again.json") == r1 && load_report(dir / "again.json") == report;
  const auto cal = load_calibration(m.calibration);
  trips = trips && serialize_calibration(parse_calibration(serialize_calibration(cal))) == serialize_calibration(cal);
  const auto truth = load_truth(m.truth);
  trips = trips && parse_truth(serialize_truth(truth)) == truth;
  const auto fx = ScriptedFixture::load(m.fixture);
  trips = trips && ScriptedFixture::from_json(fx.to_json()).to_json() == fx.to_json();
  const auto ev = evaluate(report, truth);
  return {identical && trips && ev.accuracy == 1.0,
          std::string("jobs 1 vs 8 ") + (identical ? "identical" : "DIFFER") + ", round trips " +
              (trips ? "exact" : "BROKEN") + ", scripted accuracy " + fmt("%.2f", ev.accuracy)};
}

Outcome remote_contract() {
  StubService stub;
  RemoteOptions opts;
  opts.base_url = stub.base_url();
  opts.timeout_seconds = 10.0;
  RemoteBackend be(opts);
  RemoteSegmenter seg(opts);
  std::vector<std::string> failed;
  auto check = [&](bool ok, const std::string& what) {
    if (!ok) {
      failed.push_back(what);
    }
  };
  auto throws_backend = [](const std::function<void()>& f) {
    try {
      f();
    } catch (const BackendError&) {
      return true;
    } catch (...) {
      return false;
    }
    return false;
  };

  check(service_health(ServiceClient(opts)).status == "ok", "health");
  SceneSpec spec = random_scene(3, 240, 180, 3, {EditKind::insert});
  spec.noise = 5;
  const auto s = generate_scenario(spec);
  const auto fa = be.extract("a", s.reference);
  const auto fb = be.extract("b", s.query);
  check(!fa.keypoints.empty() && fa.descriptors.size() == fa.keypoints.size(), "extract shape");
  check(be.extract("a", s.reference) == fa, "extract determinism");
  check(be.match(fa, fa, 0.5).matches.size() >= fa.keypoints.size() * 9 / 10, "self match");
  std::size_t prev = SIZE_MAX;
  for (double t : {0.0, 0.5, 0.8, 0.9}) {
    const auto m = be.match(fa, fb, t);
    bool ok = m.matches.size() <= prev && m.matches.size() + m.unmatched_a.size() == fa.keypoints.size() &&
              m.matches.size() + m.unmatched_b.size() == fb.keypoints.size();
    for (const auto& mm : m.matches) {
      ok = ok && mm.confidence >= t;
    }
    check(ok, "match at " + fmt("%.1f", t));
    prev = m.matches.size();
  }
  GrayImage bright(64, 48, 20);
  for (int y = 10; y < 20; ++y) {
    for (int x = 10; x < 30; ++x) {
      bright.at(x, y) = 240;
    }
  }
  const auto inst = seg.segment("q", bright);
  check(inst.size() == 1 && inst[0].bbox == RectMask{10, 10, 29, 19} && inst[0].mask.width == 64, "segment");

  httplib::Client raw(stub.base_url());
  auto status = [&](const std::string& path, const std::string& body) {
    auto r = raw.Post(path, body, "application/json");
    return r ? r->status : -1;
  };
  const nlohmann::json side = wire::features_to_json(fa);
  check(status("/v1/extract", "{}") == 400, "extract 400");
  check(status("/v1/match", nlohmann::json{{"a", side}, {"b", side}, {"match_threshold", 1.0}}.dump()) == 422,
        "match 422");

  using F = StubService::Fault;
  for (F f : {F::server_error, F::not_json, F::missing_field}) {
    stub.set_fault(f);
    check(throws_backend([&] { be.extract("a", s.reference); }), "extract fault");
    check(throws_backend([&] { be.match(fa, fb, 0.5); }), "match fault");
    check(throws_backend([&] { seg.segment("q", bright); }), "segment fault");
  }
  for (F f : {F::low_confidence, F::duplicate_index}) {
    stub.set_fault(f);
    check(throws_backend([&] { be.match(fa, fb, 0.5); }), "match protocol");
  }
  stub.set_fault(F::wrong_mask_size);
  check(throws_backend([&] { seg.segment("q", bright); }), "mask size");
  stub.set_fault(F::unhealthy);
  check(throws_backend([&] { service_health(ServiceClient(opts)); }), "unhealthy");
  stub.set_fault(F::none);

  RemoteOptions down;
  down.base_url = "http://127.0.0.1:" + std::to_string(unused_port());
  down.timeout_seconds = 2.0;
  check(throws_backend([&] { RemoteBackend(down).extract("a", s.reference); }), "transport");

  std::string detail = std::to_string(stub.requests()) + " requests";
  for (const auto& f : failed) {
    detail += ", failed: " + f;
  }
  return {failed.empty(), detail};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {"knee-reproduction", 1.0, knee_reproduction},
      {"cv-aggregation-oracle", 5.0, cv_oracle},
      {"dbscan-oracle", 30.0, dbscan_oracle},
      {"calibration-synthetic-shift", 120.0, calibration_end_to_end},
      {"planted-anomaly-detection", 600.0, planted_detection},
      {"vote-rule", 1.0, vote_rule},
      {"determinism-round-trip", 60.0, determinism_and_round_trips},
      {"remote-contract", 30.0, remote_contract},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.body();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs <= c.budget_s;
    const bool pass = o.pass && in_time;
    failures += !pass;
    std::printf("%s %s: %s [%.2fs / %.0fs budget%s]\n", pass ? "PASS" : "FAIL", c.name.c_str(), o.detail.c_str(), secs,
                c.budget_s, in_time ? "" : ", OVER BUDGET");
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
