#include <cmath>
#include <limits>
#include <random>

#include <gtest/gtest.h>

#include "driftwatch/calibration.hpp"
#include "driftwatch/errors.hpp"
#include "driftwatch/scripted_backend.hpp"
#include "published_curves.hpp"
#include "oracles.hpp"
#include "scripted_mission.hpp"
#include "temp_dir.hpp"

using namespace driftwatch;
using namespace driftwatch::testing;

namespace {

std::vector<MatchedCoords> horizontal(std::initializer_list<double> distances) {
  std::vector<MatchedCoords> out;
  double y = 0.0;
  for (double d : distances) {
    out.push_back({{0.0, y}, {d, y}});
    y += 1.0;
  }
  return out;
}

PairStats stats(double cv, std::size_t matched) {
  PairStats s;
  s.cv = cv;
  s.matched = matched;
  s.defined = matched >= 2;
  return s;
}

std::vector<Point2> grid(int n, double spacing, Point2 origin = {}) {
  std::vector<Point2> pts;
  for (int y = 0; y < n; ++y) {
    for (int x = 0; x < n; ++x) {
      pts.push_back({origin.x + x * spacing, origin.y + y * spacing});
    }
  }
  return pts;
}

}  // namespace

TEST(PairCv, WorkedExample) {
  const auto s = pair_cv(horizontal({1.0, 2.0, 3.0}));
  EXPECT_EQ(s.matched, 3u);
  EXPECT_TRUE(s.defined);
  EXPECT_DOUBLE_EQ(s.mean, 2.0);
  EXPECT_NEAR(s.stddev, std::sqrt(2.0 / 3.0), 1e-12);
  EXPECT_NEAR(s.cv, 0.408248290463863, 1e-12);
}

TEST(PairCv, DegenerateCases) {
  EXPECT_FALSE(pair_cv(horizontal({4.0})).defined);
  EXPECT_FALSE(pair_cv({}).defined);
  const auto zero = pair_cv(horizontal({0.0, 0.0, 0.0}));
  EXPECT_TRUE(zero.defined);
  EXPECT_EQ(zero.cv, 0.0);
  const auto constant = pair_cv(horizontal({7.0, 7.0}));
  EXPECT_NEAR(constant.cv, 0.0, 1e-15);
}

TEST(PairCv, ScaleInvariantAndMatchesOracle) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-50.0, 50.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<MatchedCoords> m;
    for (int i = 0; i < 2 + trial % 9; ++i) {
      m.push_back({{u(rng), u(rng)}, {u(rng), u(rng)}});
    }
    const auto s = pair_cv(m);
    const auto o = oracle_pair_cv(m);
    EXPECT_NEAR(s.cv, o.cv, 1e-12);
    EXPECT_NEAR(s.mean, o.mu, 1e-9);
    auto scaled = m;
    for (auto& [a, b] : scaled) {
      a = {a.x * 3.5, a.y * 3.5};
      b = {b.x * 3.5, b.y * 3.5};
    }
    EXPECT_NEAR(pair_cv(scaled).cv, s.cv, 1e-12);
  }
}

TEST(BuildCurve, AveragesCvOverMatchCount) {
  const auto curve = build_curve({0.0}, {{stats(0.2, 100), stats(0.4, 100)}});
  ASSERT_EQ(curve.cv_values.size(), 1u);
  EXPECT_NEAR(curve.cv_values[0], 0.003, 1e-15);
  EXPECT_EQ(curve.pair_count, 2u);
  EXPECT_TRUE(curve.excluded.empty());
}

TEST(BuildCurve, ExcludesUndefinedPairsAndYieldsNaN) {
  const auto curve =
      build_curve({0.0, 0.5}, {{stats(0.2, 10), stats(0.9, 1)}, {stats(0.0, 1), stats(0.0, 0)}});
  EXPECT_NEAR(curve.cv_values[0], 0.02, 1e-15);
  EXPECT_TRUE(std::isnan(curve.cv_values[1]));
  const std::vector<Exclusion> expected{{0.0, 1}, {0.5, 0}, {0.5, 1}};
  EXPECT_EQ(curve.excluded, expected);
  EXPECT_THROW(build_curve({0.0, 0.5}, {{stats(0.1, 3)}}), InputError);
}

TEST(BuildCurve, AgreesWithOracle) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> cv(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> mp(0, 40);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<PairStats> row;
    std::vector<OracleCell> cells;
    for (int n = 0; n < 1 + trial % 7; ++n) {
      const auto s = stats(cv(rng), mp(rng));
      row.push_back(s);
      cells.push_back({s.cv, s.matched});
    }
    const double expected = oracle_curve_value(cells);
    const double got = build_curve({0.1}, {row}).cv_values[0];
    if (std::isnan(expected)) {
      EXPECT_TRUE(std::isnan(got));
    } else {
      EXPECT_NEAR(got, expected, 1e-12);
    }
  }
}

TEST(Knee, PublishedCurves) {
  const std::vector<double> xs(published::kThresholds.begin(), published::kThresholds.end());
  EXPECT_DOUBLE_EQ(find_knee(xs, published::kL515).x, 0.6);
  EXPECT_DOUBLE_EQ(find_knee(xs, published::kRgb1).x, 0.5);
  EXPECT_DOUBLE_EQ(find_knee(xs, published::kRgb2).x, 0.5);
}

TEST(Knee, TranslationAndScaleInvariant) {
  const std::vector<double> xs(published::kThresholds.begin(), published::kThresholds.end());
  std::vector<double> ys(published::kL515.begin(), published::kL515.end());
  for (auto& y : ys) {
    y = 4.0 * y + 12.5;
  }
  EXPECT_EQ(find_knee(xs, ys).index, 6u);
}

TEST(Knee, StraightLineIsDegenerate) {
  const std::vector<double> xs{0.0, 1.0, 2.0, 3.0};
  const std::vector<double> ys{1.0, 3.0, 5.0, 7.0};
  const auto k = find_knee(xs, ys);
  EXPECT_TRUE(k.degenerate);
  EXPECT_EQ(k.index, 0u);
}

TEST(Knee, RejectsShortOrMismatchedInput) {
  const std::vector<double> two{0.0, 1.0};
  const std::vector<double> three{0.0, 1.0, 2.0};
  EXPECT_THROW(find_knee(two, two), InputError);
  EXPECT_THROW(find_knee(three, two), InputError);
}

TEST(Knee, SkipsUndefinedThresholds) {
  CalibrationCurve curve;
  curve.thresholds = {0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  curve.cv_values.assign(published::kL515.begin(), published::kL515.end());
  curve.cv_values[2] = std::numeric_limits<double>::quiet_NaN();
  EXPECT_EQ(knee(curve).index, 6u);
}

TEST(Eps, GridKneeIsSpacing) {
  const std::vector<std::vector<Point2>> one{grid(10, 10.0)};
  EXPECT_NEAR(calibrate_eps(one, 4), 10.0, 1e-9);
  const std::vector<std::vector<Point2>> two{grid(10, 6.0), grid(10, 10.0, {500, 500})};
  EXPECT_NEAR(calibrate_eps(two, 4), 8.0, 1e-9);
}

TEST(Eps, SkipsSmallSetsAndValidates) {
  const std::vector<std::vector<Point2>> sets{{{0, 0}, {1, 1}}, grid(10, 10.0)};
  EXPECT_NEAR(calibrate_eps(sets, 4), 10.0, 1e-9);
  const std::vector<std::vector<Point2>> tiny{{{0, 0}, {1, 1}}};
  EXPECT_THROW(calibrate_eps(tiny, 4), InputError);
  EXPECT_THROW(calibrate_eps(sets, 1), InputError);
}

TEST(KDistances, AscendingKthNeighbour) {
  const std::vector<Point2> pts{{0, 0}, {1, 0}, {3, 0}};
  EXPECT_EQ(k_distances(pts, 1), (std::vector<double>{1.0, 1.0, 2.0}));
  EXPECT_EQ(k_distances(pts, 2), (std::vector<double>{2.0, 3.0, 3.0}));
  EXPECT_THROW(k_distances(pts, 3), InputError);
}

TEST(CalibrationFile, RoundTrip) {
  CalibrationResult r;
  r.selected_delta = 0.6;
  r.eps = 12.25;
  r.min_pts = 5;
  r.curve = build_curve({0.0, 0.5}, {{stats(0.2, 10)}, {stats(0.1, 1)}});
  TempDir dir;
  save_calibration(r, dir / "c.json");
  const auto back = load_calibration(dir / "c.json");
  EXPECT_EQ(back.selected_delta, 0.6);
  EXPECT_EQ(back.eps, 12.25);
  EXPECT_EQ(back.min_pts, 5);
  EXPECT_EQ(back.curve.thresholds, r.curve.thresholds);
  EXPECT_EQ(back.curve.cv_values[0], r.curve.cv_values[0]);
  EXPECT_TRUE(std::isnan(back.curve.cv_values[1]));
  EXPECT_EQ(back.curve.excluded, r.curve.excluded);
  EXPECT_EQ(serialize_calibration(back), serialize_calibration(r));
}

TEST(CalibrationFile, RejectsBadValues) {
  EXPECT_THROW(parse_calibration(R"({"schema_version":1,"delta":1.2,"eps":3,"min_pts":5})"), SchemaError);
  EXPECT_THROW(parse_calibration(R"({"schema_version":1,"delta":0.5,"eps":0,"min_pts":5})"), SchemaError);
  EXPECT_THROW(parse_calibration(R"({"schema_version":9,"delta":0.5,"eps":3,"min_pts":5})"), SchemaError);
  EXPECT_THROW(parse_calibration(R"({"schema_version":1,"eps":3,"min_pts":5})"), SchemaError);
  const auto minimal = parse_calibration(R"({"schema_version":1,"delta":0.5,"eps":3,"min_pts":5})");
  EXPECT_TRUE(minimal.curve.thresholds.empty());
}

TEST(Thresholds, GridAndListParsing) {
  EXPECT_EQ(default_thresholds().size(), 10u);
  EXPECT_EQ(default_thresholds().back(), 0.9);
  EXPECT_EQ(parse_thresholds("0.0:0.9:0.1"), default_thresholds());
  EXPECT_EQ(parse_thresholds("0.1,0.5,0.7"), (std::vector<double>{0.1, 0.5, 0.7}));
  EXPECT_EQ(parse_thresholds("0.3:0.5:0.1"), (std::vector<double>{0.3, 0.4, 0.5}));
  EXPECT_THROW(parse_thresholds("0.5,0.1"), InputError);
  EXPECT_THROW(parse_thresholds("0.1,1.0"), InputError);
  EXPECT_THROW(parse_thresholds("a:b:c"), InputError);
  EXPECT_THROW(parse_thresholds(""), InputError);
}

TEST(Sweep, ScriptedPairReproducesSeries) {
  TempDir dir;
  write_curve_fixture(dir.path(), published::kL515);
  const auto pairs = load_calibration_pairs(dir / "pairs");
  ScriptedBackend be{ScriptedFixture::load(dir / "fixture.json")};
  const auto thresholds = default_thresholds();
  const auto curve = sweep(pairs, thresholds, be);
  for (std::size_t t = 0; t < thresholds.size(); ++t) {
    EXPECT_NEAR(curve.cv_values[t], published::kL515[t], 1e-6);
    EXPECT_EQ(curve.per_pair[t][0].matched, 3u);
  }
  EXPECT_DOUBLE_EQ(curve.thresholds[knee(curve).index], 0.6);
}

TEST(Sweep, BackendMissNamesPair) {
  TempDir dir;
  write_curve_fixture(dir.path(), published::kL515);
  const auto pairs = load_calibration_pairs(dir / "pairs");
  ScriptedBackend be{ScriptedFixture{}};
  try {
    sweep(pairs, default_thresholds(), be);
    FAIL() << "expected BackendError";
  } catch (const BackendError& e) {
    EXPECT_NE(std::string(e.what()).find("pair 0"), std::string::npos);
  }
  EXPECT_THROW(sweep({}, default_thresholds(), be), InputError);
}
