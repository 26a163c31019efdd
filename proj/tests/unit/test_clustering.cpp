#include <algorithm>
#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "driftwatch/clustering.hpp"
#include "driftwatch/errors.hpp"
#include "oracles.hpp"

using namespace driftwatch;
using namespace driftwatch::testing;

TEST(Dbscan, EmptyInput) {
  const auto c = dbscan({}, ClusterConfig{});
  EXPECT_TRUE(c.clusters.empty());
  EXPECT_TRUE(c.noise.empty());
  EXPECT_TRUE(cluster_regions(c, {}).empty());
}

TEST(Dbscan, CompactDiscFormsOneCluster) {
  std::vector<Point2> pts;
  for (int i = 0; i < 6; ++i) {
    const double a = i * M_PI / 3.0;
    pts.push_back({50 + 3 * std::cos(a), 50 + 3 * std::sin(a)});
  }
  pts.push_back({200, 200});
  const auto c = dbscan(pts, {10.0, 5});
  ASSERT_EQ(c.clusters.size(), 1u);
  EXPECT_EQ(c.clusters[0], (std::vector<std::size_t>{0, 1, 2, 3, 4, 5}));
  EXPECT_EQ(c.noise, (std::vector<std::size_t>{6}));
}

TEST(Dbscan, MinPtsCountsThePointItselfAndBallIsClosed) {
  // Three collinear points 5 apart: the middle has exactly 3 within eps = 5.
  const std::vector<Point2> pts{{0, 0}, {5, 0}, {10, 0}};
  const auto c = dbscan(pts, {5.0, 3});
  ASSERT_EQ(c.clusters.size(), 1u);
  EXPECT_EQ(c.clusters[0].size(), 3u);
  EXPECT_TRUE(c.core[1]);
  EXPECT_FALSE(c.core[0]);
  EXPECT_TRUE(dbscan(pts, {4.999, 3}).clusters.empty());
}

TEST(Dbscan, AgreesWithOracle) {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 40; ++trial) {
    std::uniform_real_distribution<double> u(0.0, 100.0);
    std::normal_distribution<double> g(0.0, 4.0);
    std::vector<Point2> pts;
    for (int blob = 0; blob < 3; ++blob) {
      const Point2 c{u(rng), u(rng)};
      for (int i = 0; i < 15; ++i) {
        pts.push_back({c.x + g(rng), c.y + g(rng)});
      }
    }
    for (int i = 0; i < 20; ++i) {
      pts.push_back({u(rng), u(rng)});
    }
    const double eps = 3.0 + trial % 8;
    const std::size_t min_pts = 2 + trial % 6;
    const auto c = dbscan(pts, {eps, min_pts});
    EXPECT_TRUE(same_partition(c, oracle_dbscan(pts, eps, min_pts))) << "trial " << trial;
  }
}

TEST(Regions, BoundingBoxScoreAndOrder) {
  std::vector<Point2> pts{{10, 10}, {20, 30}, {15, 20}, {12, 25}, {18, 11}};
  for (int i = 0; i < 8; ++i) {
    pts.push_back({100.0 + i, 100.0});
  }
  const auto c = dbscan(pts, {25.0, 3});
  const auto r = cluster_regions(c, pts);
  ASSERT_EQ(r.size(), 2u);
  EXPECT_EQ(r[0].points.size(), 8u);
  EXPECT_EQ(r[1].bbox, (RectMask{10, 10, 20, 30}));
  EXPECT_EQ(r[1].source, RegionSource::cluster);
  EXPECT_FALSE(r[1].class_label.has_value());
  for (const auto& region : r) {
    EXPECT_GT(region.score, 0.0);
    EXPECT_LE(region.score, 1.0);
  }
}

TEST(Dbscan, LargerEpsNeverAddsNoise) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 60.0);
  std::vector<Point2> pts(80);
  for (auto& p : pts) {
    p = {u(rng), u(rng)};
  }
  std::size_t prev = pts.size() + 1;
  for (double eps : {1.0, 2.0, 4.0, 6.0, 8.0, 12.0}) {
    const auto n = dbscan(pts, {eps, 4}).noise.size();
    EXPECT_LE(n, prev);
    prev = n;
  }
}

TEST(ClusterConfig, Validation) {
  EXPECT_THROW((ClusterConfig{0.0, 5}.validate()), InputError);
  EXPECT_THROW((ClusterConfig{1.0, 1}.validate()), InputError);
  EXPECT_NO_THROW((ClusterConfig{1.0, 2}.validate()));
}
