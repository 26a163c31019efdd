#include <algorithm>
#include <bit>
#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "driftwatch/errors.hpp"
#include "driftwatch/native_backend.hpp"
#include "driftwatch/synthgen.hpp"

using namespace driftwatch;

namespace {

GrayImage square_image() {
  GrayImage img(100, 100, 40);
  for (int y = 30; y < 70; ++y) {
    for (int x = 30; x < 70; ++x) {
      img.at(x, y) = 210;
    }
  }
  return img;
}

GrayImage textured(std::uint64_t seed, int noise = 0) {
  SceneSpec spec = random_scene(seed, 160, 120, 2, {});
  spec.noise = noise;
  return generate_scenario(spec).reference;
}

Features random_binary(std::mt19937_64& rng, std::size_t n, bool high_half) {
  Features f;
  f.image_id = high_half ? "a" : "b";
  f.descriptors.kind = DescriptorKind::binary;
  f.descriptors.dim = 256;
  for (std::size_t i = 0; i < n; ++i) {
    f.keypoints.push_back({double(i), 0.0, 0.5});
    for (int byte = 0; byte < 32; ++byte) {
      const auto r = static_cast<std::uint8_t>(rng());
      f.descriptors.bits.push_back(byte < 16 ? r : (high_half ? 0xff : 0x00));
    }
  }
  return f;
}

int hamming(const Features& a, std::size_t i, const Features& b, std::size_t j) {
  int d = 0;
  for (int k = 0; k < 32; ++k) {
    d += std::popcount(static_cast<unsigned>(a.descriptors.binary_row(i)[k] ^ b.descriptors.binary_row(j)[k]));
  }
  return d;
}

}  // namespace

TEST(NativeBackend, UniformImageHasNoKeypoints) {
  NativeBackend be{NativeOptions{}};
  const auto f = be.extract("flat", GrayImage(64, 64, 128));
  EXPECT_TRUE(f.keypoints.empty());
  EXPECT_EQ(f.descriptors.size(), 0u);
}

TEST(NativeBackend, SquareCornersWithinTwoPixels) {
  NativeBackend be{NativeOptions{}};
  const auto f = be.extract("sq", square_image());
  ASSERT_GE(f.keypoints.size(), 4u);
  const std::vector<Point2> corners{{30, 30}, {69, 30}, {30, 69}, {69, 69}};
  std::vector<bool> hit(4, false);
  for (const auto& k : f.keypoints) {
    double best = 1e9;
    std::size_t which = 0;
    for (std::size_t c = 0; c < 4; ++c) {
      const double d = distance(k.point(), corners[c]);
      if (d < best) {
        best = d;
        which = c;
      }
    }
    EXPECT_LE(best, 2.0) << "keypoint at " << k.x << "," << k.y;
    hit[which] = true;
  }
  EXPECT_TRUE(std::all_of(hit.begin(), hit.end(), [](bool b) { return b; }));
}

TEST(NativeBackend, DeterministicAndWellFormed) {
  NativeBackend be{NativeOptions{}};
  const GrayImage img = textured(5, 4);
  const auto f1 = be.extract("x", img);
  const auto f2 = NativeBackend{NativeOptions{}}.extract("x", img);
  EXPECT_EQ(f1, f2);
  ASSERT_FALSE(f1.keypoints.empty());
  EXPECT_EQ(f1.descriptors.size(), f1.keypoints.size());
  EXPECT_EQ(f1.descriptors.dim, 256u);
  for (std::size_t i = 0; i < f1.keypoints.size(); ++i) {
    const auto& k = f1.keypoints[i];
    EXPECT_GE(k.x, 0.0);
    EXPECT_LT(k.x, img.width);
    EXPECT_GE(k.y, 0.0);
    EXPECT_LT(k.y, img.height);
    EXPECT_GE(k.score, 0.0);
    EXPECT_LE(k.score, 1.0);
    if (i > 0) {
      EXPECT_GE(f1.keypoints[i - 1].score, k.score);
    }
  }
  EXPECT_EQ(be.match(f1, f1, 0.3), be.match(f2, f2, 0.3));
}

TEST(NativeBackend, KeypointCapHonoured) {
  NativeOptions opts;
  opts.max_keypoints = 10;
  const auto f = NativeBackend{opts}.extract("x", textured(9));
  EXPECT_EQ(f.keypoints.size(), 10u);
}

TEST(NativeBackend, SelfMatchIsPerfect) {
  NativeBackend be{NativeOptions{}};
  const auto f = be.extract("x", textured(3));
  const auto m = be.match(f, f, 0.5);
  ASSERT_EQ(m.matches.size(), f.keypoints.size());
  for (std::size_t i = 0; i < m.matches.size(); ++i) {
    EXPECT_EQ(m.matches[i].index_a, i);
    EXPECT_EQ(m.matches[i].index_b, i);
    EXPECT_DOUBLE_EQ(m.matches[i].confidence, 1.0);
  }
  EXPECT_TRUE(m.unmatched_a.empty());
  EXPECT_TRUE(m.unmatched_b.empty());
}

TEST(NativeBackend, DisjointDescriptorsNeverMatchAtHighThreshold) {
  std::mt19937_64 rng(77);
  const Features a = random_binary(rng, 40, true);
  const Features b = random_binary(rng, 35, false);
  for (std::size_t i = 0; i < 40; ++i) {
    for (std::size_t j = 0; j < 35; ++j) {
      ASSERT_GE(hamming(a, i, b, j), 128);
    }
  }
  const auto m = NativeBackend{NativeOptions{}}.match(a, b, 0.9);
  EXPECT_TRUE(m.matches.empty());
  EXPECT_EQ(m.unmatched_a.size(), 40u);
  EXPECT_EQ(m.unmatched_b.size(), 35u);
}

TEST(NativeBackend, ConfidenceIsOneMinusHammingFraction) {
  std::mt19937_64 rng(5);
  const Features a = random_binary(rng, 20, true);
  const Features b = random_binary(rng, 20, true);
  const auto m = NativeBackend{NativeOptions{}}.match(a, b, 0.0);
  ASSERT_FALSE(m.matches.empty());
  for (const auto& mm : m.matches) {
    EXPECT_DOUBLE_EQ(mm.confidence, 1.0 - hamming(a, mm.index_a, b, mm.index_b) / 256.0);
    // Mutual nearest neighbour: no closer partner on either side.
    for (std::size_t j = 0; j < 20; ++j) {
      EXPECT_GE(hamming(a, mm.index_a, b, j), hamming(a, mm.index_a, b, mm.index_b));
      EXPECT_GE(hamming(a, j, b, mm.index_b), hamming(a, mm.index_a, b, mm.index_b));
    }
  }
}

TEST(NativeBackend, MatchesShrinkMonotonicallyWithThreshold) {
  NativeBackend be{NativeOptions{}};
  SceneSpec spec = random_scene(21, 200, 150, 3, {});
  spec.noise = 10;
  const auto pairs = generate_calibration_pairs(21, 8, 2, spec);
  for (const auto& p : pairs) {
    const auto fa = be.extract("a", p.a);
    const auto fb = be.extract("b", p.b);
    MatchResult prev = be.match(fa, fb, 0.0);
    for (double t : {0.2, 0.5, 0.7, 0.8, 0.9, 0.99}) {
      const MatchResult cur = be.match(fa, fb, t);
      for (const auto& m : cur.matches) {
        EXPECT_GE(m.confidence, t);
        EXPECT_NE(std::find(prev.matches.begin(), prev.matches.end(), m), prev.matches.end());
      }
      EXPECT_EQ(cur.matches.size() + cur.unmatched_a.size(), fa.keypoints.size());
      EXPECT_EQ(cur.matches.size() + cur.unmatched_b.size(), fb.keypoints.size());
      prev = cur;
    }
  }
}

TEST(NativeBackend, ShiftedPairRecoversShift) {
  NativeBackend be{NativeOptions{}};
  SceneSpec spec = random_scene(8, 240, 180, 3, {});
  const auto pairs = generate_calibration_pairs(8, 10, 1, spec);
  const auto fa = be.extract("a", pairs[0].a);
  const auto fb = be.extract("b", pairs[0].b);
  const auto m = be.match(fa, fb, 0.8);
  ASSERT_GT(m.matches.size(), 20u);
  double sum = 0.0;
  for (const auto& mm : m.matches) {
    sum += distance(fa.keypoints[mm.index_a].point(), fb.keypoints[mm.index_b].point());
  }
  EXPECT_NEAR(sum / m.matches.size(), 10.0, 1.0);
}

TEST(NativeBackend, RejectsBadInput) {
  NativeBackend be{NativeOptions{}};
  EXPECT_THROW(be.extract("empty", GrayImage()), InputError);
  Features real;
  real.descriptors.kind = DescriptorKind::real;
  real.descriptors.dim = 4;
  Features bin;
  bin.descriptors.kind = DescriptorKind::binary;
  bin.descriptors.dim = 256;
  EXPECT_THROW(be.match(real, real, 0.1), InputError);
  EXPECT_THROW(be.match(bin, real, 0.1), InputError);
}
