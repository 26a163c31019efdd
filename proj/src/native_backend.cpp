#include "driftwatch/native_backend.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <limits>
#include <random>

#include "driftwatch/errors.hpp"

namespace driftwatch {

namespace {

constexpr int kRing = 16;
constexpr std::array<std::array<int, 2>, kRing> kRingOffsets{{{0, -3},
                                                              {1, -3},
                                                              {2, -2},
                                                              {3, -1},
                                                              {3, 0},
                                                              {3, 1},
                                                              {2, 2},
                                                              {1, 3},
                                                              {0, 3},
                                                              {-1, 3},
                                                              {-2, 2},
                                                              {-3, 1},
                                                              {-3, 0},
                                                              {-3, -1},
                                                              {-2, -2},
                                                              {-1, -3}}};

constexpr std::uint32_t kPatternSeed = 0x5eed1234u;

// Longest circular run of `cls` in the ring classification.
int longest_arc(const std::array<int, kRing>& classes, int cls) {
  int best = 0;
  int run = 0;
  for (int i = 0; i < 2 * kRing; ++i) {
    if (classes[i % kRing] == cls) {
      best = std::max(best, ++run);
    } else {
      run = 0;
    }
  }
  return std::min(best, kRing);
}

// 5x5 box sums (unnormalized), border-clamped.
std::vector<std::uint16_t> box_smooth(const GrayImage& img) {
  const int w = img.width;
  const int h = img.height;
  std::vector<std::uint16_t> rows(static_cast<std::size_t>(w) * h);
  std::vector<std::uint16_t> out(rows.size());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      int s = 0;
      for (int d = -2; d <= 2; ++d) {
        s += img.at(std::clamp(x + d, 0, w - 1), y);
      }
      rows[static_cast<std::size_t>(y) * w + x] = static_cast<std::uint16_t>(s);
    }
  }
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      int s = 0;
      for (int d = -2; d <= 2; ++d) {
        s += rows[static_cast<std::size_t>(std::clamp(y + d, 0, h - 1)) * w + x];
      }
      out[static_cast<std::size_t>(y) * w + x] = static_cast<std::uint16_t>(s);
    }
  }
  return out;
}

GrayImage blur3(const GrayImage& img) {
  GrayImage out = img;
  for (int y = 1; y + 1 < img.height; ++y) {
    for (int x = 1; x + 1 < img.width; ++x) {
      int s = 0;
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          s += img.at(x + dx, y + dy);
        }
      }
      out.pixels[static_cast<std::size_t>(y) * img.width + x] = static_cast<std::uint8_t>((s + 4) / 9);
    }
  }
  return out;
}

int hamming(const std::uint8_t* a, const std::uint8_t* b, std::size_t bytes) {
  int d = 0;
  std::size_t i = 0;
  for (; i + 8 <= bytes; i += 8) {
    std::uint64_t x;
    std::uint64_t y;
    std::memcpy(&x, a + i, 8);
    std::memcpy(&y, b + i, 8);
    d += std::popcount(x ^ y);
  }
  for (; i < bytes; ++i) {
    d += std::popcount(static_cast<unsigned>(a[i] ^ b[i]));
  }
  return d;
}

}  // namespace

NativeBackend::NativeBackend(NativeOptions options) : options_(options) {
  // Raw engine output keeps the pattern identical across standard libraries.
  std::mt19937 gen(kPatternSeed);
  auto coord = [&] { return static_cast<std::int8_t>(static_cast<int>(gen() % (2 * kPatchRadius + 1)) - kPatchRadius); };
  for (auto& p : pattern_) {
    do {
      p = {coord(), coord(), coord(), coord()};
    } while (p.ax == p.bx && p.ay == p.by);
  }
}

Features NativeBackend::extract(const std::string& image_id, const GrayImage& image) const {
  if (image.empty()) {
    throw InputError("cannot extract features from an empty image \"" + image_id + "\"");
  }
  const int w = image.width;
  const int h = image.height;
  const int t = options_.corner_threshold;

  // Corner test runs on a 3x3 mean so sensor noise does not split corners.
  const GrayImage det = blur3(image);
  std::vector<int> score(static_cast<std::size_t>(w) * h, 0);
  for (int y = kBorder; y < h - kBorder; ++y) {
    for (int x = kBorder; x < w - kBorder; ++x) {
      const int centre = det.at(x, y);
      std::array<int, kRing> cls{};
      std::array<int, kRing> diff{};
      for (int i = 0; i < kRing; ++i) {
        const int v = det.at(x + kRingOffsets[i][0], y + kRingOffsets[i][1]);
        diff[i] = v - centre;
        cls[i] = diff[i] > t ? 1 : (diff[i] < -t ? -1 : 0);
      }
      int winner = 0;
      if (longest_arc(cls, 1) >= options_.min_arc) {
        winner = 1;
      } else if (longest_arc(cls, -1) >= options_.min_arc) {
        winner = -1;
      }
      if (winner == 0) {
        continue;
      }
      int s = 0;
      for (int i = 0; i < kRing; ++i) {
        if (cls[i] == winner) {
          s += std::abs(diff[i]) - t;
        }
      }
      score[static_cast<std::size_t>(y) * w + x] = s;
    }
  }

  struct Candidate {
    int x, y, score;
  };
  std::vector<Candidate> kept;
  const int r = static_cast<int>(std::floor(options_.nms_radius));
  const double r2 = options_.nms_radius * options_.nms_radius;
  for (int y = kBorder; y < h - kBorder; ++y) {
    for (int x = kBorder; x < w - kBorder; ++x) {
      const int s = score[static_cast<std::size_t>(y) * w + x];
      if (s <= 0) {
        continue;
      }
      bool is_max = true;
      for (int dy = -r; dy <= r && is_max; ++dy) {
        for (int dx = -r; dx <= r; ++dx) {
          if ((dx == 0 && dy == 0) || dx * dx + dy * dy > r2) {
            continue;
          }
          const int nx = x + dx;
          const int ny = y + dy;
          if (nx < 0 || ny < 0 || nx >= w || ny >= h) {
            continue;
          }
          const int ns = score[static_cast<std::size_t>(ny) * w + nx];
          // Equal scores: the earlier pixel in raster order survives.
          if (ns > s || (ns == s && (dy < 0 || (dy == 0 && dx < 0)))) {
            is_max = false;
            break;
          }
        }
      }
      if (is_max) {
        kept.push_back({x, y, s});
      }
    }
  }
  std::stable_sort(kept.begin(), kept.end(), [](const Candidate& a, const Candidate& b) { return a.score > b.score; });
  if (kept.size() > options_.max_keypoints) {
    kept.resize(options_.max_keypoints);
  }

  Features out;
  out.image_id = image_id;
  out.descriptors.kind = DescriptorKind::binary;
  out.descriptors.dim = kDescriptorBits;
  out.descriptors.bits.assign(kept.size() * (kDescriptorBits / 8), 0);
  out.keypoints.reserve(kept.size());

  const auto smooth = box_smooth(image);
  constexpr double kScoreScale = 1.0 / (kRing * 255.0);
  for (std::size_t k = 0; k < kept.size(); ++k) {
    const auto& c = kept[k];
    // Sub-pixel position: score centroid over the 3x3 neighbourhood.
    double sx = 0.0;
    double sy = 0.0;
    double sw = 0.0;
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        const double v = score[static_cast<std::size_t>(c.y + dy) * w + (c.x + dx)];
        sx += v * dx;
        sy += v * dy;
        sw += v;
      }
    }
    const double ox = std::clamp(sx / sw, -0.5, 0.5);
    const double oy = std::clamp(sy / sw, -0.5, 0.5);
    out.keypoints.push_back({c.x + ox, c.y + oy, c.score * kScoreScale});
    std::uint8_t* row = out.descriptors.bits.data() + k * (kDescriptorBits / 8);
    for (std::size_t bit = 0; bit < kDescriptorBits; ++bit) {
      const auto& p = pattern_[bit];
      const auto va = smooth[static_cast<std::size_t>(c.y + p.ay) * w + (c.x + p.ax)];
      const auto vb = smooth[static_cast<std::size_t>(c.y + p.by) * w + (c.x + p.bx)];
      if (va < vb) {
        row[bit / 8] |= static_cast<std::uint8_t>(1u << (bit % 8));
      }
    }
  }
  return out;
}

MatchResult NativeBackend::match(const Features& a, const Features& b, double threshold) const {
  if (a.descriptors.kind != DescriptorKind::binary || !compatible(a.descriptors, b.descriptors)) {
    throw InputError("native matcher needs binary descriptors of equal dimension (got " +
                     std::string(to_string(a.descriptors.kind)) + "/" + std::to_string(a.descriptors.dim) + " vs " +
                     std::string(to_string(b.descriptors.kind)) + "/" + std::to_string(b.descriptors.dim) + ")");
  }
  const std::size_t na = a.descriptors.size();
  const std::size_t nb = b.descriptors.size();
  if (na != a.keypoints.size() || nb != b.keypoints.size()) {
    throw InputError("descriptor count differs from keypoint count");
  }
  const std::size_t bytes = a.descriptors.row_bytes();

  constexpr int kNone = std::numeric_limits<int>::max();
  std::vector<int> best_b(na, -1);
  std::vector<int> best_b_dist(na, kNone);
  std::vector<int> best_a(nb, -1);
  std::vector<int> best_a_dist(nb, kNone);
  for (std::size_t i = 0; i < na; ++i) {
    const auto* da = a.descriptors.binary_row(i);
    for (std::size_t j = 0; j < nb; ++j) {
      const int d = hamming(da, b.descriptors.binary_row(j), bytes);
      if (d < best_b_dist[i]) {
        best_b_dist[i] = d;
        best_b[i] = static_cast<int>(j);
      }
      if (d < best_a_dist[j]) {
        best_a_dist[j] = d;
        best_a[j] = static_cast<int>(i);
      }
    }
  }

  std::vector<Match> candidates;
  const double bits = static_cast<double>(a.descriptors.dim);
  for (std::size_t i = 0; i < na; ++i) {
    const int j = best_b[i];
    if (j >= 0 && best_a[static_cast<std::size_t>(j)] == static_cast<int>(i)) {
      candidates.push_back({i, static_cast<std::size_t>(j), 1.0 - best_b_dist[i] / bits});
    }
  }
  return assemble_matches(std::move(candidates), na, nb, threshold);
}

}  // namespace driftwatch
