#include "driftwatch/segmentation.hpp"

#include <algorithm>
#include <cmath>

#include "driftwatch/errors.hpp"

namespace driftwatch {

bool BitMask::contains(const Point2& p) const {
  if (width <= 0 || height <= 0) {
    return false;
  }
  const int x = std::clamp(static_cast<int>(std::lround(p.x)), 0, width - 1);
  const int y = std::clamp(static_cast<int>(std::lround(p.y)), 0, height - 1);
  return test(x, y);
}

RleMask encode_rle(const BitMask& mask) {
  RleMask rle{mask.height, mask.width, {}};
  std::uint8_t current = 0;
  std::uint32_t run = 0;
  for (auto b : mask.bits) {
    const std::uint8_t v = b ? 1 : 0;
    if (v != current) {
      rle.counts.push_back(run);
      run = 0;
      current = v;
    }
    ++run;
  }
  rle.counts.push_back(run);
  return rle;
}

BitMask decode_rle(const RleMask& rle) {
  if (rle.height <= 0 || rle.width <= 0) {
    throw InputError("RLE size must be positive");
  }
  BitMask mask(rle.width, rle.height);
  const std::size_t total = mask.bits.size();
  std::size_t pos = 0;
  std::uint8_t value = 0;
  for (auto run : rle.counts) {
    if (run > total - pos) {
      throw InputError("RLE runs exceed " + std::to_string(rle.height) + "x" + std::to_string(rle.width) + " bits");
    }
    std::fill_n(mask.bits.begin() + static_cast<std::ptrdiff_t>(pos), run, value);
    pos += run;
    value ^= 1;
  }
  if (pos != total) {
    throw InputError("RLE runs cover " + std::to_string(pos) + " of " + std::to_string(total) + " bits");
  }
  return mask;
}

void validate_instance(const InstanceMask& instance) {
  const auto& m = instance.mask;
  for (int y = 0; y < m.height; ++y) {
    for (int x = 0; x < m.width; ++x) {
      if (m.test(x, y) && !instance.bbox.contains({static_cast<double>(x), static_cast<double>(y)})) {
        throw InputError("instance \"" + instance.class_label + "\" has mask pixel (" + std::to_string(x) + ", " +
                         std::to_string(y) + ") outside its bbox");
      }
    }
  }
}

SegmentVote vote(const InstanceMask& instance, std::span<const Point2> matched, std::span<const Point2> unmatched) {
  SegmentVote v;
  v.n_len = static_cast<std::size_t>(
      std::count_if(unmatched.begin(), unmatched.end(), [&](const Point2& p) { return instance.mask.contains(p); }));
  v.m_len = static_cast<std::size_t>(
      std::count_if(matched.begin(), matched.end(), [&](const Point2& p) { return instance.mask.contains(p); }));
  v.is_anomaly = is_anomalous(v.n_len, v.m_len);
  return v;
}

std::vector<Point2> remove_segmented(std::span<const Point2> unmatched, std::span<const InstanceMask> instances) {
  std::vector<Point2> residual;
  for (const auto& p : unmatched) {
    const bool covered =
        std::any_of(instances.begin(), instances.end(), [&](const InstanceMask& inst) { return inst.mask.contains(p); });
    if (!covered) {
      residual.push_back(p);
    }
  }
  return residual;
}

void sort_by_score(std::vector<InstanceMask>& instances) {
  std::stable_sort(instances.begin(), instances.end(),
                   [](const InstanceMask& a, const InstanceMask& b) { return a.score > b.score; });
}

}  // namespace driftwatch
