#pragma once

#include <array>

#include "driftwatch/backend.hpp"

namespace driftwatch {

/// Dependency-free detector/descriptor/matcher.
///
/// Detection: a pixel is a corner when at least `min_arc` contiguous samples
/// on the 16-sample radius-3 ring are all brighter than centre + threshold or
/// all darker than centre - threshold. The corner score is the summed excess
/// contrast over that class, normalized by 16 * 255. Corners are thinned by
/// non-maximum suppression within `nms_radius`.
///
/// Description: 256 intensity comparisons between point pairs drawn once from
/// a fixed seed inside a 31x31 patch, sampled on a 5x5 box-smoothed image.
///
/// Matching: mutual nearest neighbours under Hamming distance, confidence
/// 1 - hamming / 256.
class NativeBackend final : public FeatureBackend {
 public:
  static constexpr std::size_t kDescriptorBits = 256;
  static constexpr int kPatchRadius = 15;
  static constexpr int kBorder = kPatchRadius + 1;

  explicit NativeBackend(NativeOptions options = {});

  std::string name() const override { return "native"; }
  Features extract(const std::string& image_id, const GrayImage& image) const override;
  MatchResult match(const Features& a, const Features& b, double threshold) const override;

  const NativeOptions& options() const { return options_; }

 private:
  struct PairOffsets {
    std::int8_t ax, ay, bx, by;
  };

  NativeOptions options_;
  std::array<PairOffsets, kDescriptorBits> pattern_{};
};

}  // namespace driftwatch
