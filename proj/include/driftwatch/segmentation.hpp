#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "driftwatch/geometry.hpp"
#include "driftwatch/image.hpp"

namespace driftwatch {

/// Dense per-pixel mask over a frame, row-major, one byte (0 or 1) per pixel.
struct BitMask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> bits;

  BitMask() = default;
  BitMask(int w, int h) : width(w), height(h), bits(static_cast<std::size_t>(w) * h, 0) {}

  bool test(int x, int y) const { return bits[static_cast<std::size_t>(y) * width + x] != 0; }
  void set(int x, int y, bool v = true) { bits[static_cast<std::size_t>(y) * width + x] = v ? 1 : 0; }

  // Membership of a keypoint: nearest pixel, clamped into the frame.
  bool contains(const Point2& p) const;

  friend bool operator==(const BitMask&, const BitMask&) = default;
};

/// Uncompressed run-length encoding, row-major, alternating runs of 0-bits
/// and 1-bits starting with a (possibly empty) 0-run.
struct RleMask {
  int height = 0;
  int width = 0;
  std::vector<std::uint32_t> counts;

  friend bool operator==(const RleMask&, const RleMask&) = default;
};

RleMask encode_rle(const BitMask& mask);
// Throws InputError when the runs do not sum to height * width.
BitMask decode_rle(const RleMask& rle);

struct InstanceMask {
  std::string class_label;
  double score = 0.0;
  RectMask bbox;
  BitMask mask;

  friend bool operator==(const InstanceMask&, const InstanceMask&) = default;
};

// Throws InputError if a set pixel lies outside the instance bbox.
void validate_instance(const InstanceMask& instance);

struct SegmentVote {
  std::size_t n_len = 0;  // unmatched keypoints inside the mask
  std::size_t m_len = 0;  // matched keypoints inside the mask
  bool is_anomaly = false;
};

// An instance is anomalous when its unmatched keypoints outnumber its matched
// ones by at least one.
constexpr bool is_anomalous(std::size_t n_len, std::size_t m_len) { return n_len >= m_len + 1; }

SegmentVote vote(const InstanceMask& instance, std::span<const Point2> matched, std::span<const Point2> unmatched);

/// Unmatched points that fall inside none of the instance masks, in input order.
std::vector<Point2> remove_segmented(std::span<const Point2> unmatched, std::span<const InstanceMask> instances);

enum class RemovalScope { all_instances, anomalous_only };

/// Instance segmentation provider. Implementations are immutable after
/// construction and safe to call concurrently.
class SegmentationProvider {
 public:
  virtual ~SegmentationProvider() = default;

  virtual std::string name() const = 0;
  // Instances sorted by descending score; masks may overlap.
  virtual std::vector<InstanceMask> segment(const std::string& image_id, const GrayImage& image) const = 0;
};

// Provider that never finds instances; detection then relies on clustering alone.
class NullSegmenter final : public SegmentationProvider {
 public:
  std::string name() const override { return "none"; }
  std::vector<InstanceMask> segment(const std::string&, const GrayImage&) const override { return {}; }
};

void sort_by_score(std::vector<InstanceMask>& instances);

}  // namespace driftwatch
