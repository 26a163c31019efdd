#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "driftwatch/geometry.hpp"

namespace driftwatch {

inline constexpr std::size_t kDefaultMinMatches = 4;

// Bounding box of the matched query-side keypoints, or nullopt when fewer
// than `min_matches` points are given (the pair is not comparable).
std::optional<RectMask> overlap_mask(std::span<const Point2> matched_query_points,
                                     std::size_t min_matches = kDefaultMinMatches);

struct PointPartition {
  std::vector<Point2> inside;
  std::vector<Point2> outside;
};

// Closed-interval containment; input order is kept on both sides.
PointPartition filter_points(std::span<const Point2> points, const RectMask& mask);

}  // namespace driftwatch
