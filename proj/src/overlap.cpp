#include "driftwatch/overlap.hpp"

namespace driftwatch {

std::optional<RectMask> overlap_mask(std::span<const Point2> matched_query_points, std::size_t min_matches) {
  if (matched_query_points.empty() || matched_query_points.size() < min_matches) {
    return std::nullopt;
  }
  return bounding_box(matched_query_points);
}

PointPartition filter_points(std::span<const Point2> points, const RectMask& mask) {
  PointPartition out;
  for (const auto& p : points) {
    (mask.contains(p) ? out.inside : out.outside).push_back(p);
  }
  return out;
}

}  // namespace driftwatch
