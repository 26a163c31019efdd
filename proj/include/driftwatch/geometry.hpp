#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

namespace driftwatch {

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point2&, const Point2&) = default;
};

inline double distance(const Point2& a, const Point2& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

/// Axis-aligned rectangle in pixel coordinates, closed on every edge.
struct RectMask {
  double x_min = 0.0;
  double y_min = 0.0;
  double x_max = 0.0;
  double y_max = 0.0;

  bool contains(const Point2& p) const {
    return p.x >= x_min && p.x <= x_max && p.y >= y_min && p.y <= y_max;
  }
  bool intersects(const RectMask& o) const {
    return x_min <= o.x_max && o.x_min <= x_max && y_min <= o.y_max && o.y_min <= y_max;
  }
  double area() const { return (x_max - x_min) * (y_max - y_min); }
  bool valid() const { return x_min <= x_max && y_min <= y_max; }

  friend bool operator==(const RectMask&, const RectMask&) = default;
};

// Bounding box of a non-empty point set.
inline RectMask bounding_box(std::span<const Point2> points) {
  RectMask box{points.front().x, points.front().y, points.front().x, points.front().y};
  for (const auto& p : points) {
    box.x_min = std::min(box.x_min, p.x);
    box.y_min = std::min(box.y_min, p.y);
    box.x_max = std::max(box.x_max, p.x);
    box.y_max = std::max(box.y_max, p.y);
  }
  return box;
}

}  // namespace driftwatch
