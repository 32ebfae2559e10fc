#pragma once

#include "runlens/core.hpp"

#include <span>
#include <vector>

namespace runlens::geometry {

/// z-component of (a - o) x (b - o); positive for a counter-clockwise turn.
inline double cross(Point o, Point a, Point b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

/// Andrew's monotone chain. Vertices are counter-clockwise starting from the
/// lowest-x (then lowest-y) point; collinear boundary points are dropped.
/// Returns fewer than three vertices for degenerate input.
std::vector<Point> convex_hull(std::span<const Point> points);

/// Shoelace area; positive for counter-clockwise polygons.
double signed_area(std::span<const Point> polygon);

Point centroid(std::span<const Point> points);

/// True when `p` lies inside or on the boundary of a counter-clockwise convex
/// polygon. O(log n) wedge search.
bool convex_contains(std::span<const Point> hull, Point p, double eps = 1e-9);

/// Part of a polygon with x <= `x_max` (Sutherland-Hodgman against one line).
std::vector<Point> clip_below_x(std::span<const Point> polygon, double x_max);

} // namespace runlens::geometry
