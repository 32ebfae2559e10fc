#include "runlens/geometry.hpp"

#include <algorithm>

namespace runlens::geometry {

std::vector<Point> convex_hull(std::span<const Point> points) {
  std::vector<Point> pts(points.begin(), points.end());
  std::sort(pts.begin(), pts.end(), [](Point a, Point b) { return a.x != b.x ? a.x < b.x : a.y < b.y; });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) return pts;

  std::vector<Point> hull(2 * pts.size());
  std::size_t k = 0;
  // Lower hull
  for (const Point& p : pts) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0.0) --k;
    hull[k++] = p;
  }
  // Upper hull
  const std::size_t lower = k + 1;
  for (std::size_t i = pts.size() - 1; i-- > 0;) {
    while (k >= lower && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0.0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

double signed_area(std::span<const Point> polygon) {
  double twice = 0.0;
  const std::size_t n = polygon.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Point& a = polygon[i];
    const Point& b = polygon[(i + 1) % n];
    twice += a.x * b.y - b.x * a.y;
  }
  return twice / 2.0;
}

Point centroid(std::span<const Point> points) {
  Point c;
  if (points.empty()) return c;
  for (const Point& p : points) c = c + p;
  return (1.0 / static_cast<double>(points.size())) * c;
}

bool convex_contains(std::span<const Point> hull, Point p, double eps) {
  const std::size_t n = hull.size();
  if (n < 3) return false;
  const Point o = hull[0];
  // Outside the wedge spanned by the first and last edges from hull[0].
  if (cross(o, hull[1], p) < -eps || cross(o, hull[n - 1], p) > eps) return false;
  // Find the fan triangle (o, hull[lo], hull[lo + 1]) containing p's direction.
  std::size_t lo = 1;
  std::size_t hi = n - 1;
  while (hi - lo > 1) {
    const std::size_t mid = (lo + hi) / 2;
    if (cross(o, hull[mid], p) >= 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return cross(hull[lo], hull[lo + 1], p) >= -eps;
}

std::vector<Point> clip_below_x(std::span<const Point> polygon, double x_max) {
  std::vector<Point> out;
  const std::size_t n = polygon.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Point& cur = polygon[i];
    const Point& nxt = polygon[(i + 1) % n];
    const bool cur_in = cur.x <= x_max;
    const bool nxt_in = nxt.x <= x_max;
    if (cur_in) out.push_back(cur);
    if (cur_in != nxt_in) {
      const double f = (x_max - cur.x) / (nxt.x - cur.x);
      out.push_back({x_max, cur.y + (nxt.y - cur.y) * f});
    }
  }
  return out;
}

} // namespace runlens::geometry
