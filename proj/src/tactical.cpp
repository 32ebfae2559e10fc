#include "runlens/tactical.hpp"

#include "runlens/geometry.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace runlens {

DynamicLines fit_lines(std::span<const double> defender_xs) {
  const std::size_t n = defender_xs.size();
  if (n < 3) {
    throw DegenerateGeometry("dynamic lines need at least 3 outfield defenders, saw " + std::to_string(n), n);
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return defender_xs[a] < defender_xs[b]; });
  std::vector<double> xs(n);
  for (std::size_t i = 0; i < n; ++i) xs[i] = defender_xs[order[i]];

  // 1D k-means optima are contiguous in sorted order, so an exact dynamic
  // program over split points finds the global minimum.
  std::vector<double> s1(n + 1, 0.0), s2(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    s1[i + 1] = s1[i] + xs[i];
    s2[i + 1] = s2[i] + xs[i] * xs[i];
  }
  auto sse = [&](std::size_t a, std::size_t b) { // [a, b)
    const double cnt = static_cast<double>(b - a);
    const double sum = s1[b] - s1[a];
    return std::max(0.0, (s2[b] - s2[a]) - sum * sum / cnt);
  };
  double best = std::numeric_limits<double>::infinity();
  std::size_t best_i = 1, best_j = 2;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double cost = sse(0, i) + sse(i, j) + sse(j, n);
      if (!std::isfinite(best) || cost < best - 1e-12 * std::max(1.0, best)) {
        best = cost;
        best_i = i;
        best_j = j;
      }
    }
  }
  DynamicLines lines;
  const std::array<std::size_t, 4> cuts{0, best_i, best_j, n};
  lines.membership.assign(n, 0);
  for (int c = 0; c < 3; ++c) {
    const std::size_t a = cuts[c], b = cuts[c + 1];
    lines.line_x[c] = (s1[b] - s1[a]) / static_cast<double>(b - a);
    for (std::size_t k = a; k < b; ++k) lines.membership[order[k]] = c;
  }
  return lines;
}

double within_cluster_ss(std::span<const double> xs, const DynamicLines& lines) {
  double total = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double d = xs[i] - lines.line_x[lines.membership[i]];
    total += d * d;
  }
  return total;
}

double TeamBlock::area() const { return geometry::signed_area(hull); }

bool TeamBlock::contains(Point p) const { return geometry::convex_contains(hull, p); }

TeamBlock build_block(std::span<const Point> defenders) {
  if (defenders.size() < 3) {
    throw DegenerateGeometry("team block needs at least 3 outfield defenders, saw " +
                                 std::to_string(defenders.size()),
                             defenders.size());
  }
  TeamBlock block{geometry::convex_hull(defenders)};
  if (block.hull.size() < 3) {
    throw DegenerateGeometry("team block is degenerate (collinear defenders)", defenders.size());
  }
  return block;
}

std::string_view to_string(Zone zone) {
  switch (zone) {
  case Zone::Inside: return "inside";
  case Zone::Wing: return "wing";
  case Zone::Back: return "back";
  case Zone::Front: return "front";
  }
  return "unknown";
}

Zone zone_from_string(std::string_view name) {
  for (Zone z : {Zone::Inside, Zone::Wing, Zone::Back, Zone::Front}) {
    if (to_string(z) == name) return z;
  }
  throw ValidationError("unknown zone '" + std::string(name) + "'");
}

DefensiveShape defensive_shape(std::span<const Point> outfield_defenders) {
  DefensiveShape shape;
  std::vector<double> xs;
  xs.reserve(outfield_defenders.size());
  for (const auto& p : outfield_defenders) xs.push_back(p.x);
  shape.lines = fit_lines(xs);
  shape.block = build_block(outfield_defenders);
  shape.deepest_x = *std::max_element(xs.begin(), xs.end());
  return shape;
}

Zone classify_zone(Point p, const DynamicLines& lines, const TeamBlock& block) {
  if (p.x > lines.line_x[2]) return Zone::Back;
  if (p.x < lines.line_x[0]) return Zone::Front;
  return block.contains(p) ? Zone::Inside : Zone::Wing;
}

Zone classify_zone(Point p, const DefensiveShape& shape, const TacticalConfig& config) {
  if (config.back_line == BackLineMode::DeepestDefender) {
    if (p.x > shape.deepest_x) return Zone::Back;
    if (p.x < shape.lines.line_x[0]) return Zone::Front;
    return shape.block.contains(p) ? Zone::Inside : Zone::Wing;
  }
  return classify_zone(p, shape.lines, shape.block);
}

std::string movement_key(const MovementType& type) {
  return std::string(to_string(type.origin)) + "_to_" + std::string(to_string(type.destination));
}

std::optional<MovementType> movement_from_key(std::string_view key) {
  for (const auto& t : kMovementTypes) {
    if (movement_key(t) == key) return t;
  }
  return std::nullopt;
}

std::size_t movement_index(const MovementType& type) {
  for (std::size_t i = 0; i < kMovementTypes.size(); ++i) {
    if (kMovementTypes[i] == type) return i;
  }
  throw Error("not a classified movement type: " + movement_key(type));
}

RunClassification classify_run(const RunEffort& run, const std::optional<DefensiveShape>& at_origin,
                               const std::optional<DefensiveShape>& at_destination,
                               const TacticalConfig& config) {
  RunClassification out;
  if (!at_origin) {
    out.reason = "defenders not visible at valley end";
    return out;
  }
  if (!at_destination) {
    out.reason = "defenders not visible at peak end";
    return out;
  }
  out.origin_zone = classify_zone(run.origin, *at_origin, config);
  out.destination_zone = classify_zone(run.destination, *at_destination, config);
  const Zone o = *out.origin_zone;
  const Zone d = *out.destination_zone;
  if (o != Zone::Inside && o != Zone::Wing) {
    out.reason = "origin zone " + std::string(to_string(o));
    return out;
  }
  if (d == Zone::Front) {
    out.reason = "destination zone front";
    return out;
  }
  out.movement = MovementType{o, d};
  return out;
}

} // namespace runlens
