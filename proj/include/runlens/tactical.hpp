#pragma once

// Defensive structure of the team without the ball: three dynamic lines from
// a 1D clustering of outfield defenders' depth, the block as their convex hull,
// and the zone/movement-type classification of runs against that structure.
//
// Geometry is canonical: the attacking team moves toward +x, so the defending
// team protects the goal at x = length and "behind the last line" means a
// larger x than the last (deepest) line.

#include "runlens/core.hpp"
#include "runlens/kinematics.hpp"

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace runlens {

/// Raised when too few defenders are visible to build lines or a block.
class DegenerateGeometry : public Error {
public:
  DegenerateGeometry(const std::string& what, std::size_t visible) : Error(what), visible_(visible) {}
  std::size_t visible() const { return visible_; }

private:
  std::size_t visible_;
};

struct DynamicLines {
  std::array<double, 3> line_x{}; // first, middle, last (ascending x)
  std::vector<int> membership;    // line index per input defender, input order
};

/// Optimal 1D 3-means of the defenders' x coordinates.
DynamicLines fit_lines(std::span<const double> defender_xs);

/// Within-cluster sum of squares of a labelled 1D clustering.
double within_cluster_ss(std::span<const double> xs, const DynamicLines& lines);

struct TeamBlock {
  std::vector<Point> hull; // counter-clockwise
  double area() const;
  bool contains(Point p) const;
};

TeamBlock build_block(std::span<const Point> defenders);

enum class Zone { Inside, Wing, Back, Front };

std::string_view to_string(Zone zone);
Zone zone_from_string(std::string_view name);

enum class BackLineMode { LineCentroid, DeepestDefender };

struct TacticalConfig {
  BackLineMode back_line = BackLineMode::LineCentroid;
  std::int64_t frame_lookup_ms = 200;
};

/// Lines, block and (for DeepestDefender mode) the deepest x.
struct DefensiveShape {
  DynamicLines lines;
  TeamBlock block;
  double deepest_x = 0.0;
};

/// Shape of the outfield defenders (canonical coordinates).
DefensiveShape defensive_shape(std::span<const Point> outfield_defenders);

Zone classify_zone(Point p, const DynamicLines& lines, const TeamBlock& block);
Zone classify_zone(Point p, const DefensiveShape& shape, const TacticalConfig& config = {});

/// Origin zone in {Inside, Wing}, destination in {Inside, Wing, Back}.
struct MovementType {
  Zone origin = Zone::Inside;
  Zone destination = Zone::Inside;

  friend bool operator==(const MovementType&, const MovementType&) = default;
  friend auto operator<=>(const MovementType&, const MovementType&) = default;
};

inline constexpr std::array<MovementType, 6> kMovementTypes{{
    {Zone::Inside, Zone::Inside},
    {Zone::Inside, Zone::Wing},
    {Zone::Inside, Zone::Back},
    {Zone::Wing, Zone::Inside},
    {Zone::Wing, Zone::Wing},
    {Zone::Wing, Zone::Back},
}};

/// e.g. "inside_to_back".
std::string movement_key(const MovementType& type);
std::optional<MovementType> movement_from_key(std::string_view key);
/// Index into kMovementTypes.
std::size_t movement_index(const MovementType& type);

struct RunClassification {
  std::optional<Zone> origin_zone;
  std::optional<Zone> destination_zone;
  std::optional<MovementType> movement; // nullopt = unclassified
  std::string reason;                   // why unclassified
};

/// Maps zones at the run's origin (valley end) and destination (peak end) to a
/// movement type. Shapes are nullopt when the defenders were not visible.
RunClassification classify_run(const RunEffort& run, const std::optional<DefensiveShape>& at_origin,
                               const std::optional<DefensiveShape>& at_destination,
                               const TacticalConfig& config = {});

} // namespace runlens
