#pragma once

// Formation detection by optimal assignment of mean relative positions to
// templates, and the per-second role timeline derived from it.

#include "runlens/match.hpp"
#include "runlens/possession.hpp"

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace runlens {

enum class SlotRole {
  CentreBack,
  FullBack,
  WingBack,
  DefensiveMid,
  CentralMid,
  AttackingMid,
  WideMid,
  Winger,
  CentreForward,
};

enum class Side { Left, Centre, Right };

std::string_view to_string(SlotRole role);
SlotRole slot_role_from_string(std::string_view name);
std::string_view to_string(Side side);
Side side_from_string(std::string_view name);

struct FormationSlot {
  Point position; // relative, team attacking +x, left = +y
  SlotRole role = SlotRole::CentralMid;
  Side side = Side::Centre;
};

struct FormationTemplate {
  std::string name;
  std::vector<FormationSlot> slots;
};

/// Centres points on their mean and scales them to unit RMS radius.
std::vector<Point> normalize_shape(std::span<const Point> points);

/// Builds a template, normalizing the slot coordinates. Throws unless there
/// are exactly 10 slots.
FormationTemplate make_template(std::string name, std::vector<FormationSlot> slots);

/// 4-4-2, 4-3-3, 4-2-3-1, 4-1-4-1, 3-4-2-1, 3-5-2, 3-4-3, 5-3-2, 5-4-1.
const std::vector<FormationTemplate>& default_templates();

nlohmann::json templates_to_json(std::span<const FormationTemplate> templates);
std::vector<FormationTemplate> templates_from_json(const nlohmann::json& j);

/// Minimum-cost perfect matching of a square cost matrix (Hungarian method).
/// assignment[row] = column.
struct Assignment {
  std::vector<int> assignment;
  double cost = 0.0;
};
Assignment optimal_assignment(const std::vector<std::vector<double>>& cost);

struct RelativeShape {
  std::vector<std::string> player_ids;
  std::vector<Point> points; // normalized, aligned with player_ids
};

enum class PhaseFilter { InPossession, OutOfPossession };

struct FormationConfig {
  std::int64_t window_ms = 600'000;
  std::int64_t stride_ms = 60'000;
  std::int64_t min_phase_ms = 60'000;
  double min_visibility = 0.5;
  std::int64_t min_player_visible_ms = 60'000;
  PhaseFilter phase = PhaseFilter::OutOfPossession;
  std::vector<FormationTemplate> templates = default_templates();
};

/// Raised when a window lacks phase time or visible outfield players.
class InsufficientVisibility : public Error {
public:
  using Error::Error;
};

/// Mean centroid-relative location of the team's ten outfield players over
/// the phase frames of [t0, t1), normalized like a template.
RelativeShape mean_relative_positions(const MatchIndex& index, std::span<const PossessionSegment> segments,
                                      std::string_view team_id, Period period, std::int64_t t0, std::int64_t t1,
                                      const FormationConfig& config = {});

struct FormationFit {
  std::size_t template_index = 0;
  std::string name;
  std::vector<int> slot_of_player; // aligned with RelativeShape::player_ids
  double cost = 0.0;
};

/// Template with minimum matching cost; ties go to the earlier template.
FormationFit assign_formation(const RelativeShape& shape, std::span<const FormationTemplate> templates);

/// Left/right merged and wing-backs folded into full-backs.
Role simplify_role(SlotRole role, Side side);

struct RoleInterval {
  Period period = Period::First;
  std::int64_t t_start = 0;
  std::int64_t t_end = 0;
  std::optional<Role> role; // nullopt: unknown
  std::string formation;
  std::optional<Side> side;

  friend bool operator==(const RoleInterval&, const RoleInterval&) = default;
};

struct FormationWindow {
  std::string team_id;
  Period period = Period::First;
  std::int64_t t_start = 0;
  std::int64_t t_end = 0;
  std::string formation;
  double cost = 0.0;
};

struct RoleTimeline {
  std::map<std::string, std::vector<RoleInterval>> players;
  std::vector<FormationWindow> windows;

  /// Role interval covering (period, t) for a player, or nullptr.
  const RoleInterval* at(std::string_view player_id, Period period, std::int64_t t) const;
};

/// Sliding windows per team and lineup epoch (substitutions restart the
/// windows); each second takes the role from the nearest-centred window.
RoleTimeline build_role_timeline(const MatchIndex& index, std::span<const PossessionSegment> segments,
                                 const FormationConfig& config = {});

} // namespace runlens
