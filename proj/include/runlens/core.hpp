#pragma once

// Shared domain types and coordinate conventions.
//
// Coordinates are metres with the origin at the home team's left corner and x
// along the pitch length. Analyses that need a canonical direction reflect a
// frame so the team of interest attacks toward +x (see normalize_direction).

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace runlens {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Input that does not satisfy a format or precondition (CLI exit code 2).
class ValidationError : public Error {
public:
  using Error::Error;
};

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

inline Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
inline Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
inline Point operator*(double s, Point p) { return {s * p.x, s * p.y}; }
inline double norm(Point p) { return std::hypot(p.x, p.y); }
inline double distance(Point a, Point b) { return norm(a - b); }
inline Point lerp(Point a, Point b, double f) {
  return {a.x + (b.x - a.x) * f, a.y + (b.y - a.y) * f};
}

struct PitchSpec {
  double length = 105.0;
  double width = 68.0;

  /// Goal centre at x = 0 (defended by the team attacking +x).
  Point goal_low_x() const { return {0.0, width / 2.0}; }
  /// Goal centre at x = length (attacked by the team attacking +x).
  Point goal_high_x() const { return {length, width / 2.0}; }

  void validate() const;
  bool contains(Point p, double tolerance = 0.0) const {
    return p.x >= -tolerance && p.x <= length + tolerance && p.y >= -tolerance &&
           p.y <= width + tolerance;
  }

  friend bool operator==(const PitchSpec&, const PitchSpec&) = default;
};

enum class Period : int { First = 1, Second = 2, ExtraFirst = 3, ExtraSecond = 4 };

Period period_from_int(int value);

struct PlayerPosition {
  std::string player_id;
  std::string team_id;
  Point xy;

  friend bool operator==(const PlayerPosition&, const PlayerPosition&) = default;
};

/// +1 when the team attacks toward +x, -1 toward -x.
struct TeamDirection {
  std::string team_id;
  int sign = 1;

  friend bool operator==(const TeamDirection&, const TeamDirection&) = default;
};

struct Frame {
  std::int64_t t_ms = 0; // since kickoff of `period`
  Period period = Period::First;
  Point ball;
  std::optional<bool> in_play;
  std::vector<PlayerPosition> players;
  std::vector<TeamDirection> attacking_direction;

  /// Throws Error for a team without a recorded direction.
  int direction_of(std::string_view team_id) const;
  const PlayerPosition* find(std::string_view player_id) const;

  friend bool operator==(const Frame&, const Frame&) = default;
};

enum class EventType {
  Pass,
  Reception,
  Carry,
  Shot,
  Cross,
  Dribble,
  Recovery,
  Foul,
  Offside,
  BallOut,
  Corner,
  FreeKick,
  ThrowIn,
  GoalKick,
  Kickoff,
  Substitution,
};

std::string_view to_string(EventType type);
EventType event_type_from_string(std::string_view name);

/// Ball-contact events that can establish or continue a possession.
bool is_on_ball(EventType type);
/// Events that stop play (ball out, foul, offside).
bool is_stoppage(EventType type);
/// Events that put the ball back into play.
bool is_restart(EventType type);

struct Event {
  std::int64_t t_ms = 0;
  Period period = Period::First;
  EventType type = EventType::Pass;
  std::string team_id;
  std::string player_id;
  Point location;
  std::optional<Point> end_location;

  friend bool operator==(const Event&, const Event&) = default;
};

enum class SpeedCategory { Walking = 0, Jogging = 1, Running = 2, Sprinting = 3 };

inline constexpr int kSpeedCategoryCount = 4;

std::string_view to_string(SpeedCategory category);

/// Upper bounds (km/h, exclusive) of the walking, jogging and running bands.
/// Sprinting starts at `running_max`, which doubles as the HI threshold.
struct SpeedBands {
  double walking_max = 6.0;
  double jogging_max = 14.0;
  double running_max = 21.0;

  void validate() const;
};

/// Throws ValidationError for negative or non-finite speeds.
SpeedCategory speed_category(double kmh, const SpeedBands& bands = {});

enum class Role {
  CentralDefender,
  FullBack,
  DefensiveMidfielder,
  Midfielder,
  Winger,
  Striker,
  Goalkeeper,
};

inline constexpr int kRoleCount = 7;

std::string_view to_string(Role role);
Role role_from_string(std::string_view name);

/// Reflects a point through the pitch centre.
inline Point reflect(Point p, const PitchSpec& pitch) {
  return {pitch.length - p.x, pitch.width - p.y};
}

/// Returns `frame` expressed so that `team_id` attacks toward +x. Idempotent:
/// the returned frame records +1 for that team (and -1 for the others).
Frame normalize_direction(const Frame& frame, std::string_view team_id, const PitchSpec& pitch);

/// Position of `p` as seen by a team with attacking `sign`.
inline Point canonical(Point p, int sign, const PitchSpec& pitch) {
  return sign >= 0 ? p : reflect(p, pitch);
}

struct RosterEntry {
  std::string player_id;
  std::string name;
  bool goalkeeper = false;

  friend bool operator==(const RosterEntry&, const RosterEntry&) = default;
};

struct TeamInfo {
  std::string team_id;
  std::string name;
  int kickoff_direction = 1; // attacking sign in the first period
  std::vector<RosterEntry> players;
  std::optional<double> xg;

  friend bool operator==(const TeamInfo&, const TeamInfo&) = default;
};

struct MatchMeta {
  std::string match_id;
  PitchSpec pitch;
  std::vector<TeamInfo> teams;

  const TeamInfo& team(std::string_view team_id) const;
  bool has_team(std::string_view team_id) const;
  const std::string& opponent(std::string_view team_id) const;
  /// Attacking sign of a team in a period; directions swap every period.
  int direction(std::string_view team_id, Period period) const;
  bool is_goalkeeper(std::string_view player_id) const;
  /// Team of a rostered player; nullopt when unknown.
  std::optional<std::string> team_of(std::string_view player_id) const;

  void validate() const;

  friend bool operator==(const MatchMeta&, const MatchMeta&) = default;
};

/// Fills Frame::attacking_direction for both teams from the metadata.
void apply_directions(std::vector<Frame>& frames, const MatchMeta& meta);

} // namespace runlens
