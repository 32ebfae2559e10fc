#include "runlens/core.hpp"

#include <algorithm>
#include <array>
#include <set>
#include <utility>

namespace runlens {

namespace {

constexpr std::array<std::pair<EventType, std::string_view>, 16> kEventNames{{
    {EventType::Pass, "pass"},
    {EventType::Reception, "reception"},
    {EventType::Carry, "carry"},
    {EventType::Shot, "shot"},
    {EventType::Cross, "cross"},
    {EventType::Dribble, "dribble"},
    {EventType::Recovery, "recovery"},
    {EventType::Foul, "foul"},
    {EventType::Offside, "offside"},
    {EventType::BallOut, "ball_out"},
    {EventType::Corner, "corner"},
    {EventType::FreeKick, "free_kick"},
    {EventType::ThrowIn, "throw_in"},
    {EventType::GoalKick, "goal_kick"},
    {EventType::Kickoff, "kickoff"},
    {EventType::Substitution, "substitution"},
}};

constexpr std::array<std::string_view, kRoleCount> kRoleNames{
    "central_defender", "full_back", "defensive_midfielder", "midfielder",
    "winger",           "striker",   "goalkeeper",
};

} // namespace

void PitchSpec::validate() const {
  if (!(length > 0.0) || !(width > 0.0)) {
    throw ValidationError("pitch dimensions must be positive");
  }
}

Period period_from_int(int value) {
  if (value < 1 || value > 4) {
    throw ValidationError("period must be 1..4, got " + std::to_string(value));
  }
  return static_cast<Period>(value);
}

int Frame::direction_of(std::string_view team_id) const {
  for (const auto& d : attacking_direction) {
    if (d.team_id == team_id) return d.sign;
  }
  throw Error("frame has no attacking direction for team '" + std::string(team_id) + "'");
}

const PlayerPosition* Frame::find(std::string_view player_id) const {
  for (const auto& p : players) {
    if (p.player_id == player_id) return &p;
  }
  return nullptr;
}

std::string_view to_string(EventType type) {
  for (const auto& [t, name] : kEventNames) {
    if (t == type) return name;
  }
  return "unknown";
}

EventType event_type_from_string(std::string_view name) {
  for (const auto& [t, n] : kEventNames) {
    if (n == name) return t;
  }
  throw ValidationError("unknown event type '" + std::string(name) + "'");
}

bool is_on_ball(EventType type) {
  switch (type) {
  case EventType::Pass:
  case EventType::Reception:
  case EventType::Carry:
  case EventType::Shot:
  case EventType::Cross:
  case EventType::Dribble:
  case EventType::Recovery:
  case EventType::Corner:
  case EventType::FreeKick:
  case EventType::ThrowIn:
  case EventType::GoalKick:
  case EventType::Kickoff:
    return true;
  default:
    return false;
  }
}

bool is_stoppage(EventType type) {
  return type == EventType::BallOut || type == EventType::Foul || type == EventType::Offside;
}

bool is_restart(EventType type) {
  return type == EventType::Corner || type == EventType::FreeKick ||
         type == EventType::ThrowIn || type == EventType::GoalKick || type == EventType::Kickoff;
}

std::string_view to_string(SpeedCategory category) {
  switch (category) {
  case SpeedCategory::Walking: return "walking";
  case SpeedCategory::Jogging: return "jogging";
  case SpeedCategory::Running: return "running";
  case SpeedCategory::Sprinting: return "sprinting";
  }
  return "unknown";
}

void SpeedBands::validate() const {
  if (!(0.0 < walking_max && walking_max < jogging_max && jogging_max < running_max)) {
    throw ValidationError("speed band boundaries must be positive and strictly increasing");
  }
}

SpeedCategory speed_category(double kmh, const SpeedBands& bands) {
  if (!std::isfinite(kmh) || kmh < 0.0) {
    throw ValidationError("speed must be a non-negative number");
  }
  if (kmh < bands.walking_max) return SpeedCategory::Walking;
  if (kmh < bands.jogging_max) return SpeedCategory::Jogging;
  if (kmh < bands.running_max) return SpeedCategory::Running;
  return SpeedCategory::Sprinting;
}

std::string_view to_string(Role role) { return kRoleNames.at(static_cast<std::size_t>(role)); }

Role role_from_string(std::string_view name) {
  for (std::size_t i = 0; i < kRoleNames.size(); ++i) {
    if (kRoleNames[i] == name) return static_cast<Role>(i);
  }
  throw ValidationError("unknown role '" + std::string(name) + "'");
}

Frame normalize_direction(const Frame& frame, std::string_view team_id, const PitchSpec& pitch) {
  const int sign = frame.direction_of(team_id);
  Frame out = frame;
  if (sign < 0) {
    out.ball = reflect(frame.ball, pitch);
    for (auto& p : out.players) p.xy = reflect(p.xy, pitch);
    for (auto& d : out.attacking_direction) d.sign = -d.sign;
  }
  return out;
}

const TeamInfo& MatchMeta::team(std::string_view team_id) const {
  for (const auto& t : teams) {
    if (t.team_id == team_id) return t;
  }
  throw ValidationError("unknown team '" + std::string(team_id) + "'");
}

bool MatchMeta::has_team(std::string_view team_id) const {
  return std::any_of(teams.begin(), teams.end(),
                     [&](const TeamInfo& t) { return t.team_id == team_id; });
}

const std::string& MatchMeta::opponent(std::string_view team_id) const {
  if (teams.size() != 2) throw ValidationError("match must have exactly two teams");
  if (teams[0].team_id == team_id) return teams[1].team_id;
  if (teams[1].team_id == team_id) return teams[0].team_id;
  throw ValidationError("unknown team '" + std::string(team_id) + "'");
}

int MatchMeta::direction(std::string_view team_id, Period period) const {
  const int kickoff = team(team_id).kickoff_direction;
  const bool swapped = period == Period::Second || period == Period::ExtraSecond;
  return swapped ? -kickoff : kickoff;
}

bool MatchMeta::is_goalkeeper(std::string_view player_id) const {
  for (const auto& t : teams) {
    for (const auto& p : t.players) {
      if (p.player_id == player_id) return p.goalkeeper;
    }
  }
  return false;
}

std::optional<std::string> MatchMeta::team_of(std::string_view player_id) const {
  for (const auto& t : teams) {
    for (const auto& p : t.players) {
      if (p.player_id == player_id) return t.team_id;
    }
  }
  return std::nullopt;
}

void MatchMeta::validate() const {
  if (match_id.empty()) throw ValidationError("match metadata lacks a match_id");
  pitch.validate();
  if (teams.size() != 2) throw ValidationError("match metadata must list exactly two teams");
  if (teams[0].team_id == teams[1].team_id) throw ValidationError("team ids must differ");
  if (teams[0].kickoff_direction * teams[1].kickoff_direction != -1) {
    throw ValidationError("kickoff directions must be +1 and -1");
  }
  std::set<std::string> ids;
  for (const auto& t : teams) {
    for (const auto& p : t.players) {
      if (!ids.insert(p.player_id).second) {
        throw ValidationError("duplicate player id '" + p.player_id + "' in rosters");
      }
    }
  }
}

void apply_directions(std::vector<Frame>& frames, const MatchMeta& meta) {
  for (auto& f : frames) {
    f.attacking_direction.clear();
    for (const auto& t : meta.teams) {
      f.attacking_direction.push_back({t.team_id, meta.direction(t.team_id, f.period)});
    }
  }
}

} // namespace runlens
