#pragma once

// Deterministic scripted matches with ground truth.
//
// A script either lists explicit motion directives (a polyline path plus a
// piecewise-linear speed profile or trapezoidal efforts) and events, or asks
// for an automatic full match: two teams in formation, alternating
// possessions, scheduled efforts for every outfield player.

#include "runlens/formations.hpp"
#include "runlens/match.hpp"
#include "runlens/possession.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace runlens::synth {

/// Trapezoidal speed change: base -> cruise at `accel`, hold, -> end.
struct Effort {
  std::int64_t start_ms = 0;
  double base_kmh = 0.0;
  double cruise_kmh = 0.0;
  std::int64_t hold_ms = 0;
  double end_kmh = 0.0;
  double accel = 3.0; // m/s^2
};

struct SpeedKey {
  double t_ms = 0.0;
  double kmh = 0.0;
};

struct PlayerDirective {
  std::string player_id;
  Period period = Period::First;
  std::vector<Point> path; // followed at the scripted speed
  bool shuttle = false;    // bounce back and forth along the path
  std::vector<SpeedKey> speed;
  std::vector<Effort> efforts;
  std::optional<double> initial_kmh;
};

struct ScriptedPossession {
  std::optional<std::string> team_id;
  Period period = Period::First;
  std::int64_t t_start = 0;
  std::int64_t t_end = 0;
  std::optional<AttackType> attack;
};

struct AutoMatch {
  std::map<std::string, std::string> formations;   // team -> template name
  double shape_scale_m = 16.0;                      // RMS radius of the outfield shape
  std::map<std::string, double> defend_depth;       // team -> own-frame anchor x when defending
  double attack_depth = 60.0;
  double anchor_speed = 1.2;                        // m/s
  std::int64_t possession_min_ms = 15000;
  std::int64_t possession_max_ms = 40000;
  double stoppage_share = 0.4;
  std::int64_t stoppage_min_ms = 3000;
  std::int64_t stoppage_max_ms = 8000;
  double direct_play_share = 0.2; // of restarts
  double set_piece_share = 0.2;   // of restarts
  std::int64_t rest_min_ms = 2000;
  std::int64_t rest_max_ms = 10000;
  double sprint_share = 0.5;
  double sprint_kmh = 25.0;
  double jog_kmh = 12.0;
  double return_kmh = 5.0;
  std::int64_t hold_min_ms = 1500;
  std::int64_t hold_max_ms = 3000;
  std::optional<int> decay_after_minute; // on the concatenated clock
  double decay = 0.0;                    // share of sprints turned into jogs afterwards
};

struct Script {
  std::string match_id = "synthetic";
  std::uint64_t seed = 0;
  PitchSpec pitch;
  std::vector<std::int64_t> periods_ms;
  std::vector<TeamInfo> teams;
  std::vector<PlayerDirective> players;
  std::vector<Event> events;
  std::vector<ScriptedPossession> possessions;
  std::optional<AutoMatch> auto_match;
  double noise_m = 0.0;
  double dropout = 0.0;
};

Script script_from_json(const nlohmann::json& j);
Script read_script(const std::filesystem::path& path);

struct ExpectedRun {
  std::string player_id;
  Period period = Period::First;
  double t_valley_end = 0.0;
  double t_peak_start = 0.0;
  double t_peak_end = 0.0;
  double t_next_valley_start = 0.0;
  double peak_kmh = 0.0;
  bool is_hi = false;
};

struct ExpectedPhase {
  Period period = Period::First;
  std::int64_t t_start = 0;
  std::int64_t t_end = 0;
  AttackType attack = AttackType::Organized;
};

struct GroundTruth {
  std::vector<ExpectedRun> runs;
  std::vector<ScriptedPossession> possessions; // tiles every period
  std::vector<ExpectedPhase> attack_phases;
  std::map<std::string, Role> roles;
  std::map<std::string, std::string> formations;
  std::size_t sprints = 0; // auto mode: scheduled sprint efforts
};

struct Output {
  Match match;
  GroundTruth truth;
};

/// Throws ValidationError naming the first violated constraint.
Output generate(const Script& script);

nlohmann::json truth_to_json(const GroundTruth& truth);

} // namespace runlens::synth
