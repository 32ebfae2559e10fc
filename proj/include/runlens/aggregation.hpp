#pragma once

// Effective-time normalization and season aggregates: player profiles, team
// styles, the style PCA, lineup aggregation and per-minute defensive curves.

#include "runlens/kinematics.hpp"
#include "runlens/possession.hpp"
#include "runlens/tactical.hpp"
#include "runlens/valuation.hpp"

#include <array>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace runlens {

enum class Phase { InPossession, OutOfPossession, OutOfPlay };

std::string_view to_string(Phase phase);
Phase phase_from_string(std::string_view name);

/// A run joined with its tactical, phase and role context.
struct ContextualizedRun {
  std::string match_id;
  std::string team_id;
  Period period = Period::First;
  RunEffort run;
  std::optional<Role> role;
  Phase phase = Phase::OutOfPlay;
  std::optional<AttackType> attack_type;
  std::optional<DefenseType> defense_type;
  std::optional<Zone> origin_zone;
  std::optional<Zone> destination_zone;
  std::optional<MovementType> movement;
  bool on_ball = false; // span intersects one of the runner's on-ball actions
};

/// Reception followed by the same player's consecutive events.
struct OnBallAction {
  std::string match_id;
  std::string player_id;
  std::string team_id;
  Period period = Period::First;
  std::optional<Role> role;
  std::int64_t t_start = 0; // reception
  std::int64_t t_end = 0;   // last event of the control
  std::optional<double> action_speed;    // smoothed km/h at the reception
  std::optional<double> reception_speed; // smoothed km/h two seconds before it
  std::optional<double> epv_start;
  std::optional<double> epv_end;
  bool in_possession = true;
};

struct TeamLedger {
  std::string team_id;
  double in_possession_s = 0.0;
  double out_of_possession_s = 0.0;
  double out_of_play_s = 0.0;
  double distance_in = 0.0;
  double distance_out = 0.0;
  double hi_distance_in = 0.0;
  double hi_distance_out = 0.0;
  double direct_play_s = 0.0;
  double high_press_s = 0.0;
  double defense_labelled_s = 0.0; // out-of-possession time with a known defence type
  std::optional<double> xg_for;
  std::optional<double> xg_against;
};

struct PlayerLedger {
  std::string player_id;
  std::string team_id;
  std::optional<Role> role;
  double in_possession_s = 0.0;
  double out_of_possession_s = 0.0;
  double out_of_play_s = 0.0;

  double total_s() const { return in_possession_s + out_of_possession_s + out_of_play_s; }
};

struct MinuteStat {
  std::string team_id;
  int minute = 0; // on the concatenated match clock
  double out_of_possession_s = 0.0;
  double distance = 0.0;    // while out of possession
  double hi_distance = 0.0; // while out of possession
};

struct EffectiveTimeLedger {
  std::string match_id;
  double duration_s = 0.0;
  std::vector<TeamLedger> teams;
  std::vector<PlayerLedger> players;
  std::vector<MinuteStat> minutes;

  /// in + out + out_of_play == duration for every team (to `tol` seconds).
  bool conserves(double tol = 1e-9) const;
};

/// Everything aggregation needs from one processed match.
struct MatchSummary {
  std::string match_id;
  EffectiveTimeLedger ledger;
  std::vector<ContextualizedRun> runs;
  std::vector<OnBallAction> actions;
  std::vector<RunValueSample> samples;
};

struct AggregationConfig {
  double min_role_minutes = 450.0;
  std::size_t min_role_peers = 5;
  std::size_t min_team_matches = 3;
  int rolling_minutes = 5;
  SpeedBands bands;
};

/// value * base_s / phase_s; nullopt when phase_s is not positive.
std::optional<double> normalize(double value, double phase_s, double base_s);
inline std::optional<double> per30(double value, double phase_s) { return normalize(value, phase_s, 1800.0); }
inline std::optional<double> per60(double value, double effective_s) { return normalize(value, effective_s, 3600.0); }

/// Midpoint-rank percentile of `value` within `population` (which includes it).
double midpoint_percentile(double value, std::span<const double> population);

struct PlayerProfile {
  std::string player_id;
  Role role = Role::Midfielder;
  std::string team_id;
  std::size_t matches = 0;
  double minutes = 0.0;
  double minutes_in_possession = 0.0;
  double minutes_out_of_possession = 0.0;

  std::optional<double> hi_runs_in_p30;
  std::optional<double> hi_distance_in_p30;
  std::array<double, 6> movement_p30{};
  std::array<std::optional<double>, 6> movement_percentile{};
  std::optional<double> onball_hi_share;
  std::array<double, kSpeedCategoryCount> onball_actions_p30{};
  std::array<double, kSpeedCategoryCount> onball_action_share{};
  std::array<double, kSpeedCategoryCount> reception_share{};
  std::size_t receptions = 0;
  std::array<double, kSpeedCategoryCount> epv_added_p30{};
  std::optional<double> hi_runs_out_p30;
  std::optional<double> hi_distance_out_p30;
  std::optional<Coefficient> influence;
};

/// Role-minute totals per (player, role) across the season.
std::map<CellKey, double> role_minutes(std::span<const MatchSummary> matches);

/// Profiles for every (player, role) with at least `min_role_minutes`.
std::vector<PlayerProfile> build_profiles(std::span<const MatchSummary> matches, const AggregationConfig& config = {},
                                          const RunInfluenceModel* influence = nullptr);

/// Per-30 movement-type frequencies of one (player, role) and the midpoint
/// percentiles against same-role qualified peers (absent with too few peers).
struct MovementFrequencies {
  std::array<double, 6> per30{};
  std::array<std::optional<double>, 6> percentile{};
};
MovementFrequencies movement_type_frequencies(const PlayerProfile& profile, std::span<const PlayerProfile> peers,
                                              const AggregationConfig& config = {});

struct OnBallSpeedAnalysis {
  std::array<double, kSpeedCategoryCount> reception_share{};
  std::array<double, kSpeedCategoryCount> epv_added_p30{};
  std::size_t receptions = 0;
};
/// Reception-speed distribution and EPV added per reception-speed category.
OnBallSpeedAnalysis onball_speed_analysis(std::span<const OnBallAction> actions, double in_possession_s,
                                          const AggregationConfig& config = {});

struct TeamStyle {
  std::string team_id;
  std::size_t matches = 0;
  bool qualified = false; // enough matches
  double possession_share = 0.0;
  double direct_play_share = 0.0;
  double high_press_share = 0.0;
  double hi_distance_attack_p30 = 0.0;
  double hi_distance_defense_p30 = 0.0;
  double distance_attack_p30 = 0.0;
  double distance_defense_p30 = 0.0;
  std::optional<double> xg_diff;
};

TeamStyle team_style(std::string_view team_id, std::span<const MatchSummary> matches,
                     const AggregationConfig& config = {});
std::vector<TeamStyle> team_styles(std::span<const MatchSummary> matches, const AggregationConfig& config = {});

struct PcaResult {
  std::vector<std::string> columns;
  std::vector<double> eigenvalues;          // descending
  std::vector<double> explained_ratio;      // sums to 1
  std::vector<std::vector<double>> loadings; // [component][column], unit norm
  std::vector<std::vector<double>> scores;   // [row][component]
  std::vector<std::vector<double>> correlation;
  std::vector<std::vector<double>> standardized; // [row][column]
};

/// Correlation-matrix PCA of z-scored columns. Each component's largest
/// |loading| is positive. Throws for constant columns or missing cells.
PcaResult style_pca(const std::vector<std::vector<double>>& rows, const std::vector<std::string>& columns);

struct LineupMember {
  std::string player_id;
  Role role = Role::Midfielder;
};

struct LineupTotals {
  std::array<double, 6> per30{};
};

/// Raised when lineup members lack a qualifying profile (or repeat a player).
class LineupError : public Error {
public:
  LineupError(const std::string& what, std::vector<std::string> gaps) : Error(what), gaps_(std::move(gaps)) {}
  const std::vector<std::string>& gaps() const { return gaps_; }

private:
  std::vector<std::string> gaps_;
};

LineupTotals lineup_aggregate(std::span<const LineupMember> lineup, std::span<const PlayerProfile> profiles);

struct LineupComparison {
  LineupTotals a;
  LineupTotals b;
  std::array<double, 6> delta{}; // b - a
};
LineupComparison compare_lineups(std::span<const LineupMember> a, std::span<const LineupMember> b,
                                 std::span<const PlayerProfile> profiles);

struct MinuteCurvePoint {
  int minute = 0;
  std::size_t cells = 0; // (match, team) cells with out-of-possession time
  std::optional<double> distance_per60;
  std::optional<double> hi_distance_per60;
  std::optional<double> distance_variation;
  std::optional<double> hi_distance_variation;
  std::optional<double> distance_variation_smoothed;
  std::optional<double> hi_distance_variation_smoothed;
};

/// Per-minute defensive distance scaled to 60 s of out-of-possession time,
/// its variation against the season mean and a centred rolling mean.
std::vector<MinuteCurvePoint> minute_curves(std::span<const MatchSummary> matches, const AggregationConfig& config = {},
                                            std::optional<std::string> team_id = std::nullopt);

} // namespace runlens
