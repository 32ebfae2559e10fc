#pragma once

// Possession-value deltas of high-intensity runs and the per-(player, role)
// run-influence regression
//   epv_added ~ b0 + b1 * angle + b2 * distance + sum_p bp * E_p

#include "runlens/formations.hpp"
#include "runlens/kinematics.hpp"
#include "runlens/match.hpp"
#include "runlens/possession.hpp"

#include <compare>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace runlens {

/// Possession value seen by `attacking_team` in a frame, in [0, 1].
class EpvProvider {
public:
  virtual ~EpvProvider() = default;
  virtual double evaluate(const Frame& frame, std::string_view attacking_team) const = 0;
  virtual std::string name() const = 0;
};

/// Closed-form stand-in: logistic(-4 + 5 x/L - 2 |y - W/2| / (W/2)), x measured
/// in the attacking direction. Throws for frames flagged out of play.
class SurrogateEpv final : public EpvProvider {
public:
  explicit SurrogateEpv(PitchSpec pitch = {}) : pitch_(pitch) {}
  double evaluate(const Frame& frame, std::string_view attacking_team) const override;
  std::string name() const override { return "surrogate"; }
  double value_at(Point canonical_ball) const;

private:
  PitchSpec pitch_;
};

/// Precomputed values from a CSV with header `t_ms,team,value` (an optional
/// leading `period` column disambiguates periods).
class TableEpv final : public EpvProvider {
public:
  static TableEpv from_csv(std::istream& in);
  static TableEpv from_file(const std::filesystem::path& path);
  double evaluate(const Frame& frame, std::string_view attacking_team) const override;
  std::string name() const override { return "table"; }
  void set(Period period, std::int64_t t_ms, std::string team, double value);

private:
  std::map<std::tuple<int, std::int64_t, std::string>, double> values_;
};

struct ValuationConfig {
  std::int64_t after_peak_ms = 2000;
  std::int64_t frame_tolerance_ms = 200;
};

struct RunValueSample {
  std::string run_id; // stable sort key: match/player/period/t_valley_end
  std::string player_id;
  Role role = Role::Midfielder;
  double epv_start = 0.0;
  double epv_end = 0.0;
  double epv_added = 0.0;
  double angle = 0.0;    // radians to the goal centre from the run origin, [0, pi/2]
  double distance = 0.0; // metres from the run origin to the goal centre
};

struct ValueOutcome {
  std::optional<RunValueSample> sample;
  std::string discard_reason;
};

/// Angle and distance from a canonical origin to the attacked goal centre.
std::pair<double, double> goal_angle_distance(Point canonical_origin, const PitchSpec& pitch);

struct RunValueInput {
  const RunEffort* run = nullptr;
  std::string run_id;
  Period period = Period::First;
  std::string team_id;
  Role role = Role::Midfielder;
};

/// EPV at the valley end and two seconds after the peak end, inside one
/// possession of the runner's team.
ValueOutcome value_run(const RunValueInput& input, const MatchIndex& index,
                       std::span<const PossessionSegment> segments, const EpvProvider& provider,
                       const ValuationConfig& config = {});

struct CellKey {
  std::string player_id;
  Role role = Role::Midfielder;

  friend auto operator<=>(const CellKey&, const CellKey&) = default;
  friend bool operator==(const CellKey&, const CellKey&) = default;
};

std::string cell_label(const CellKey& key);

struct Coefficient {
  double value = 0.0;
  double std_error = 0.0;
};

struct RunInfluenceModel {
  Coefficient intercept;
  Coefficient angle;
  Coefficient distance;
  std::map<CellKey, Coefficient> cells; // reference cell reported as 0 +- 0
  CellKey reference;
  double residual_variance = 0.0;
  std::size_t n_samples = 0;
};

struct InfluenceOptions {
  std::size_t min_samples_per_cell = 10;
  double min_minutes = 450.0;
  /// Minutes per cell; cells below `min_minutes` are excluded. Unused when empty.
  std::map<CellKey, double> minutes;
};

/// Raised for a rank-deficient design; lists the collinear columns.
class RankDeficient : public Error {
public:
  RankDeficient(const std::string& what, std::vector<std::string> columns)
      : Error(what), columns_(std::move(columns)) {}
  const std::vector<std::string>& columns() const { return columns_; }

private:
  std::vector<std::string> columns_;
};

/// Ordinary least squares through a column-pivoted QR factorization.
RunInfluenceModel fit_influence(std::vector<RunValueSample> samples, const InfluenceOptions& options = {});

} // namespace runlens
