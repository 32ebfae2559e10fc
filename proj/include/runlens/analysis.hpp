#pragma once

// Season-level views over stored matches and the export tables built from
// them. The CLI and the HTTP service both render these tables, so a value is
// computed once.

#include "runlens/aggregation.hpp"
#include "runlens/config.hpp"
#include "runlens/table.hpp"

#include <optional>
#include <string>
#include <vector>

namespace runlens {

struct Season {
  std::vector<MatchSummary> matches;
  AggregationConfig config;
  std::optional<RunInfluenceModel> influence;
  std::string influence_note; // why the influence model is absent
  std::vector<PlayerProfile> profiles;
  std::vector<TeamStyle> teams;

  static Season build(std::vector<MatchSummary> matches, const Config& config);

  /// Profile for (player, role); without a role, the one with most minutes.
  const PlayerProfile* profile(std::string_view player_id, std::optional<Role> role = std::nullopt) const;
  const TeamStyle* team(std::string_view team_id) const;
  std::vector<std::string> players() const; // every player seen in a ledger, sorted
};

/// Columns of the team style PCA, in order.
extern const std::vector<std::string> kStyleColumns;

struct ExportFilters {
  std::optional<std::string> player;
  std::optional<Role> role;
  std::optional<std::string> team;
  std::vector<LineupMember> lineup;
};

class UnknownAnalysis : public ValidationError {
public:
  explicit UnknownAnalysis(const std::string& name);
};

const std::vector<std::string>& analysis_names();
Table export_table(const Season& season, std::string_view analysis, const ExportFilters& filters = {});

Table profiles_table(std::span<const PlayerProfile> profiles);
Table teams_table(std::span<const TeamStyle> teams);
/// Movement-type rows (one per type) of one profile.
Table movement_table(const PlayerProfile& profile);
Table percentiles_table(const Season& season, Role role);
Table lineup_table(const LineupComparison& cmp);
Table pca_table(const Season& season);
/// Roster with minutes per (player, role) and the qualification flag.
Table roster_table(const Season& season, std::optional<Role> role, double min_minutes);

/// JSON array of {player_id, role} objects.
std::vector<LineupMember> lineup_from_json(const nlohmann::json& j);

} // namespace runlens
