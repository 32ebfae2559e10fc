#include "runlens/analysis.hpp"

#include <algorithm>
#include <set>

namespace runlens {

using nlohmann::json;

const std::vector<std::string> kStyleColumns{"possession_share", "direct_play_share", "high_press_share",
                                             "hi_distance_attack_p30", "hi_distance_defense_p30"};

Season Season::build(std::vector<MatchSummary> matches, const Config& config) {
  Season s;
  s.matches = std::move(matches);
  s.config = config.aggregation;
  std::vector<RunValueSample> samples;
  for (const auto& m : s.matches) samples.insert(samples.end(), m.samples.begin(), m.samples.end());
  if (samples.empty()) {
    s.influence_note = "no valued runs";
  } else {
    InfluenceOptions opts;
    opts.min_samples_per_cell = config.influence_min_samples;
    opts.min_minutes = config.aggregation.min_role_minutes;
    opts.minutes = role_minutes(s.matches);
    try {
      s.influence = fit_influence(std::move(samples), opts);
    } catch (const Error& e) {
      s.influence_note = e.what();
    }
  }
  s.profiles = build_profiles(s.matches, s.config, s.influence ? &*s.influence : nullptr);
  s.teams = team_styles(s.matches, s.config);
  return s;
}

const PlayerProfile* Season::profile(std::string_view player_id, std::optional<Role> role) const {
  const PlayerProfile* best = nullptr;
  for (const auto& p : profiles) {
    if (p.player_id != player_id) continue;
    if (role) {
      if (p.role == *role) return &p;
    } else if (best == nullptr || p.minutes > best->minutes) {
      best = &p;
    }
  }
  return best;
}

const TeamStyle* Season::team(std::string_view team_id) const {
  for (const auto& t : teams) {
    if (t.team_id == team_id) return &t;
  }
  return nullptr;
}

std::vector<std::string> Season::players() const {
  std::set<std::string> ids;
  for (const auto& m : matches) {
    for (const auto& p : m.ledger.players) ids.insert(p.player_id);
  }
  return {ids.begin(), ids.end()};
}

UnknownAnalysis::UnknownAnalysis(const std::string& name)
    : ValidationError([&] {
        std::string msg = "unknown analysis '" + name + "'; valid names:";
        for (const auto& n : analysis_names()) msg += " " + n;
        return msg;
      }()) {}

const std::vector<std::string>& analysis_names() {
  static const std::vector<std::string> names{"profiles", "teams", "fig5",  "fig6",  "fig7",  "fig8",
                                              "fig9",     "fig10", "fig11", "fig12", "fig13", "fig14",
                                              "fig15",    "fig16"};
  return names;
}

namespace {

std::string cat_name(std::size_t c) { return std::string(to_string(static_cast<SpeedCategory>(c))); }

Cell coeff_cell(const std::optional<Coefficient>& c, bool se) {
  if (!c) return std::monostate{};
  return se ? c->std_error : c->value;
}

/// Keeps the named columns, in the given order.
Table project(const Table& t, const std::vector<std::string>& columns) {
  std::vector<std::size_t> idx;
  for (const auto& c : columns) {
    const auto it = std::find(t.columns.begin(), t.columns.end(), c);
    if (it == t.columns.end()) throw Error("no column " + c);
    idx.push_back(static_cast<std::size_t>(it - t.columns.begin()));
  }
  Table out;
  out.columns = columns;
  for (const auto& row : t.rows) {
    std::vector<Cell> r;
    for (std::size_t i : idx) r.push_back(row[i]);
    out.rows.push_back(std::move(r));
  }
  return out;
}

std::vector<std::string> with_keys(std::vector<std::string> head, const std::vector<std::string>& tail) {
  head.insert(head.end(), tail.begin(), tail.end());
  return head;
}

std::vector<std::string> category_columns(const std::string& prefix, const std::string& suffix) {
  std::vector<std::string> out;
  for (std::size_t c = 0; c < kSpeedCategoryCount; ++c) out.push_back(prefix + cat_name(c) + suffix);
  return out;
}

std::vector<PlayerProfile> filter_profiles(const Season& season, const ExportFilters& f) {
  std::vector<PlayerProfile> out;
  for (const auto& p : season.profiles) {
    if (f.player && p.player_id != *f.player) continue;
    if (f.role && p.role != *f.role) continue;
    if (f.team && p.team_id != *f.team) continue;
    out.push_back(p);
  }
  return out;
}

std::vector<TeamStyle> filter_teams(const Season& season, const ExportFilters& f) {
  std::vector<TeamStyle> out;
  for (const auto& t : season.teams) {
    if (!f.team || t.team_id == *f.team) out.push_back(t);
  }
  return out;
}

Table minute_table(const Season& season, const ExportFilters& f) {
  Table t;
  t.columns = {"minute", "cells", "distance_per60", "hi_distance_per60", "distance_variation",
               "hi_distance_variation", "distance_variation_smoothed", "hi_distance_variation_smoothed"};
  for (const auto& p : minute_curves(season.matches, season.config, f.team)) {
    t.rows.push_back({static_cast<std::int64_t>(p.minute), static_cast<std::int64_t>(p.cells),
                      opt_cell(p.distance_per60), opt_cell(p.hi_distance_per60), opt_cell(p.distance_variation),
                      opt_cell(p.hi_distance_variation), opt_cell(p.distance_variation_smoothed),
                      opt_cell(p.hi_distance_variation_smoothed)});
  }
  return t;
}

Table influence_table(const Season& season, const ExportFilters& f) {
  Table t;
  t.columns = {"term", "player_id", "role", "estimate", "std_error"};
  if (!season.influence) return t;
  const auto& m = *season.influence;
  if (!f.player && !f.role) {
    t.rows.push_back({std::string("intercept"), std::monostate{}, std::monostate{}, m.intercept.value, m.intercept.std_error});
    t.rows.push_back({std::string("angle"), std::monostate{}, std::monostate{}, m.angle.value, m.angle.std_error});
    t.rows.push_back({std::string("distance"), std::monostate{}, std::monostate{}, m.distance.value, m.distance.std_error});
  }
  for (const auto& [key, c] : m.cells) {
    if (f.player && key.player_id != *f.player) continue;
    if (f.role && key.role != *f.role) continue;
    t.rows.push_back({std::string("cell"), key.player_id, std::string(to_string(key.role)), c.value, c.std_error});
  }
  return t;
}

std::vector<std::string> movement_columns(const std::string& suffix) {
  std::vector<std::string> out;
  for (const auto& m : kMovementTypes) out.push_back(movement_key(m) + suffix);
  return out;
}

} // namespace

Table profiles_table(std::span<const PlayerProfile> profiles) {
  Table t;
  t.columns = {"player_id", "role", "team_id", "matches", "minutes", "minutes_in_possession",
               "minutes_out_of_possession", "hi_runs_in_p30", "hi_distance_in_p30"};
  for (const auto& c : movement_columns("_p30")) t.columns.push_back(c);
  for (const auto& c : movement_columns("_percentile")) t.columns.push_back(c);
  t.columns.push_back("onball_hi_share");
  for (const auto& c : category_columns("onball_actions_", "_p30")) t.columns.push_back(c);
  for (const auto& c : category_columns("onball_action_share_", "")) t.columns.push_back(c);
  t.columns.push_back("receptions");
  for (const auto& c : category_columns("reception_share_", "")) t.columns.push_back(c);
  for (const auto& c : category_columns("epv_added_", "_p30")) t.columns.push_back(c);
  for (const char* c : {"hi_runs_out_p30", "hi_distance_out_p30", "influence", "influence_se"}) t.columns.push_back(c);

  for (const auto& p : profiles) {
    std::vector<Cell> r{p.player_id,
                        std::string(to_string(p.role)),
                        p.team_id,
                        static_cast<std::int64_t>(p.matches),
                        p.minutes,
                        p.minutes_in_possession,
                        p.minutes_out_of_possession,
                        opt_cell(p.hi_runs_in_p30),
                        opt_cell(p.hi_distance_in_p30)};
    for (double v : p.movement_p30) r.push_back(v);
    for (const auto& v : p.movement_percentile) r.push_back(opt_cell(v));
    r.push_back(opt_cell(p.onball_hi_share));
    for (double v : p.onball_actions_p30) r.push_back(v);
    for (double v : p.onball_action_share) r.push_back(v);
    r.push_back(static_cast<std::int64_t>(p.receptions));
    for (double v : p.reception_share) r.push_back(v);
    for (double v : p.epv_added_p30) r.push_back(v);
    r.push_back(opt_cell(p.hi_runs_out_p30));
    r.push_back(opt_cell(p.hi_distance_out_p30));
    r.push_back(coeff_cell(p.influence, false));
    r.push_back(coeff_cell(p.influence, true));
    t.rows.push_back(std::move(r));
  }
  return t;
}

Table teams_table(std::span<const TeamStyle> teams) {
  Table t;
  t.columns = {"team_id", "matches", "qualified", "possession_share", "direct_play_share", "high_press_share",
               "hi_distance_attack_p30", "hi_distance_defense_p30", "distance_attack_p30", "distance_defense_p30",
               "xg_diff"};
  for (const auto& s : teams) {
    t.rows.push_back({s.team_id, static_cast<std::int64_t>(s.matches), s.qualified, s.possession_share,
                      s.direct_play_share, s.high_press_share, s.hi_distance_attack_p30, s.hi_distance_defense_p30,
                      s.distance_attack_p30, s.distance_defense_p30, opt_cell(s.xg_diff)});
  }
  return t;
}

Table movement_table(const PlayerProfile& p) {
  Table t;
  t.columns = {"player_id", "role", "movement", "origin_zone", "destination_zone", "per30", "percentile"};
  for (std::size_t k = 0; k < kMovementTypes.size(); ++k) {
    const auto& m = kMovementTypes[k];
    t.rows.push_back({p.player_id, std::string(to_string(p.role)), movement_key(m), std::string(to_string(m.origin)),
                      std::string(to_string(m.destination)), p.movement_p30[k], opt_cell(p.movement_percentile[k])});
  }
  return t;
}

Table percentiles_table(const Season& season, Role role) {
  std::vector<PlayerProfile> peers;
  for (const auto& p : season.profiles) {
    if (p.role == role) peers.push_back(p);
  }
  return project(profiles_table(peers),
                 with_keys(with_keys({"player_id", "role", "team_id", "minutes"}, movement_columns("_p30")),
                           movement_columns("_percentile")));
}

Table lineup_table(const LineupComparison& cmp) {
  Table t;
  t.columns = {"movement", "a", "b", "delta"};
  for (std::size_t k = 0; k < kMovementTypes.size(); ++k) {
    t.rows.push_back({movement_key(kMovementTypes[k]), cmp.a.per30[k], cmp.b.per30[k], cmp.delta[k]});
  }
  return t;
}

Table pca_table(const Season& season) {
  Table t;
  t.columns = {"kind", "name", "pc1", "pc2", "value"};
  std::vector<std::vector<double>> rows;
  std::vector<std::string> names;
  const Table teams = project(teams_table(season.teams), with_keys({"team_id", "qualified"}, kStyleColumns));
  for (const auto& r : teams.rows) {
    if (!std::get<bool>(r[1])) continue;
    names.push_back(std::get<std::string>(r[0]));
    std::vector<double> v;
    for (std::size_t i = 2; i < r.size(); ++i) v.push_back(std::get<double>(r[i]));
    rows.push_back(std::move(v));
  }
  if (rows.size() < 3) return t;
  PcaResult pca;
  try {
    pca = style_pca(rows, kStyleColumns);
  } catch (const Error&) {
    return t;
  }
  for (std::size_t c = 0; c < pca.eigenvalues.size(); ++c) {
    t.rows.push_back({std::string("component"), "pc" + std::to_string(c + 1), std::monostate{}, std::monostate{},
                      pca.explained_ratio[c]});
  }
  for (std::size_t j = 0; j < kStyleColumns.size(); ++j) {
    t.rows.push_back({std::string("loading"), kStyleColumns[j], pca.loadings[0][j], pca.loadings[1][j], std::monostate{}});
  }
  for (std::size_t i = 0; i < names.size(); ++i) {
    t.rows.push_back({std::string("team"), names[i], pca.scores[i][0], pca.scores[i][1], std::monostate{}});
  }
  return t;
}

Table roster_table(const Season& season, std::optional<Role> role, double min_minutes) {
  std::map<std::string, std::string> team_of;
  for (const auto& m : season.matches) {
    for (const auto& p : m.ledger.players) team_of.try_emplace(p.player_id, p.team_id);
  }
  Table t;
  t.columns = {"player_id", "team_id", "role", "minutes", "qualified"};
  for (const auto& [key, minutes] : role_minutes(season.matches)) {
    if (role && key.role != *role) continue;
    t.rows.push_back({key.player_id, team_of[key.player_id], std::string(to_string(key.role)), minutes,
                      minutes >= min_minutes});
  }
  return t;
}

std::vector<LineupMember> lineup_from_json(const json& j) {
  if (!j.is_array()) throw ValidationError("a lineup is an array of {player_id, role} objects");
  std::vector<LineupMember> out;
  for (const auto& o : j) {
    if (!o.is_object() || !o.contains("player_id") || !o.contains("role") || !o.at("player_id").is_string() ||
        !o.at("role").is_string()) {
      throw ValidationError("lineup members need string player_id and role fields");
    }
    out.push_back({o.at("player_id").get<std::string>(), role_from_string(o.at("role").get<std::string>())});
  }
  return out;
}

Table export_table(const Season& season, std::string_view analysis, const ExportFilters& f) {
  const std::vector<std::string> who{"player_id", "role", "team_id"};
  if (analysis == "profiles") return profiles_table(filter_profiles(season, f));
  if (analysis == "teams") return teams_table(filter_teams(season, f));
  if (analysis == "fig5") {
    return project(profiles_table(filter_profiles(season, f)),
                   with_keys(who, {"minutes", "hi_distance_in_p30", "hi_distance_out_p30"}));
  }
  if (analysis == "fig6") {
    return project(teams_table(filter_teams(season, f)), {"team_id", "distance_attack_p30", "distance_defense_p30"});
  }
  if (analysis == "fig7") {
    return project(teams_table(filter_teams(season, f)),
                   {"team_id", "hi_distance_attack_p30", "hi_distance_defense_p30", "xg_diff"});
  }
  if (analysis == "fig8") return pca_table(season);
  if (analysis == "fig9") {
    return project(profiles_table(filter_profiles(season, f)),
                   with_keys(with_keys(who, category_columns("onball_actions_", "_p30")),
                             category_columns("onball_action_share_", "")));
  }
  if (analysis == "fig10") {
    return project(profiles_table(filter_profiles(season, f)), with_keys(who, {"hi_runs_in_p30", "onball_hi_share"}));
  }
  if (analysis == "fig11") {
    Table out = movement_table(PlayerProfile{});
    out.rows.clear();
    if (f.player) {
      const auto* p = season.profile(*f.player, f.role);
      if (p == nullptr) {
        throw ValidationError("no qualifying profile for player " + *f.player +
                              (f.role ? " as " + std::string(to_string(*f.role)) : std::string()));
      }
      return movement_table(*p);
    }
    for (const auto& p : filter_profiles(season, f)) {
      const Table one = movement_table(p);
      out.rows.insert(out.rows.end(), one.rows.begin(), one.rows.end());
    }
    return out;
  }
  if (analysis == "fig12") {
    if (f.lineup.empty()) throw ValidationError("fig12 needs a lineup (--lineup FILE)");
    const auto totals = lineup_aggregate(f.lineup, season.profiles);
    Table t;
    t.columns = {"movement", "total_p30"};
    for (std::size_t k = 0; k < kMovementTypes.size(); ++k) t.rows.push_back({movement_key(kMovementTypes[k]), totals.per30[k]});
    return t;
  }
  if (analysis == "fig13") {
    return project(profiles_table(filter_profiles(season, f)),
                   with_keys(with_keys(who, {"receptions"}), category_columns("reception_share_", "")));
  }
  if (analysis == "fig14") {
    return project(profiles_table(filter_profiles(season, f)), with_keys(who, category_columns("epv_added_", "_p30")));
  }
  if (analysis == "fig15") return influence_table(season, f);
  if (analysis == "fig16") return minute_table(season, f);
  throw UnknownAnalysis(std::string(analysis));
}

} // namespace runlens
