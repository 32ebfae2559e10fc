#include "runlens/aggregation.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <set>

namespace runlens {

std::string_view to_string(Phase phase) {
  switch (phase) {
  case Phase::InPossession: return "in_possession";
  case Phase::OutOfPossession: return "out_of_possession";
  case Phase::OutOfPlay: return "out_of_play";
  }
  return "unknown";
}

Phase phase_from_string(std::string_view name) {
  for (Phase p : {Phase::InPossession, Phase::OutOfPossession, Phase::OutOfPlay}) {
    if (to_string(p) == name) return p;
  }
  throw ValidationError("unknown phase '" + std::string(name) + "'");
}

bool EffectiveTimeLedger::conserves(double tol) const {
  return std::all_of(teams.begin(), teams.end(), [&](const TeamLedger& t) {
    return std::abs(t.in_possession_s + t.out_of_possession_s + t.out_of_play_s - duration_s) <= tol;
  });
}

std::optional<double> normalize(double value, double phase_s, double base_s) {
  if (!(phase_s > 0.0)) return std::nullopt;
  return value * (base_s / phase_s);
}

double midpoint_percentile(double value, std::span<const double> population) {
  if (population.empty()) return 50.0;
  std::size_t less = 0, equal = 0;
  for (double v : population) {
    if (v < value) {
      ++less;
    } else if (v == value) {
      ++equal;
    }
  }
  return 100.0 * (static_cast<double>(less) + 0.5 * static_cast<double>(equal)) /
         static_cast<double>(population.size());
}

std::map<CellKey, double> role_minutes(std::span<const MatchSummary> matches) {
  std::map<CellKey, double> out;
  for (const auto& m : matches) {
    for (const auto& p : m.ledger.players) {
      if (p.role) out[{p.player_id, *p.role}] += p.total_s() / 60.0;
    }
  }
  return out;
}

namespace {

std::size_t category_index(double kmh, const SpeedBands& bands) {
  return static_cast<std::size_t>(speed_category(std::max(0.0, kmh), bands));
}

struct CellAccum {
  std::string team_id;
  std::set<std::string> matches;
  double in_s = 0.0, out_s = 0.0, play_s = 0.0;
  double hi_in = 0.0, hi_out = 0.0, hi_dist_in = 0.0, hi_dist_out = 0.0, onball_hi = 0.0;
  std::array<double, 6> movement{};
  std::array<double, kSpeedCategoryCount> actions{};
  std::vector<OnBallAction> receptions;
};

} // namespace

OnBallSpeedAnalysis onball_speed_analysis(std::span<const OnBallAction> actions, double in_possession_s,
                                          const AggregationConfig& config) {
  OnBallSpeedAnalysis out;
  std::array<double, kSpeedCategoryCount> counts{};
  std::array<double, kSpeedCategoryCount> epv{};
  for (const auto& a : actions) {
    if (!a.reception_speed) continue;
    const std::size_t c = category_index(*a.reception_speed, config.bands);
    counts[c] += 1.0;
    ++out.receptions;
    if (a.epv_start && a.epv_end) epv[c] += *a.epv_end - *a.epv_start;
  }
  for (std::size_t c = 0; c < counts.size(); ++c) {
    if (out.receptions > 0) out.reception_share[c] = counts[c] / static_cast<double>(out.receptions);
    out.epv_added_p30[c] = per30(epv[c], in_possession_s).value_or(0.0);
  }
  return out;
}

MovementFrequencies movement_type_frequencies(const PlayerProfile& profile, std::span<const PlayerProfile> peers,
                                              const AggregationConfig& config) {
  MovementFrequencies out;
  out.per30 = profile.movement_p30;
  std::vector<const PlayerProfile*> same_role;
  for (const auto& p : peers) {
    if (p.role == profile.role) same_role.push_back(&p);
  }
  if (same_role.size() < config.min_role_peers) return out;
  for (std::size_t k = 0; k < out.per30.size(); ++k) {
    std::vector<double> values;
    values.reserve(same_role.size());
    for (const auto* p : same_role) values.push_back(p->movement_p30[k]);
    out.percentile[k] = midpoint_percentile(out.per30[k], values);
  }
  return out;
}

std::vector<PlayerProfile> build_profiles(std::span<const MatchSummary> matches, const AggregationConfig& config,
                                          const RunInfluenceModel* influence) {
  const auto minutes = role_minutes(matches);
  std::map<CellKey, CellAccum> acc;
  for (const auto& [key, mins] : minutes) {
    if (mins >= config.min_role_minutes) acc.try_emplace(key);
  }

  for (const auto& m : matches) {
    for (const auto& p : m.ledger.players) {
      if (!p.role) continue;
      auto it = acc.find({p.player_id, *p.role});
      if (it == acc.end()) continue;
      auto& a = it->second;
      if (a.team_id.empty()) a.team_id = p.team_id;
      a.matches.insert(m.match_id);
      a.in_s += p.in_possession_s;
      a.out_s += p.out_of_possession_s;
      a.play_s += p.out_of_play_s;
    }
    for (const auto& cr : m.runs) {
      if (!cr.role || !cr.run.is_hi) continue;
      auto it = acc.find({cr.run.player_id, *cr.role});
      if (it == acc.end()) continue;
      auto& a = it->second;
      if (cr.phase == Phase::InPossession) {
        a.hi_in += 1.0;
        a.hi_dist_in += cr.run.distance_hi;
        if (cr.on_ball) a.onball_hi += 1.0;
        if (cr.movement) a.movement[movement_index(*cr.movement)] += 1.0;
      } else if (cr.phase == Phase::OutOfPossession) {
        a.hi_out += 1.0;
        a.hi_dist_out += cr.run.distance_hi;
      }
    }
    for (const auto& act : m.actions) {
      if (!act.role || !act.in_possession) continue;
      auto it = acc.find({act.player_id, *act.role});
      if (it == acc.end()) continue;
      if (act.action_speed) it->second.actions[category_index(*act.action_speed, config.bands)] += 1.0;
      it->second.receptions.push_back(act);
    }
  }

  std::vector<PlayerProfile> profiles;
  for (auto& [key, a] : acc) {
    PlayerProfile p;
    p.player_id = key.player_id;
    p.role = key.role;
    p.team_id = a.team_id;
    p.matches = a.matches.size();
    p.minutes = minutes.at(key);
    p.minutes_in_possession = a.in_s / 60.0;
    p.minutes_out_of_possession = a.out_s / 60.0;
    p.hi_runs_in_p30 = per30(a.hi_in, a.in_s);
    p.hi_distance_in_p30 = per30(a.hi_dist_in, a.in_s);
    for (std::size_t k = 0; k < 6; ++k) p.movement_p30[k] = per30(a.movement[k], a.in_s).value_or(0.0);
    if (a.hi_in > 0.0) p.onball_hi_share = a.onball_hi / a.hi_in;
    double total_actions = 0.0;
    for (double c : a.actions) total_actions += c;
    for (std::size_t c = 0; c < kSpeedCategoryCount; ++c) {
      p.onball_actions_p30[c] = per30(a.actions[c], a.in_s).value_or(0.0);
      p.onball_action_share[c] = total_actions > 0.0 ? a.actions[c] / total_actions : 0.0;
    }
    const auto onball = onball_speed_analysis(a.receptions, a.in_s, config);
    p.reception_share = onball.reception_share;
    p.receptions = onball.receptions;
    p.epv_added_p30 = onball.epv_added_p30;
    p.hi_runs_out_p30 = per30(a.hi_out, a.out_s);
    p.hi_distance_out_p30 = per30(a.hi_dist_out, a.out_s);
    if (influence != nullptr) {
      if (auto it = influence->cells.find(key); it != influence->cells.end()) p.influence = it->second;
    }
    profiles.push_back(std::move(p));
  }
  for (auto& p : profiles) p.movement_percentile = movement_type_frequencies(p, profiles, config).percentile;
  return profiles;
}

TeamStyle team_style(std::string_view team_id, std::span<const MatchSummary> matches, const AggregationConfig& config) {
  TeamStyle style;
  style.team_id = std::string(team_id);
  TeamLedger sum;
  double xg = 0.0;
  bool xg_complete = true;
  for (const auto& m : matches) {
    for (const auto& t : m.ledger.teams) {
      if (t.team_id != team_id) continue;
      ++style.matches;
      sum.in_possession_s += t.in_possession_s;
      sum.out_of_possession_s += t.out_of_possession_s;
      sum.distance_in += t.distance_in;
      sum.distance_out += t.distance_out;
      sum.hi_distance_in += t.hi_distance_in;
      sum.hi_distance_out += t.hi_distance_out;
      sum.direct_play_s += t.direct_play_s;
      sum.high_press_s += t.high_press_s;
      if (t.xg_for && t.xg_against) {
        xg += *t.xg_for - *t.xg_against;
      } else {
        xg_complete = false;
      }
    }
  }
  style.qualified = style.matches >= config.min_team_matches;
  const double effective = sum.in_possession_s + sum.out_of_possession_s;
  style.possession_share = effective > 0.0 ? sum.in_possession_s / effective : 0.0;
  style.direct_play_share = sum.in_possession_s > 0.0 ? sum.direct_play_s / sum.in_possession_s : 0.0;
  style.high_press_share = sum.out_of_possession_s > 0.0 ? sum.high_press_s / sum.out_of_possession_s : 0.0;
  style.hi_distance_attack_p30 = per30(sum.hi_distance_in, sum.in_possession_s).value_or(0.0);
  style.hi_distance_defense_p30 = per30(sum.hi_distance_out, sum.out_of_possession_s).value_or(0.0);
  style.distance_attack_p30 = per30(sum.distance_in, sum.in_possession_s).value_or(0.0);
  style.distance_defense_p30 = per30(sum.distance_out, sum.out_of_possession_s).value_or(0.0);
  if (xg_complete && style.matches > 0) style.xg_diff = xg / static_cast<double>(style.matches);
  return style;
}

std::vector<TeamStyle> team_styles(std::span<const MatchSummary> matches, const AggregationConfig& config) {
  std::set<std::string> teams;
  for (const auto& m : matches) {
    for (const auto& t : m.ledger.teams) teams.insert(t.team_id);
  }
  std::vector<TeamStyle> out;
  for (const auto& t : teams) out.push_back(team_style(t, matches, config));
  return out;
}

PcaResult style_pca(const std::vector<std::vector<double>>& rows, const std::vector<std::string>& columns) {
  const std::size_t n = rows.size();
  const std::size_t p = columns.size();
  if (n < 3) throw ValidationError("PCA needs at least 3 rows");
  if (p < 2) throw ValidationError("PCA needs at least 2 columns");
  Eigen::MatrixXd z(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
  for (std::size_t i = 0; i < n; ++i) {
    if (rows[i].size() != p) throw ValidationError("PCA row " + std::to_string(i) + " has a missing cell");
    for (std::size_t j = 0; j < p; ++j) {
      if (!std::isfinite(rows[i][j])) throw ValidationError("PCA cell (" + std::to_string(i) + ", " + columns[j] + ") is missing");
      z(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  for (Eigen::Index j = 0; j < z.cols(); ++j) {
    const double mean = z.col(j).mean();
    z.col(j).array() -= mean;
    const double sd = std::sqrt(z.col(j).squaredNorm() / static_cast<double>(n - 1));
    if (!(sd > 1e-12 * std::max(1.0, std::abs(mean)))) {
      throw ValidationError("PCA column '" + columns[static_cast<std::size_t>(j)] + "' is constant");
    }
    z.col(j) /= sd;
  }
  const Eigen::MatrixXd corr = (z.transpose() * z) / static_cast<double>(n - 1);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(corr);
  if (eig.info() != Eigen::Success) throw Error("PCA eigendecomposition failed");

  PcaResult out;
  out.columns = columns;
  const Eigen::Index pp = static_cast<Eigen::Index>(p);
  Eigen::MatrixXd v(pp, pp);
  for (Eigen::Index k = 0; k < pp; ++k) {
    const Eigen::Index src = pp - 1 - k; // descending
    Eigen::VectorXd vec = eig.eigenvectors().col(src);
    Eigen::Index arg = 0;
    vec.cwiseAbs().maxCoeff(&arg);
    if (vec(arg) < 0) vec = -vec;
    v.col(k) = vec;
    out.eigenvalues.push_back(std::max(0.0, eig.eigenvalues()(src)));
  }
  double total = 0.0;
  for (double e : out.eigenvalues) total += e;
  for (double e : out.eigenvalues) out.explained_ratio.push_back(e / total);
  const Eigen::MatrixXd scores = z * v;
  out.loadings.assign(p, std::vector<double>(p));
  out.correlation.assign(p, std::vector<double>(p));
  for (std::size_t k = 0; k < p; ++k) {
    for (std::size_t j = 0; j < p; ++j) {
      out.loadings[k][j] = v(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k));
      out.correlation[k][j] = corr(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j));
    }
  }
  out.scores.assign(n, std::vector<double>(p));
  out.standardized.assign(n, std::vector<double>(p));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < p; ++k) {
      out.scores[i][k] = scores(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k));
      out.standardized[i][k] = z(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k));
    }
  }
  return out;
}

LineupTotals lineup_aggregate(std::span<const LineupMember> lineup, std::span<const PlayerProfile> profiles) {
  std::vector<std::string> gaps;
  std::set<std::string> seen;
  LineupTotals totals;
  for (const auto& member : lineup) {
    if (!seen.insert(member.player_id).second) {
      gaps.push_back("duplicate " + member.player_id);
      continue;
    }
    auto it = std::find_if(profiles.begin(), profiles.end(), [&](const PlayerProfile& p) {
      return p.player_id == member.player_id && p.role == member.role;
    });
    if (it == profiles.end()) {
      gaps.push_back(cell_label({member.player_id, member.role}));
      continue;
    }
    for (std::size_t k = 0; k < 6; ++k) totals.per30[k] += it->movement_p30[k];
  }
  if (!gaps.empty()) {
    std::string msg = "lineup has members without a qualifying profile:";
    for (const auto& g : gaps) msg += " " + g;
    throw LineupError(msg, std::move(gaps));
  }
  return totals;
}

LineupComparison compare_lineups(std::span<const LineupMember> a, std::span<const LineupMember> b,
                                 std::span<const PlayerProfile> profiles) {
  std::vector<std::string> gaps;
  LineupComparison out;
  try {
    out.a = lineup_aggregate(a, profiles);
  } catch (const LineupError& e) {
    for (const auto& g : e.gaps()) gaps.push_back("a: " + g);
  }
  try {
    out.b = lineup_aggregate(b, profiles);
  } catch (const LineupError& e) {
    for (const auto& g : e.gaps()) gaps.push_back("b: " + g);
  }
  if (!gaps.empty()) throw LineupError("invalid lineup", std::move(gaps));
  for (std::size_t k = 0; k < 6; ++k) out.delta[k] = out.b.per30[k] - out.a.per30[k];
  return out;
}

std::vector<MinuteCurvePoint> minute_curves(std::span<const MatchSummary> matches, const AggregationConfig& config,
                                            std::optional<std::string> team_id) {
  int max_minute = -1;
  for (const auto& m : matches) {
    for (const auto& s : m.ledger.minutes) {
      if (!team_id || s.team_id == *team_id) max_minute = std::max(max_minute, s.minute);
    }
  }
  std::vector<MinuteCurvePoint> out(static_cast<std::size_t>(max_minute + 1));
  std::vector<double> dist_sum(out.size(), 0.0), hi_sum(out.size(), 0.0);
  for (std::size_t i = 0; i < out.size(); ++i) out[i].minute = static_cast<int>(i);
  for (const auto& m : matches) {
    for (const auto& s : m.ledger.minutes) {
      if (team_id && s.team_id != *team_id) continue;
      if (!(s.out_of_possession_s > 0.0)) continue;
      const auto i = static_cast<std::size_t>(s.minute);
      dist_sum[i] += s.distance * 60.0 / s.out_of_possession_s;
      hi_sum[i] += s.hi_distance * 60.0 / s.out_of_possession_s;
      ++out[i].cells;
    }
  }
  double dist_mean = 0.0, hi_mean = 0.0;
  std::size_t present = 0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (out[i].cells == 0) continue;
    out[i].distance_per60 = dist_sum[i] / static_cast<double>(out[i].cells);
    out[i].hi_distance_per60 = hi_sum[i] / static_cast<double>(out[i].cells);
    dist_mean += *out[i].distance_per60;
    hi_mean += *out[i].hi_distance_per60;
    ++present;
  }
  if (present == 0) return out;
  dist_mean /= static_cast<double>(present);
  hi_mean /= static_cast<double>(present);
  for (auto& pt : out) {
    if (pt.cells == 0) continue;
    if (dist_mean > 0.0) pt.distance_variation = (*pt.distance_per60 - dist_mean) / dist_mean;
    if (hi_mean > 0.0) pt.hi_distance_variation = (*pt.hi_distance_per60 - hi_mean) / hi_mean;
  }
  const int half = config.rolling_minutes / 2;
  auto rolling = [&](std::optional<double> MinuteCurvePoint::*field, std::size_t i) -> std::optional<double> {
    double sum = 0.0;
    std::size_t k = 0;
    const int lo = std::max(0, static_cast<int>(i) - half);
    const int hi = std::min(static_cast<int>(out.size()) - 1, static_cast<int>(i) + (config.rolling_minutes - 1 - half));
    for (int j = lo; j <= hi; ++j) {
      if (const auto& v = out[static_cast<std::size_t>(j)].*field) {
        sum += *v;
        ++k;
      }
    }
    if (k == 0) return std::nullopt;
    return sum / static_cast<double>(k);
  };
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (out[i].cells == 0) continue;
    out[i].distance_variation_smoothed = rolling(&MinuteCurvePoint::distance_variation, i);
    out[i].hi_distance_variation_smoothed = rolling(&MinuteCurvePoint::hi_distance_variation, i);
  }
  return out;
}

} // namespace runlens
