#pragma once

// Independent reference implementations and hand-rolled generators used by
// the unit tests and the acceptance runner.

#include "runlens/aggregation.hpp"
#include "runlens/formats.hpp"
#include "runlens/geometry.hpp"
#include "runlens/match.hpp"
#include "runlens/possession.hpp"
#include "runlens/valuation.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

namespace oracle {

using runlens::Point;

class Rng {
public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(eng_); }
  double normal(double mean, double sd) { return std::normal_distribution<double>(mean, sd)(eng_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(eng_); }
  bool chance(double p) { return uniform(0.0, 1.0) < p; }
  template <typename T>
  void shuffle(std::vector<T>& v) { std::shuffle(v.begin(), v.end(), eng_); }
  std::mt19937_64& engine() { return eng_; }

private:
  std::mt19937_64 eng_;
};

inline std::vector<Point> random_points(Rng& rng, int n, double lo = 0.0, double hi = 100.0) {
  std::vector<Point> pts;
  for (int i = 0; i < n; ++i) pts.push_back({rng.uniform(lo, hi), rng.uniform(lo, hi)});
  return pts;
}

/// Inside or on a counter-clockwise polygon: on the left of every edge.
inline bool half_plane_contains(const std::vector<Point>& hull, Point p, double eps = 1e-9) {
  if (hull.size() < 3) return false;
  for (std::size_t i = 0; i < hull.size(); ++i) {
    const Point a = hull[i];
    const Point b = hull[(i + 1) % hull.size()];
    if (runlens::geometry::cross(a, b, p) < -eps) return false;
  }
  return true;
}

/// Minimum within-cluster SSE over every split of the sorted values into
/// three non-empty contiguous groups.
inline double best_three_partition_sse(std::vector<double> xs) {
  std::sort(xs.begin(), xs.end());
  auto sse = [&](std::size_t a, std::size_t b) { // [a, b)
    double m = 0.0;
    for (std::size_t i = a; i < b; ++i) m += xs[i];
    m /= static_cast<double>(b - a);
    double s = 0.0;
    for (std::size_t i = a; i < b; ++i) s += (xs[i] - m) * (xs[i] - m);
    return s;
  };
  double best = std::numeric_limits<double>::infinity();
  const std::size_t n = xs.size();
  for (std::size_t i = 1; i + 1 < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) best = std::min(best, sse(0, i) + sse(i, j) + sse(j, n));
  }
  return best;
}

/// Cheapest assignment by trying every permutation.
inline double brute_force_assignment(const std::vector<std::vector<double>>& cost) {
  std::vector<int> perm(cost.size());
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double c = 0.0;
    for (std::size_t r = 0; r < perm.size(); ++r) c += cost[r][perm[r]];
    best = std::min(best, c);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

struct OwnerSpan {
  std::optional<std::string> team;
  std::int64_t t_start;
  std::int64_t t_end;
};

/// Possession replay by look-ahead: an opponent touch takes the ball when the
/// next on-ball or stoppage event is the same opponent again, or when nothing
/// interrupts it for `window` ms.
inline std::vector<OwnerSpan> replay_possession(const std::vector<runlens::Event>& events, std::int64_t t_end,
                                                std::int64_t window = 3000) {
  std::vector<std::pair<std::int64_t, std::optional<std::string>>> changes{{0, std::nullopt}};
  std::optional<std::string> owner;
  auto set = [&](std::int64_t t, std::optional<std::string> team) {
    owner = team;
    changes.emplace_back(t, std::move(team));
  };
  for (std::size_t i = 0; i < events.size(); ++i) {
    const auto& e = events[i];
    if (runlens::is_stoppage(e.type)) {
      if (owner) set(e.t_ms, std::nullopt);
      continue;
    }
    if (!runlens::is_on_ball(e.type)) continue;
    if (!owner) {
      set(e.t_ms, e.team_id);
      continue;
    }
    if (e.team_id == *owner) continue;
    std::size_t k = i + 1;
    while (k < events.size() && !runlens::is_stoppage(events[k].type) && !runlens::is_on_ball(events[k].type)) ++k;
    const bool confirmed = k < events.size() && runlens::is_on_ball(events[k].type) && events[k].team_id == e.team_id;
    const std::int64_t t_next = k < events.size() ? events[k].t_ms : t_end;
    if (confirmed || t_next - e.t_ms >= window) set(e.t_ms, e.team_id);
  }
  std::vector<OwnerSpan> spans;
  for (std::size_t i = 0; i < changes.size(); ++i) {
    const std::int64_t a = changes[i].first;
    const std::int64_t b = i + 1 < changes.size() ? changes[i + 1].first : t_end;
    if (b <= a) continue;
    if (!spans.empty() && spans.back().team == changes[i].second && spans.back().t_end == a) {
      spans.back().t_end = b;
    } else {
      spans.push_back({changes[i].second, a, b});
    }
  }
  return spans;
}

/// Same spans from automaton segments, merging equal neighbours.
inline std::vector<OwnerSpan> owner_spans(const std::vector<runlens::PossessionSegment>& segments) {
  std::vector<OwnerSpan> spans;
  for (const auto& s : segments) {
    if (!spans.empty() && spans.back().team == s.team_id && spans.back().t_end == s.t_start) {
      spans.back().t_end = s.t_end;
    } else {
      spans.push_back({s.team_id, s.t_start, s.t_end});
    }
  }
  return spans;
}

/// Two frames spanning one period of `t_end` ms with two teams "A" and "B".
inline runlens::Match bare_match(std::int64_t t_end, std::vector<runlens::Event> events = {}) {
  runlens::Match m;
  m.meta.match_id = "bare";
  m.meta.teams = {runlens::TeamInfo{"A", "A", 1, {}, std::nullopt}, runlens::TeamInfo{"B", "B", -1, {}, std::nullopt}};
  for (std::int64_t t : {std::int64_t{0}, t_end - 100}) {
    runlens::Frame f;
    f.t_ms = t;
    f.ball = {52.5, 34.0};
    f.attacking_direction = {{"A", 1}, {"B", -1}};
    m.frames.push_back(f);
  }
  m.events = std::move(events);
  return m;
}

/// Design matrix of the influence regression rebuilt from a fitted model:
/// intercept, angle, distance and one dummy per non-reference cell.
struct Design {
  Eigen::MatrixXd x;
  Eigen::VectorXd y;
  Eigen::VectorXd beta;
};

inline Design rebuild_design(const std::vector<runlens::RunValueSample>& samples, const runlens::RunInfluenceModel& m) {
  std::vector<runlens::CellKey> cells;
  for (const auto& [k, _] : m.cells) {
    if (!(k == m.reference)) cells.push_back(k);
  }
  std::vector<const runlens::RunValueSample*> used;
  for (const auto& s : samples) {
    if (m.cells.contains({s.player_id, s.role})) used.push_back(&s);
  }
  Design d;
  d.x = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(used.size()), static_cast<Eigen::Index>(3 + cells.size()));
  d.y.resize(static_cast<Eigen::Index>(used.size()));
  for (std::size_t i = 0; i < used.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    d.x(r, 0) = 1.0;
    d.x(r, 1) = used[i]->angle;
    d.x(r, 2) = used[i]->distance;
    const runlens::CellKey key{used[i]->player_id, used[i]->role};
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (cells[c] == key) d.x(r, static_cast<Eigen::Index>(3 + c)) = 1.0;
    }
    d.y(r) = used[i]->epv_added;
  }
  d.beta.resize(static_cast<Eigen::Index>(3 + cells.size()));
  d.beta(0) = m.intercept.value;
  d.beta(1) = m.angle.value;
  d.beta(2) = m.distance.value;
  for (std::size_t c = 0; c < cells.size(); ++c) d.beta(static_cast<Eigen::Index>(3 + c)) = m.cells.at(cells[c]).value;
  return d;
}

struct RegressionTruth {
  double intercept = 0.02;
  double angle = 0.05;
  double distance = -0.001;
  std::vector<double> cell_effects; // per player p0..pk, role midfielder
};

/// Samples y = b0 + b1 angle + b2 distance + b_p + noise.
inline std::vector<runlens::RunValueSample> regression_samples(Rng& rng, const RegressionTruth& truth, int n,
                                                               double noise_sd) {
  std::vector<runlens::RunValueSample> out;
  const int players = static_cast<int>(truth.cell_effects.size());
  for (int i = 0; i < n; ++i) {
    runlens::RunValueSample s;
    const int p = i % players;
    s.player_id = "p" + std::to_string(p);
    s.role = runlens::Role::Midfielder;
    char id[32];
    std::snprintf(id, sizeof(id), "m/%s/1/%010d", s.player_id.c_str(), i);
    s.run_id = id;
    s.angle = rng.uniform(0.0, 1.5);
    s.distance = rng.uniform(5.0, 80.0);
    s.epv_added = truth.intercept + truth.angle * s.angle + truth.distance * s.distance + truth.cell_effects[p] +
                  (noise_sd > 0.0 ? rng.normal(0.0, noise_sd) : 0.0);
    out.push_back(std::move(s));
  }
  return out;
}

struct PlayerSpec {
  std::string player_id;
  std::string team_id;
  runlens::Role role = runlens::Role::Midfielder;
  double in_s = 0.0;
  double out_s = 0.0;
  std::array<int, 6> movements{}; // in-possession HI runs per movement type
};

/// Summary with hand-set ledger times and one HI run per scripted movement.
inline runlens::MatchSummary constructed_summary(const std::string& match_id, const std::vector<PlayerSpec>& players) {
  runlens::MatchSummary m;
  m.match_id = match_id;
  for (const auto& p : players) {
    runlens::PlayerLedger pl;
    pl.player_id = p.player_id;
    pl.team_id = p.team_id;
    pl.role = p.role;
    pl.in_possession_s = p.in_s;
    pl.out_of_possession_s = p.out_s;
    m.ledger.players.push_back(pl);
    std::int64_t t = 0;
    for (std::size_t k = 0; k < 6; ++k) {
      for (int i = 0; i < p.movements[k]; ++i) {
        runlens::ContextualizedRun cr;
        cr.match_id = match_id;
        cr.team_id = p.team_id;
        cr.run.player_id = p.player_id;
        cr.run.t_valley_end = t;
        cr.run.is_hi = true;
        cr.run.peak_speed = 24.0;
        cr.run.distance_hi = 10.0;
        cr.run.distance_total = 25.0;
        cr.role = p.role;
        cr.phase = runlens::Phase::InPossession;
        cr.movement = runlens::kMovementTypes[k];
        m.runs.push_back(cr);
        t += 5000;
      }
    }
  }
  return m;
}

} // namespace oracle
