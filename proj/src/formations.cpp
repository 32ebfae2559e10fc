#include "runlens/formations.hpp"

#include "runlens/geometry.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <set>
#include <unordered_map>

namespace runlens {

namespace {

constexpr std::array<std::string_view, 9> kSlotRoles{
    "centre_back", "full_back",     "wing_back", "defensive_mid", "central_mid",
    "attacking_mid", "wide_mid", "winger",    "centre_forward",
};
constexpr std::array<std::string_view, 3> kSides{"L", "C", "R"};

FormationSlot slot(double x, double y, SlotRole role, Side side) { return {{x, y}, role, side}; }

// Back lines shared by several templates.
std::vector<FormationSlot> back_four() {
  return {slot(0, 25, SlotRole::FullBack, Side::Left), slot(0, 8, SlotRole::CentreBack, Side::Left),
          slot(0, -8, SlotRole::CentreBack, Side::Right), slot(0, -25, SlotRole::FullBack, Side::Right)};
}

std::vector<FormationSlot> back_three() {
  return {slot(0, 16, SlotRole::CentreBack, Side::Left), slot(0, 0, SlotRole::CentreBack, Side::Centre),
          slot(0, -16, SlotRole::CentreBack, Side::Right)};
}

std::vector<FormationSlot> concat(std::vector<FormationSlot> a, const std::vector<FormationSlot>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

std::vector<FormationTemplate> build_defaults() {
  using R = SlotRole;
  using S = Side;
  std::vector<FormationTemplate> t;
  t.push_back(make_template("4-4-2", concat(back_four(), {
      slot(20, 25, R::WideMid, S::Left), slot(20, 8, R::CentralMid, S::Left),
      slot(20, -8, R::CentralMid, S::Right), slot(20, -25, R::WideMid, S::Right),
      slot(40, 8, R::CentreForward, S::Left), slot(40, -8, R::CentreForward, S::Right)})));
  t.push_back(make_template("4-3-3", concat(back_four(), {
      slot(12, 0, R::DefensiveMid, S::Centre), slot(22, 14, R::CentralMid, S::Left),
      slot(22, -14, R::CentralMid, S::Right), slot(38, 25, R::Winger, S::Left),
      slot(42, 0, R::CentreForward, S::Centre), slot(38, -25, R::Winger, S::Right)})));
  t.push_back(make_template("4-2-3-1", concat(back_four(), {
      slot(12, 9, R::DefensiveMid, S::Left), slot(12, -9, R::DefensiveMid, S::Right),
      slot(30, 24, R::Winger, S::Left), slot(30, 0, R::AttackingMid, S::Centre),
      slot(30, -24, R::Winger, S::Right), slot(42, 0, R::CentreForward, S::Centre)})));
  t.push_back(make_template("4-1-4-1", concat(back_four(), {
      slot(12, 0, R::DefensiveMid, S::Centre), slot(24, 25, R::WideMid, S::Left),
      slot(24, 9, R::CentralMid, S::Left), slot(24, -9, R::CentralMid, S::Right),
      slot(24, -25, R::WideMid, S::Right), slot(42, 0, R::CentreForward, S::Centre)})));
  t.push_back(make_template("3-4-2-1", concat(back_three(), {
      slot(18, 28, R::WingBack, S::Left), slot(16, 8, R::CentralMid, S::Left),
      slot(16, -8, R::CentralMid, S::Right), slot(18, -28, R::WingBack, S::Right),
      slot(32, 12, R::AttackingMid, S::Left), slot(32, -12, R::AttackingMid, S::Right),
      slot(42, 0, R::CentreForward, S::Centre)})));
  t.push_back(make_template("3-5-2", concat(back_three(), {
      slot(20, 28, R::WingBack, S::Left), slot(20, 12, R::CentralMid, S::Left),
      slot(12, 0, R::DefensiveMid, S::Centre), slot(20, -12, R::CentralMid, S::Right),
      slot(20, -28, R::WingBack, S::Right), slot(40, 8, R::CentreForward, S::Left),
      slot(40, -8, R::CentreForward, S::Right)})));
  t.push_back(make_template("3-4-3", concat(back_three(), {
      slot(18, 28, R::WingBack, S::Left), slot(16, 8, R::CentralMid, S::Left),
      slot(16, -8, R::CentralMid, S::Right), slot(18, -28, R::WingBack, S::Right),
      slot(38, 22, R::Winger, S::Left), slot(42, 0, R::CentreForward, S::Centre),
      slot(38, -22, R::Winger, S::Right)})));
  t.push_back(make_template("5-3-2", {
      slot(4, 28, R::WingBack, S::Left), slot(0, 14, R::CentreBack, S::Left),
      slot(0, 0, R::CentreBack, S::Centre), slot(0, -14, R::CentreBack, S::Right),
      slot(4, -28, R::WingBack, S::Right), slot(20, 14, R::CentralMid, S::Left),
      slot(20, 0, R::CentralMid, S::Centre), slot(20, -14, R::CentralMid, S::Right),
      slot(38, 8, R::CentreForward, S::Left), slot(38, -8, R::CentreForward, S::Right)}));
  t.push_back(make_template("5-4-1", {
      slot(4, 28, R::WingBack, S::Left), slot(0, 14, R::CentreBack, S::Left),
      slot(0, 0, R::CentreBack, S::Centre), slot(0, -14, R::CentreBack, S::Right),
      slot(4, -28, R::WingBack, S::Right), slot(20, 25, R::WideMid, S::Left),
      slot(20, 8, R::CentralMid, S::Left), slot(20, -8, R::CentralMid, S::Right),
      slot(20, -25, R::WideMid, S::Right), slot(38, 0, R::CentreForward, S::Centre)}));
  return t;
}

} // namespace

std::string_view to_string(SlotRole role) { return kSlotRoles.at(static_cast<std::size_t>(role)); }

SlotRole slot_role_from_string(std::string_view name) {
  for (std::size_t i = 0; i < kSlotRoles.size(); ++i) {
    if (kSlotRoles[i] == name) return static_cast<SlotRole>(i);
  }
  throw ValidationError("unknown slot role '" + std::string(name) + "'");
}

std::string_view to_string(Side side) { return kSides.at(static_cast<std::size_t>(side)); }

Side side_from_string(std::string_view name) {
  for (std::size_t i = 0; i < kSides.size(); ++i) {
    if (kSides[i] == name) return static_cast<Side>(i);
  }
  throw ValidationError("unknown side '" + std::string(name) + "'");
}

std::vector<Point> normalize_shape(std::span<const Point> points) {
  const Point c = geometry::centroid(points);
  std::vector<Point> out;
  out.reserve(points.size());
  double ss = 0.0;
  for (const Point& p : points) {
    out.push_back(p - c);
    ss += out.back().x * out.back().x + out.back().y * out.back().y;
  }
  const double rms = std::sqrt(ss / static_cast<double>(std::max<std::size_t>(1, points.size())));
  if (!(rms > 0.0)) throw ValidationError("shape has zero spread");
  for (Point& p : out) p = (1.0 / rms) * p;
  return out;
}

FormationTemplate make_template(std::string name, std::vector<FormationSlot> slots) {
  if (slots.size() != 10) {
    throw ValidationError("template '" + name + "' must have exactly 10 outfield slots");
  }
  std::vector<Point> pts;
  for (const auto& s : slots) pts.push_back(s.position);
  // Already-normalized slots are kept bit for bit so configs round-trip.
  const Point c = geometry::centroid(pts);
  double ss = 0.0;
  for (const Point& p : pts) ss += p.x * p.x + p.y * p.y;
  const bool normalized = std::abs(c.x) < 1e-12 && std::abs(c.y) < 1e-12 && std::abs(ss / 10.0 - 1.0) < 1e-12;
  if (!normalized) {
    const auto norm = normalize_shape(pts);
    for (std::size_t i = 0; i < slots.size(); ++i) slots[i].position = norm[i];
  }
  return {std::move(name), std::move(slots)};
}

const std::vector<FormationTemplate>& default_templates() {
  static const std::vector<FormationTemplate> templates = build_defaults();
  return templates;
}

nlohmann::json templates_to_json(std::span<const FormationTemplate> templates) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& t : templates) {
    nlohmann::json slots = nlohmann::json::array();
    for (const auto& s : t.slots) {
      slots.push_back({{"xy", {s.position.x, s.position.y}},
                       {"role", std::string(to_string(s.role))},
                       {"side", std::string(to_string(s.side))}});
    }
    arr.push_back({{"name", t.name}, {"slots", slots}});
  }
  return arr;
}

std::vector<FormationTemplate> templates_from_json(const nlohmann::json& j) {
  std::vector<FormationTemplate> out;
  for (const auto& jt : j) {
    std::vector<FormationSlot> slots;
    for (const auto& js : jt.at("slots")) {
      slots.push_back({{js.at("xy").at(0).get<double>(), js.at("xy").at(1).get<double>()},
                       slot_role_from_string(js.at("role").get<std::string>()),
                       side_from_string(js.value("side", std::string("C")))});
    }
    out.push_back(make_template(jt.at("name").get<std::string>(), std::move(slots)));
  }
  if (out.empty()) throw ValidationError("template list is empty");
  return out;
}

Assignment optimal_assignment(const std::vector<std::vector<double>>& cost) {
  const std::size_t n = cost.size();
  for (const auto& row : cost) {
    if (row.size() != n) throw ValidationError("assignment cost matrix must be square");
  }
  Assignment result;
  if (n == 0) return result;
  // Potentials formulation, 1-based with a virtual column 0.
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<bool> used(n + 1, false);
    do {
      used[j0] = true;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  result.assignment.assign(n, -1);
  for (std::size_t j = 1; j <= n; ++j) result.assignment[p[j] - 1] = static_cast<int>(j - 1);
  for (std::size_t i = 0; i < n; ++i) result.cost += cost[i][static_cast<std::size_t>(result.assignment[i])];
  return result;
}

namespace {

bool in_phase(const PossessionSegment* seg, std::string_view team, PhaseFilter phase) {
  if (seg == nullptr || seg->out_of_play()) return false;
  const bool own = *seg->team_id == team;
  return phase == PhaseFilter::InPossession ? own : !own;
}

} // namespace

RelativeShape mean_relative_positions(const MatchIndex& index, std::span<const PossessionSegment> segments,
                                      std::string_view team_id, Period period, std::int64_t t0, std::int64_t t1,
                                      const FormationConfig& config) {
  const int sign = index.meta().direction(team_id, period);
  const auto frames = index.frames_between(period, t0, t1);

  struct Accum {
    Point sum;
    std::size_t count = 0;
  };
  std::map<std::string, Accum> acc;
  std::size_t phase_frames = 0;
  std::vector<std::pair<const std::string*, Point>> visible;
  for (const auto& f : frames) {
    if (!in_phase(segment_at(segments, period, f.t_ms), team_id, config.phase)) continue;
    ++phase_frames;
    visible.clear();
    Point centroid;
    for (const auto& p : f.players) {
      if (p.team_id != team_id || index.is_goalkeeper(p.player_id)) continue;
      const Point c = canonical(p.xy, sign, index.pitch());
      visible.emplace_back(&p.player_id, c);
      centroid = centroid + c;
    }
    if (visible.empty()) continue;
    centroid = (1.0 / static_cast<double>(visible.size())) * centroid;
    for (const auto& [id, pos] : visible) {
      auto& a = acc[*id];
      a.sum = a.sum + (pos - centroid);
      ++a.count;
    }
  }
  // Frame spacing is nominally 100 ms.
  if (static_cast<std::int64_t>(phase_frames) * 100 < config.min_phase_ms) {
    throw InsufficientVisibility("window has " + std::to_string(phase_frames) + " phase frames");
  }
  std::vector<std::pair<std::string, Accum>> eligible;
  for (const auto& [id, a] : acc) {
    if (static_cast<double>(a.count) >= config.min_visibility * static_cast<double>(phase_frames)) {
      eligible.emplace_back(id, a);
    }
  }
  if (eligible.size() < 10) {
    throw InsufficientVisibility("only " + std::to_string(eligible.size()) +
                                 " outfield players meet the visibility threshold");
  }
  std::stable_sort(eligible.begin(), eligible.end(),
                   [](const auto& a, const auto& b) { return a.second.count > b.second.count; });
  eligible.resize(10);
  std::sort(eligible.begin(), eligible.end(), [](const auto& a, const auto& b) { return a.first < b.first; });

  RelativeShape shape;
  std::vector<Point> means;
  for (const auto& [id, a] : eligible) {
    shape.player_ids.push_back(id);
    means.push_back((1.0 / static_cast<double>(a.count)) * a.sum);
  }
  shape.points = normalize_shape(means);
  return shape;
}

FormationFit assign_formation(const RelativeShape& shape, std::span<const FormationTemplate> templates) {
  if (shape.player_ids.size() != shape.points.size()) throw ValidationError("shape ids and points differ in length");
  std::set<std::string> seen;
  for (const auto& id : shape.player_ids) {
    if (!seen.insert(id).second) throw ValidationError("duplicate player id '" + id + "' in shape");
  }
  if (templates.empty()) throw ValidationError("no formation templates");
  FormationFit best;
  bool found = false;
  const std::size_t n = shape.points.size();
  for (std::size_t t = 0; t < templates.size(); ++t) {
    const auto& slots = templates[t].slots;
    if (slots.size() != n) {
      throw ValidationError("template '" + templates[t].name + "' has " + std::to_string(slots.size()) +
                            " slots for " + std::to_string(n) + " players");
    }
    std::vector<std::vector<double>> cost(n, std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        const Point d = shape.points[i] - slots[j].position;
        cost[i][j] = d.x * d.x + d.y * d.y;
      }
    }
    auto a = optimal_assignment(cost);
    if (!found || a.cost < best.cost - 1e-12) {
      best = {t, templates[t].name, std::move(a.assignment), a.cost};
      found = true;
    }
  }
  return best;
}

Role simplify_role(SlotRole role, Side) {
  switch (role) {
  case SlotRole::CentreBack: return Role::CentralDefender;
  case SlotRole::FullBack:
  case SlotRole::WingBack: return Role::FullBack;
  case SlotRole::DefensiveMid: return Role::DefensiveMidfielder;
  case SlotRole::CentralMid:
  case SlotRole::AttackingMid: return Role::Midfielder;
  case SlotRole::WideMid:
  case SlotRole::Winger: return Role::Winger;
  case SlotRole::CentreForward: return Role::Striker;
  }
  return Role::Midfielder;
}

const RoleInterval* RoleTimeline::at(std::string_view player_id, Period period, std::int64_t t) const {
  auto it = players.find(std::string(player_id));
  if (it == players.end()) return nullptr;
  const auto& iv = it->second;
  auto pos = std::upper_bound(iv.begin(), iv.end(), std::pair{period, t},
                              [](const std::pair<Period, std::int64_t>& key, const RoleInterval& r) {
                                if (key.first != r.period) return key.first < r.period;
                                return key.second < r.t_start;
                              });
  if (pos == iv.begin()) return nullptr;
  --pos;
  if (pos->period != period || t < pos->t_start || t >= pos->t_end) return nullptr;
  return &*pos;
}

namespace {

struct WindowFit {
  std::int64_t center = 0;
  std::size_t epoch = 0;
  std::string formation;
  std::unordered_map<std::string, std::pair<Role, Side>> roles;
};

struct Visibility {
  std::string team;
  std::int64_t first = 0;
  std::int64_t last = 0;
  std::size_t frames = 0;
};

} // namespace

RoleTimeline build_role_timeline(const MatchIndex& index, std::span<const PossessionSegment> segments,
                                 const FormationConfig& config) {
  RoleTimeline timeline;
  const auto& meta = index.meta();
  std::map<std::string, std::size_t> total_visible_frames;

  for (const auto& span : index.periods()) {
    std::map<std::string, Visibility> vis;
    for (std::size_t i = span.first_frame; i < span.end_frame; ++i) {
      const Frame& f = index.match().frames[i];
      for (const auto& p : f.players) {
        auto [it, inserted] = vis.try_emplace(p.player_id, Visibility{p.team_id, f.t_ms, f.t_ms, 0});
        it->second.last = f.t_ms;
        ++it->second.frames;
      }
    }
    for (const auto& [id, v] : vis) total_visible_frames[id] += v.frames;

    for (const auto& team : meta.teams) {
      std::vector<std::int64_t> bounds{span.t_start};
      for (const auto& e : index.match().events) {
        if (e.period == span.period && e.type == EventType::Substitution && e.team_id == team.team_id &&
            e.t_ms > bounds.back() && e.t_ms < span.t_end) {
          bounds.push_back(e.t_ms);
        }
      }
      bounds.push_back(span.t_end);

      std::vector<WindowFit> fits;
      for (std::size_t ep = 0; ep + 1 < bounds.size(); ++ep) {
        const std::int64_t e0 = bounds[ep], e1 = bounds[ep + 1];
        std::vector<std::pair<std::int64_t, std::int64_t>> windows;
        if (e1 - e0 <= config.window_ms) {
          windows.emplace_back(e0, e1);
        } else {
          for (std::int64_t s = e0; s + config.window_ms <= e1; s += config.stride_ms) {
            windows.emplace_back(s, s + config.window_ms);
          }
        }
        for (const auto& [w0, w1] : windows) {
          RelativeShape shape;
          try {
            shape = mean_relative_positions(index, segments, team.team_id, span.period, w0, w1, config);
          } catch (const InsufficientVisibility&) {
            continue;
          }
          const auto fit = assign_formation(shape, config.templates);
          WindowFit wf{(w0 + w1) / 2, ep, fit.name, {}};
          const auto& tmpl = config.templates[fit.template_index];
          for (std::size_t k = 0; k < shape.player_ids.size(); ++k) {
            const auto& s = tmpl.slots[static_cast<std::size_t>(fit.slot_of_player[k])];
            wf.roles.emplace(shape.player_ids[k], std::pair{simplify_role(s.role, s.side), s.side});
          }
          timeline.windows.push_back({team.team_id, span.period, w0, w1, fit.name, fit.cost});
          fits.push_back(std::move(wf));
        }
      }

      for (const auto& [id, v] : vis) {
        if (v.team != team.team_id) continue;
        auto& intervals = timeline.players[id];
        const bool keeper = index.is_goalkeeper(id);
        const std::int64_t p0 = v.first;
        const std::int64_t p1 = v.last + 100;
        for (std::int64_t s = span.t_start; s < p1; s += 1000) {
          const std::int64_t a = std::max(s, p0);
          const std::int64_t b = std::min(s + 1000, p1);
          if (a >= b) continue;
          const std::int64_t mid = s + 500;
          const std::size_t epoch =
              static_cast<std::size_t>(std::upper_bound(bounds.begin(), bounds.end(), a) - bounds.begin()) - 1;
          const WindowFit* best = nullptr;
          std::int64_t best_gap = std::numeric_limits<std::int64_t>::max();
          for (const auto& wf : fits) {
            if (wf.epoch != epoch) continue;
            if (!keeper && !wf.roles.contains(id)) continue;
            const std::int64_t gap = std::abs(wf.center - mid);
            if (gap < best_gap) {
              best_gap = gap;
              best = &wf;
            }
          }
          RoleInterval r{span.period, a, b, std::nullopt, "", std::nullopt};
          if (keeper) {
            r.role = Role::Goalkeeper;
            if (best) r.formation = best->formation;
          } else if (best) {
            const auto& [role, side] = best->roles.at(id);
            r.role = role;
            r.side = side;
            r.formation = best->formation;
          }
          if (!intervals.empty()) {
            auto& last = intervals.back();
            if (last.period == r.period && last.t_end == r.t_start && last.role == r.role &&
                last.formation == r.formation && last.side == r.side) {
              last.t_end = r.t_end;
              continue;
            }
          }
          intervals.push_back(std::move(r));
        }
      }
    }
  }

  for (auto& [id, intervals] : timeline.players) {
    if (static_cast<std::int64_t>(total_visible_frames[id]) * 100 >= config.min_player_visible_ms) continue;
    std::vector<RoleInterval> unknown;
    for (const auto& r : intervals) {
      if (!unknown.empty() && unknown.back().period == r.period && unknown.back().t_end == r.t_start) {
        unknown.back().t_end = r.t_end;
      } else {
        unknown.push_back({r.period, r.t_start, r.t_end, std::nullopt, "", std::nullopt});
      }
    }
    intervals = std::move(unknown);
  }
  return timeline;
}

} // namespace runlens
