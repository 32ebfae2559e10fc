#include "runlens/synth.hpp"

#include "runlens/formats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <set>

namespace runlens::synth {

using nlohmann::json;

namespace {

constexpr std::int64_t kDt = 100;
constexpr double kMaxKmh = 43.2;

template <typename T>
T value_or(const json& j, const char* key, T fallback) {
  return j.contains(key) ? j.at(key).get<T>() : fallback;
}

Effort effort_from_json(const json& j) {
  Effort e;
  e.start_ms = j.at("start_ms").get<std::int64_t>();
  e.base_kmh = j.at("base_kmh").get<double>();
  e.cruise_kmh = j.at("cruise_kmh").get<double>();
  e.hold_ms = value_or<std::int64_t>(j, "hold_ms", 0);
  e.end_kmh = value_or<double>(j, "end_kmh", e.base_kmh);
  e.accel = value_or<double>(j, "accel", 3.0);
  return e;
}

AutoMatch auto_from_json(const json& j) {
  AutoMatch a;
  a.formations = j.at("formations").get<std::map<std::string, std::string>>();
  a.shape_scale_m = value_or(j, "shape_scale_m", a.shape_scale_m);
  if (j.contains("defend_depth")) a.defend_depth = j.at("defend_depth").get<std::map<std::string, double>>();
  a.attack_depth = value_or(j, "attack_depth", a.attack_depth);
  a.anchor_speed = value_or(j, "anchor_speed", a.anchor_speed);
  a.possession_min_ms = value_or(j, "possession_min_ms", a.possession_min_ms);
  a.possession_max_ms = value_or(j, "possession_max_ms", a.possession_max_ms);
  a.stoppage_share = value_or(j, "stoppage_share", a.stoppage_share);
  a.stoppage_min_ms = value_or(j, "stoppage_min_ms", a.stoppage_min_ms);
  a.stoppage_max_ms = value_or(j, "stoppage_max_ms", a.stoppage_max_ms);
  a.direct_play_share = value_or(j, "direct_play_share", a.direct_play_share);
  a.set_piece_share = value_or(j, "set_piece_share", a.set_piece_share);
  a.rest_min_ms = value_or(j, "rest_min_ms", a.rest_min_ms);
  a.rest_max_ms = value_or(j, "rest_max_ms", a.rest_max_ms);
  a.sprint_share = value_or(j, "sprint_share", a.sprint_share);
  a.sprint_kmh = value_or(j, "sprint_kmh", a.sprint_kmh);
  a.jog_kmh = value_or(j, "jog_kmh", a.jog_kmh);
  a.return_kmh = value_or(j, "return_kmh", a.return_kmh);
  a.hold_min_ms = value_or(j, "hold_min_ms", a.hold_min_ms);
  a.hold_max_ms = value_or(j, "hold_max_ms", a.hold_max_ms);
  if (j.contains("decay_after_minute")) a.decay_after_minute = j.at("decay_after_minute").get<int>();
  a.decay = value_or(j, "decay", a.decay);
  return a;
}

} // namespace

Script script_from_json(const json& j) {
  Script s;
  try {
    s.match_id = value_or<std::string>(j, "match_id", s.match_id);
    s.seed = value_or<std::uint64_t>(j, "seed", 0);
    if (j.contains("pitch")) {
      s.pitch.length = j.at("pitch").at("length").get<double>();
      s.pitch.width = j.at("pitch").at("width").get<double>();
    }
    if (j.contains("periods_ms")) s.periods_ms = j.at("periods_ms").get<std::vector<std::int64_t>>();
    if (j.contains("teams")) {
      json meta{{"match_id", s.match_id},
                {"pitch", {{"length", s.pitch.length}, {"width", s.pitch.width}}},
                {"teams", j.at("teams")}};
      s.teams = meta_from_json(meta).teams;
    }
    for (const auto& pj : value_or(j, "players", json::array())) {
      PlayerDirective d;
      d.player_id = pj.at("id").get<std::string>();
      d.period = period_from_int(value_or(pj, "period", 1));
      for (const auto& p : pj.at("path")) d.path.push_back(point_from_json(p));
      d.shuttle = value_or(pj, "shuttle", false);
      for (const auto& k : value_or(pj, "speed", json::array())) {
        d.speed.push_back({k.at(0).get<double>(), k.at(1).get<double>()});
      }
      for (const auto& e : value_or(pj, "efforts", json::array())) d.efforts.push_back(effort_from_json(e));
      if (pj.contains("initial_kmh")) d.initial_kmh = pj.at("initial_kmh").get<double>();
      s.players.push_back(std::move(d));
    }
    for (const auto& e : value_or(j, "events", json::array())) s.events.push_back(event_from_json(e));
    for (const auto& p : value_or(j, "possessions", json::array())) {
      ScriptedPossession sp;
      if (!p.at("team").is_null()) sp.team_id = p.at("team").get<std::string>();
      sp.period = period_from_int(value_or(p, "period", 1));
      sp.t_start = p.at("start_ms").get<std::int64_t>();
      sp.t_end = p.at("end_ms").get<std::int64_t>();
      if (p.contains("attack")) sp.attack = attack_type_from_string(p.at("attack").get<std::string>());
      s.possessions.push_back(std::move(sp));
    }
    if (j.contains("auto")) s.auto_match = auto_from_json(j.at("auto"));
    s.noise_m = value_or(j, "noise_m", 0.0);
    s.dropout = value_or(j, "dropout", 0.0);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("script: ") + e.what());
  }
  return s;
}

Script read_script(const std::filesystem::path& path) {
  try {
    return script_from_json(json::parse(read_file(path)));
  } catch (const json::parse_error& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

namespace {

/// Piecewise-linear speed in m/s with exact arc length.
class SpeedProfile {
public:
  explicit SpeedProfile(std::vector<SpeedKey> keys) : keys_(std::move(keys)) {
    cumulative_.assign(keys_.size(), 0.0);
    for (std::size_t k = 1; k < keys_.size(); ++k) {
      const double dt = (keys_[k].t_ms - keys_[k - 1].t_ms) / 1000.0;
      cumulative_[k] = cumulative_[k - 1] + dt * (keys_[k].kmh + keys_[k - 1].kmh) / 2.0 / 3.6;
    }
  }

  /// Metres travelled from the first key (t < first key holds its speed backwards).
  double arc(double t_ms) const {
    if (keys_.empty()) return 0.0;
    if (t_ms <= keys_.front().t_ms) return (t_ms - keys_.front().t_ms) / 1000.0 * keys_.front().kmh / 3.6;
    if (t_ms >= keys_.back().t_ms) {
      return cumulative_.back() + (t_ms - keys_.back().t_ms) / 1000.0 * keys_.back().kmh / 3.6;
    }
    const auto it = std::upper_bound(keys_.begin(), keys_.end(), t_ms,
                                     [](double t, const SpeedKey& k) { return t < k.t_ms; });
    const std::size_t k = static_cast<std::size_t>(it - keys_.begin()) - 1;
    const double span = (keys_[k + 1].t_ms - keys_[k].t_ms) / 1000.0;
    const double dt = (t_ms - keys_[k].t_ms) / 1000.0;
    const double v0 = keys_[k].kmh / 3.6;
    const double a = span > 0.0 ? (keys_[k + 1].kmh - keys_[k].kmh) / 3.6 / span : 0.0;
    return cumulative_[k] + v0 * dt + 0.5 * a * dt * dt;
  }

private:
  std::vector<SpeedKey> keys_;
  std::vector<double> cumulative_;
};

class Polyline {
public:
  Polyline(std::vector<Point> pts, bool shuttle) : pts_(std::move(pts)), shuttle_(shuttle) {
    cumulative_.assign(pts_.size(), 0.0);
    for (std::size_t i = 1; i < pts_.size(); ++i) cumulative_[i] = cumulative_[i - 1] + distance(pts_[i - 1], pts_[i]);
  }
  double length() const { return cumulative_.empty() ? 0.0 : cumulative_.back(); }

  Point at(double s) const {
    const double len = length();
    if (pts_.size() == 1 || len == 0.0) return pts_.front();
    if (shuttle_) {
      s = std::fmod(std::abs(s), 2.0 * len);
      if (s > len) s = 2.0 * len - s;
    }
    s = std::clamp(s, 0.0, len);
    const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), s);
    const std::size_t i = std::min<std::size_t>(static_cast<std::size_t>(it - cumulative_.begin()), pts_.size() - 1);
    const double seg = cumulative_[i] - cumulative_[i - 1];
    return seg > 0.0 ? lerp(pts_[i - 1], pts_[i], (s - cumulative_[i - 1]) / seg) : pts_[i];
  }

private:
  std::vector<Point> pts_;
  std::vector<double> cumulative_;
  bool shuttle_;
};

int band_of(double kmh, const SpeedBands& bands) { return static_cast<int>(speed_category(kmh, bands)); }

double band_lower(int band, const SpeedBands& b) {
  const double lows[] = {0.0, b.walking_max, b.jogging_max, b.running_max};
  return lows[band];
}

double band_upper(int band, const SpeedBands& b) {
  const double highs[] = {b.walking_max, b.jogging_max, b.running_max, INFINITY};
  return highs[band];
}

std::vector<SpeedKey> keys_from_efforts(const PlayerDirective& d, std::vector<ExpectedRun>& runs) {
  const SpeedBands bands;
  std::vector<SpeedKey> keys;
  double current = d.initial_kmh.value_or(d.efforts.front().base_kmh);
  keys.push_back({0.0, current});
  double t_free = 0.0;
  for (std::size_t k = 0; k < d.efforts.size(); ++k) {
    const Effort& e = d.efforts[k];
    const std::string where = "effort " + std::to_string(k) + " of player " + d.player_id;
    if (!(e.accel > 0.0)) throw ValidationError(where + ": acceleration must be positive");
    if (e.hold_ms < 0) throw ValidationError(where + ": negative hold");
    if (static_cast<double>(e.start_ms) < t_free) throw ValidationError(where + " overlaps the previous effort");
    if (std::abs(e.base_kmh - current) > 1e-9) {
      throw ValidationError(where + ": speed discontinuity (base " + std::to_string(e.base_kmh) + " km/h, was " +
                            std::to_string(current) + ")");
    }
    const double rate = e.accel * 3.6 / 1000.0; // km/h per ms
    const double t0 = static_cast<double>(e.start_ms);
    const double t_up = t0 + std::abs(e.cruise_kmh - e.base_kmh) / rate;
    const double t_hold = t_up + static_cast<double>(e.hold_ms);
    const double t_down = t_hold + std::abs(e.cruise_kmh - e.end_kmh) / rate;
    keys.push_back({t0, e.base_kmh});
    keys.push_back({t_up, e.cruise_kmh});
    keys.push_back({t_hold, e.cruise_kmh});
    keys.push_back({t_down, e.end_kmh});
    current = e.end_kmh;
    t_free = t_down;

    const int b0 = band_of(e.base_kmh, bands);
    const int bc = band_of(e.cruise_kmh, bands);
    const int be = band_of(e.end_kmh, bands);
    if (bc > b0 && bc > be) {
      ExpectedRun r;
      r.player_id = d.player_id;
      r.period = d.period;
      r.t_valley_end = t0 + (band_upper(b0, bands) - e.base_kmh) / rate;
      r.t_peak_start = t0 + (band_lower(bc, bands) - e.base_kmh) / rate;
      r.t_peak_end = t_hold + (e.cruise_kmh - band_lower(bc, bands)) / rate;
      r.t_next_valley_start = t_hold + (e.cruise_kmh - band_upper(be, bands)) / rate;
      r.peak_kmh = e.cruise_kmh;
      r.is_hi = e.cruise_kmh >= bands.running_max;
      runs.push_back(r);
    }
  }
  return keys;
}

void validate_keys(const std::vector<SpeedKey>& keys, const std::string& player) {
  for (std::size_t k = 0; k < keys.size(); ++k) {
    if (!(keys[k].kmh >= 0.0) || keys[k].kmh > kMaxKmh) {
      throw ValidationError("player " + player + ": speed " + std::to_string(keys[k].kmh) +
                            " km/h outside [0, 43.2]");
    }
    if (k > 0 && keys[k].t_ms < keys[k - 1].t_ms) {
      throw ValidationError("player " + player + ": speed keys are not ordered in time");
    }
  }
}

struct Rng {
  std::mt19937_64 gen;
  explicit Rng(std::uint64_t seed) : gen(seed) {}
  double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(gen); }
  std::int64_t uniform_int(std::int64_t a, std::int64_t b) {
    return std::uniform_int_distribution<std::int64_t>(a, b)(gen);
  }
  bool chance(double p) { return uniform(0.0, 1.0) < p; }
  double normal(double sigma) { return sigma > 0.0 ? std::normal_distribution<double>(0.0, sigma)(gen) : 0.0; }
};

// ---------------------------------------------------------------- auto mode

/// One out-and-back effort of an outfield player relative to their slot.
struct EffortPlan {
  double t0 = 0.0;       // ms
  double t_out = 0.0;    // end of the outward trapezoid
  double t_back = 0.0;   // back at the slot
  Point dir;             // own-frame unit direction
  double cruise = 0.0;   // m/s
  double accel = 3.0;
  double t_ramp = 0.0;   // s
  double hold = 0.0;     // s
  double out_dist = 0.0; // m
  double back_speed = 0.0;
};

double outward_arc(const EffortPlan& p, double t_ms) {
  const double t = (t_ms - p.t0) / 1000.0;
  const double ramp_d = 0.5 * p.accel * p.t_ramp * p.t_ramp;
  if (t <= 0.0) return 0.0;
  if (t < p.t_ramp) return 0.5 * p.accel * t * t;
  if (t < p.t_ramp + p.hold) return ramp_d + p.cruise * (t - p.t_ramp);
  const double td = std::min(t - p.t_ramp - p.hold, p.t_ramp);
  return ramp_d + p.cruise * p.hold + p.cruise * td - 0.5 * p.accel * td * td;
}

struct AutoPlayer {
  std::string id;
  std::string team;
  bool goalkeeper = false;
  Point slot; // metres, own frame, relative to the anchor
  std::vector<EffortPlan> plans;
  std::size_t cursor = 0;
  double phase = 0.0;
};

struct TeamState {
  std::string id;
  double anchor = 50.0;
};

struct Possession {
  std::optional<std::string> team;
  std::int64_t t0 = 0;
  std::int64_t t1 = 0;
  AttackType intent = AttackType::Organized;
  bool after_stoppage = false;
};

Point own_to_world(Point own, int sign, const PitchSpec& pitch) { return canonical(own, sign, pitch); }

Event make_event(EventType type, Period period, std::int64_t t, const std::string& team, const std::string& player,
                 Point loc, std::optional<Point> end = std::nullopt) {
  Event e;
  e.t_ms = t;
  e.period = period;
  e.type = type;
  e.team_id = team;
  e.player_id = player;
  e.location = loc;
  e.end_location = end;
  return e;
}

void generate_auto(const Script& script, const AutoMatch& cfg, Rng& rng, Match& match, GroundTruth& truth) {
  const PitchSpec& pitch = script.pitch;
  const auto& meta = match.meta;
  if (meta.teams.size() != 2) throw ValidationError("auto match needs exactly two teams");

  std::vector<AutoPlayer> players;
  for (const auto& team : meta.teams) {
    auto fit = cfg.formations.find(team.team_id);
    if (fit == cfg.formations.end()) throw ValidationError("auto match: no formation for team " + team.team_id);
    const auto& templates = default_templates();
    auto tmpl = std::find_if(templates.begin(), templates.end(), [&](const auto& t) { return t.name == fit->second; });
    if (tmpl == templates.end()) throw ValidationError("auto match: unknown formation '" + fit->second + "'");
    truth.formations[team.team_id] = tmpl->name;
    const auto gks = std::count_if(team.players.begin(), team.players.end(), [](const auto& p) { return p.goalkeeper; });
    if (team.players.size() != 11 || gks != 1) {
      throw ValidationError("auto match: team " + team.team_id + " needs 11 players including one goalkeeper");
    }
    std::size_t slot = 0;
    for (const auto& p : team.players) {
      AutoPlayer ap;
      ap.id = p.player_id;
      ap.team = team.team_id;
      ap.goalkeeper = p.goalkeeper;
      ap.phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
      if (p.goalkeeper) {
        truth.roles[p.player_id] = Role::Goalkeeper;
      } else {
        const auto& s = tmpl->slots[slot++];
        ap.slot = cfg.shape_scale_m * s.position;
        truth.roles[p.player_id] = simplify_role(s.role, s.side);
      }
      players.push_back(std::move(ap));
    }
  }

  const std::string& home = meta.teams[0].team_id;
  const std::string& away = meta.teams[1].team_id;
  auto other = [&](const std::string& t) -> const std::string& { return t == home ? away : home; };
  auto roster_outfield = [&](const std::string& team) {
    std::vector<const AutoPlayer*> out;
    for (const auto& p : players) {
      if (p.team == team && !p.goalkeeper) out.push_back(&p);
    }
    return out;
  };
  const auto outfield_h = roster_outfield(home);
  const auto outfield_a = roster_outfield(away);
  auto pick = [&](const std::string& team, const std::string& not_id) -> const std::string& {
    const auto& pool = team == home ? outfield_h : outfield_a;
    while (true) {
      const auto* p = pool[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(pool.size()) - 1))];
      if (p->id != not_id) return p->id;
    }
  };

  std::int64_t clock_offset = 0;
  for (std::size_t pi = 0; pi < script.periods_ms.size(); ++pi) {
    const Period period = period_from_int(static_cast<int>(pi) + 1);
    const std::int64_t duration = script.periods_ms[pi];
    const std::size_t n_frames = static_cast<std::size_t>(duration / kDt);
    const std::int64_t t_end = static_cast<std::int64_t>(n_frames) * kDt;

    // Possession schedule.
    std::vector<Possession> schedule;
    {
      std::string team = pi % 2 == 0 ? home : away;
      std::int64_t t = 0;
      bool after_stop = true;
      while (t < t_end) {
        Possession p;
        p.team = team;
        p.t0 = t;
        p.after_stoppage = after_stop;
        p.t1 = std::min(t_end, t + rng.uniform_int(cfg.possession_min_ms, cfg.possession_max_ms));
        if (t_end - p.t1 < cfg.possession_min_ms) p.t1 = t_end;
        if (after_stop && t > 0) {
          const double u = rng.uniform(0.0, 1.0);
          if (u < cfg.set_piece_share) {
            p.intent = AttackType::SetPiece;
          } else if (u < cfg.set_piece_share + cfg.direct_play_share && p.t1 - p.t0 > 4000) {
            p.intent = AttackType::DirectPlay;
          }
        }
        schedule.push_back(p);
        t = p.t1;
        if (t >= t_end) break;
        if (rng.chance(cfg.stoppage_share)) {
          Possession stop;
          stop.t0 = t;
          stop.t1 = std::min(t_end, t + rng.uniform_int(cfg.stoppage_min_ms, cfg.stoppage_max_ms));
          schedule.push_back(stop);
          t = stop.t1;
          after_stop = true;
        } else {
          after_stop = false;
        }
        team = other(team);
      }
    }

    // Events and ball keyframes (period-local times).
    std::vector<Event> events;
    for (std::size_t k = 0; k < schedule.size(); ++k) {
      const Possession& p = schedule[k];
      if (!p.team) continue;
      const std::string& team = *p.team;
      const int sign = meta.direction(team, period);
      auto world = [&](double x, double y) { return own_to_world({x, y}, sign, pitch); };
      std::int64_t t = p.t0;
      std::string holder;
      Point ball;
      if (p.t0 == 0) {
        holder = pick(team, "");
        ball = {pitch.length / 2.0, pitch.width / 2.0};
        events.push_back(make_event(EventType::Kickoff, period, t, team, holder, ball));
      } else if (p.after_stoppage) {
        holder = pick(team, "");
        if (p.intent == AttackType::SetPiece) {
          const bool corner = rng.chance(0.5);
          ball = corner ? world(pitch.length, rng.chance(0.5) ? 0.0 : pitch.width)
                        : world(rng.uniform(60.0, 85.0), rng.uniform(10.0, pitch.width - 10.0));
          events.push_back(make_event(corner ? EventType::Corner : EventType::FreeKick, period, t, team, holder,
                                      ball));
        } else if (p.intent == AttackType::DirectPlay) {
          ball = world(6.0, pitch.width / 2.0);
          events.push_back(make_event(EventType::GoalKick, period, t, team, holder, ball));
        } else {
          ball = world(rng.uniform(36.0, 50.0), rng.chance(0.5) ? 0.0 : pitch.width);
          events.push_back(make_event(EventType::ThrowIn, period, t, team, holder, ball));
        }
      } else {
        holder = pick(team, "");
        ball = world(rng.uniform(53.0, 70.0), rng.uniform(10.0, pitch.width - 10.0));
        events.push_back(make_event(EventType::Recovery, period, t, team, holder, ball));
        t += 500;
        const Point to = world(rng.uniform(45.0, 70.0), rng.uniform(8.0, pitch.width - 8.0));
        const std::string& mate = pick(team, holder);
        events.push_back(make_event(EventType::Pass, period, t, team, holder, ball, to));
        events.push_back(make_event(EventType::Reception, period, t + 1000, team, mate, to));
        holder = mate;
        ball = to;
        t += 1000;
      }
      bool direct_done = p.intent != AttackType::DirectPlay;
      if (p.intent == AttackType::DirectPlay) {
        truth.attack_phases.push_back({period, p.t0 + 1000, std::min(p.t1, p.t0 + 11000), AttackType::DirectPlay});
      } else if (p.intent == AttackType::SetPiece) {
        truth.attack_phases.push_back({period, p.t0, std::min(p.t1, p.t0 + 10000), AttackType::SetPiece});
      }
      const std::int64_t last_allowed = p.t1 - 1500;
      while (true) {
        const std::int64_t t_pass = direct_done ? t + rng.uniform_int(1000, 2500) : p.t0 + 1000;
        if (t_pass + 1000 >= last_allowed) break;
        const std::string& mate = pick(team, holder);
        Point from = ball;
        Point to;
        if (!direct_done) {
          from = world(20.0, rng.uniform(15.0, pitch.width - 15.0));
          to = world(rng.uniform(62.0, 70.0), rng.uniform(10.0, pitch.width - 10.0));
          direct_done = true;
        } else {
          to = world(rng.uniform(40.0, 72.0), rng.uniform(8.0, pitch.width - 8.0));
        }
        events.push_back(make_event(EventType::Pass, period, t_pass, team, holder, from, to));
        events.push_back(make_event(EventType::Reception, period, t_pass + 1000, team, mate, to));
        holder = mate;
        ball = to;
        t = t_pass + 1000;
      }
      const bool stop_follows = k + 1 < schedule.size() && !schedule[k + 1].team;
      if (stop_follows) {
        const Point out = own_to_world({std::clamp(canonical(ball, sign, pitch).x, 1.0, pitch.length - 1.0),
                                        rng.chance(0.5) ? 0.0 : pitch.width},
                                       sign, pitch);
        events.push_back(make_event(EventType::BallOut, period, p.t1, team, holder, out));
      }
      truth.possessions.push_back({team, period, p.t0, p.t1, p.intent});
      if (stop_follows) {
        truth.possessions.push_back({std::nullopt, period, schedule[k + 1].t0, schedule[k + 1].t1, std::nullopt});
      }
    }
    std::stable_sort(events.begin(), events.end(), [](const Event& a, const Event& b) { return a.t_ms < b.t_ms; });

    // Effort plans per outfield player.
    for (auto& ap : players) {
      ap.plans.clear();
      ap.cursor = 0;
      if (ap.goalkeeper) continue;
      double t = static_cast<double>(rng.uniform_int(0, cfg.rest_max_ms));
      while (true) {
        EffortPlan plan;
        plan.t0 = t;
        const double minute = static_cast<double>(clock_offset) / 60000.0 + t / 60000.0;
        bool sprint = rng.chance(cfg.sprint_share);
        bool decayed = false;
        if (sprint && cfg.decay_after_minute && minute >= *cfg.decay_after_minute) {
          decayed = rng.chance(cfg.decay);
          if (decayed) sprint = false;
        }
        plan.cruise = (sprint ? cfg.sprint_kmh : cfg.jog_kmh) / 3.6;
        plan.accel = 3.0;
        plan.t_ramp = plan.cruise / plan.accel;
        plan.hold = static_cast<double>(rng.uniform_int(cfg.hold_min_ms, cfg.hold_max_ms)) / 1000.0;
        plan.out_dist = plan.cruise * (plan.t_ramp + plan.hold);
        const double angle = rng.uniform(-std::numbers::pi, std::numbers::pi);
        plan.dir = {std::cos(angle), std::sin(angle)};
        plan.t_out = t + 1000.0 * (2.0 * plan.t_ramp + plan.hold);
        plan.back_speed = cfg.return_kmh / 3.6;
        plan.t_back = plan.t_out + 1000.0 * plan.out_dist / plan.back_speed;
        if (plan.t_back >= static_cast<double>(t_end)) break;
        if (sprint) ++truth.sprints;
        ap.plans.push_back(plan);
        double busy_until = plan.t_back;
        if (decayed) {
          // A jog in place of a sprint keeps the sprint's slot so the sprint rate drops by the decay share.
          const double v = cfg.sprint_kmh / 3.6, ramp = v / plan.accel;
          busy_until = t + 1000.0 * (2.0 * ramp + plan.hold + v * (ramp + plan.hold) / plan.back_speed);
        }
        t = busy_until + static_cast<double>(rng.uniform_int(cfg.rest_min_ms, cfg.rest_max_ms));
      }
    }

    // Frames.
    std::map<std::string, TeamState> teams;
    for (const auto& team : meta.teams) {
      teams[team.team_id] = {team.team_id, cfg.defend_depth.contains(team.team_id) ? cfg.defend_depth.at(team.team_id)
                                                                                     : 45.0};
    }
    std::size_t seg = 0;
    std::size_t ev = 0;
    Point ball_from = {pitch.length / 2.0, pitch.width / 2.0};
    std::int64_t ball_from_t = 0;
    std::optional<std::string> last_team;
    match.frames.reserve(match.frames.size() + n_frames);
    for (std::size_t i = 0; i < n_frames; ++i) {
      const std::int64_t t = static_cast<std::int64_t>(i) * kDt;
      while (seg + 1 < schedule.size() && schedule[seg].t1 <= t) ++seg;
      const auto& cur = schedule[seg];
      if (cur.team) last_team = cur.team;
      while (ev < events.size() && events[ev].t_ms <= t) {
        ball_from = events[ev].location;
        ball_from_t = events[ev].t_ms;
        ++ev;
      }
      Point ball = ball_from;
      if (ev < events.size() && ev > 0) {
        const Event& next = events[ev];
        const double f = static_cast<double>(t - ball_from_t) / static_cast<double>(next.t_ms - ball_from_t);
        ball = lerp(ball_from, next.location, std::clamp(f, 0.0, 1.0));
      }

      for (auto& [id, ts] : teams) {
        const bool attacking = last_team && *last_team == id;
        const double target = attacking ? cfg.attack_depth
                                        : (cfg.defend_depth.contains(id) ? cfg.defend_depth.at(id) : 45.0);
        const double step = cfg.anchor_speed * kDt / 1000.0;
        ts.anchor += std::clamp(target - ts.anchor, -step, step);
      }

      Frame f;
      f.t_ms = t;
      f.period = period;
      f.ball = {std::clamp(ball.x, 0.0, pitch.length), std::clamp(ball.y, 0.0, pitch.width)};
      f.in_play = cur.team.has_value();
      f.players.reserve(players.size());
      for (auto& ap : players) {
        const int sign = meta.direction(ap.team, period);
        const double ts = static_cast<double>(t) / 1000.0;
        Point own;
        if (ap.goalkeeper) {
          own = {6.0 + std::sin(ts / 9.0 + ap.phase), pitch.width / 2.0 + 2.0 * std::sin(ts / 13.0 + ap.phase)};
        } else {
          const double anchor = teams.at(ap.team).anchor;
          own = Point{anchor, pitch.width / 2.0} + ap.slot +
                Point{0.8 * std::sin(ts / 7.0 + ap.phase), 0.8 * std::cos(ts / 11.0 + ap.phase)};
          while (ap.cursor < ap.plans.size() && ap.plans[ap.cursor].t_back <= static_cast<double>(t)) ++ap.cursor;
          if (ap.cursor < ap.plans.size() && ap.plans[ap.cursor].t0 <= static_cast<double>(t)) {
            auto& plan = ap.plans[ap.cursor];
            double d = 0.0;
            if (static_cast<double>(t) <= plan.t_out) {
              d = outward_arc(plan, static_cast<double>(t));
            } else {
              d = std::max(0.0, plan.out_dist - plan.back_speed * (static_cast<double>(t) - plan.t_out) / 1000.0);
            }
            if (static_cast<double>(t) == plan.t0) {
              // Keep the whole excursion on the pitch.
              const Point end = own + plan.out_dist * plan.dir;
              if (end.x < 2.0 || end.x > pitch.length - 2.0) plan.dir.x = -plan.dir.x;
              if (end.y < 2.0 || end.y > pitch.width - 2.0) plan.dir.y = -plan.dir.y;
            }
            own = own + d * plan.dir;
          }
        }
        if (script.dropout > 0.0 && rng.chance(script.dropout)) continue;
        Point xy = own_to_world(own, sign, pitch);
        if (script.noise_m > 0.0) xy = xy + Point{rng.normal(script.noise_m), rng.normal(script.noise_m)};
        xy = {std::clamp(xy.x, 0.0, pitch.length), std::clamp(xy.y, 0.0, pitch.width)};
        f.players.push_back({ap.id, ap.team, xy});
      }
      match.frames.push_back(std::move(f));
    }
    for (auto& e : events) match.events.push_back(std::move(e));
    clock_offset += t_end;
  }
}

} // namespace

Output generate(const Script& script) {
  script.pitch.validate();
  if (script.dropout < 0.0 || script.dropout >= 1.0) throw ValidationError("dropout must be in [0, 1)");
  if (script.noise_m < 0.0) throw ValidationError("noise must be non-negative");
  for (std::size_t i = 0; i < script.periods_ms.size(); ++i) {
    if (script.periods_ms[i] <= 0 || script.periods_ms[i] % kDt != 0) {
      throw ValidationError("period " + std::to_string(i + 1) + " duration must be a positive multiple of 100 ms");
    }
  }
  if (script.periods_ms.size() > 4) throw ValidationError("at most four periods");

  Output out;
  Match& match = out.match;
  match.meta.match_id = script.match_id;
  match.meta.pitch = script.pitch;
  match.meta.teams = script.teams;
  if (script.periods_ms.empty()) return out;
  match.meta.validate();

  Rng rng(script.seed);
  if (script.auto_match) {
    if (!script.players.empty() || !script.events.empty()) {
      throw ValidationError("auto match cannot be combined with explicit players or events");
    }
    generate_auto(script, *script.auto_match, rng, match, out.truth);
    apply_directions(match.frames, match.meta);
    return out;
  }

  struct Mover {
    std::string id;
    std::string team;
    Period period;
    SpeedProfile profile;
    Polyline path;
  };
  std::vector<Mover> movers;
  std::set<std::pair<int, std::string>> seen;
  for (const auto& d : script.players) {
    const auto team = match.meta.team_of(d.player_id);
    if (!team) throw ValidationError("player " + d.player_id + " is not on a roster");
    if (static_cast<std::size_t>(d.period) > script.periods_ms.size()) {
      throw ValidationError("player " + d.player_id + " directive refers to a missing period");
    }
    if (!seen.insert({static_cast<int>(d.period), d.player_id}).second) {
      throw ValidationError("player " + d.player_id + " has two directives in one period");
    }
    if (d.path.empty()) throw ValidationError("player " + d.player_id + " has an empty path");
    for (const Point& p : d.path) {
      if (!script.pitch.contains(p)) throw ValidationError("player " + d.player_id + " path leaves the pitch");
    }
    if (!d.speed.empty() && !d.efforts.empty()) {
      throw ValidationError("player " + d.player_id + " mixes speed keys and efforts");
    }
    std::vector<SpeedKey> keys = d.speed;
    if (!d.efforts.empty()) keys = keys_from_efforts(d, out.truth.runs);
    if (keys.empty()) keys.push_back({0.0, d.initial_kmh.value_or(0.0)});
    validate_keys(keys, d.player_id);
    Mover m{d.player_id, *team, d.period, SpeedProfile(keys), Polyline(d.path, d.shuttle)};
    const double duration = static_cast<double>(script.periods_ms[static_cast<std::size_t>(d.period) - 1]);
    if (!d.shuttle && m.profile.arc(duration) > m.path.length() + 1e-9) {
      throw ValidationError("player " + d.player_id + ": path is shorter than the scripted distance (" +
                            std::to_string(m.path.length()) + " m < " + std::to_string(m.profile.arc(duration)) +
                            " m)");
    }
    movers.push_back(std::move(m));
  }

  std::vector<Event> events = script.events;
  std::stable_sort(events.begin(), events.end(), [](const Event& a, const Event& b) {
    return std::tie(a.period, a.t_ms) < std::tie(b.period, b.t_ms);
  });
  for (const auto& e : events) {
    if (static_cast<std::size_t>(e.period) > script.periods_ms.size()) {
      throw ValidationError("event at t=" + std::to_string(e.t_ms) + " refers to a missing period");
    }
    if (!script.pitch.contains(e.location, 2.0)) {
      throw ValidationError("event at t=" + std::to_string(e.t_ms) + " lies off the pitch");
    }
  }

  for (std::size_t pi = 0; pi < script.periods_ms.size(); ++pi) {
    const Period period = period_from_int(static_cast<int>(pi) + 1);
    const std::int64_t n_frames = script.periods_ms[pi] / kDt;
    std::vector<const Event*> pe;
    for (const auto& e : events) {
      if (e.period == period) pe.push_back(&e);
    }
    bool in_play = true;
    std::size_t ev = 0;
    for (std::int64_t i = 0; i < n_frames; ++i) {
      const std::int64_t t = i * kDt;
      Frame f;
      f.t_ms = t;
      f.period = period;
      while (ev < pe.size() && pe[ev]->t_ms <= t) {
        if (is_stoppage(pe[ev]->type)) in_play = false;
        if (is_on_ball(pe[ev]->type)) in_play = true;
        ++ev;
      }
      if (pe.empty()) {
        f.ball = {script.pitch.length / 2.0, script.pitch.width / 2.0};
      } else if (ev == 0) {
        f.ball = pe.front()->location;
      } else if (ev == pe.size()) {
        f.ball = pe.back()->end_location.value_or(pe.back()->location);
      } else {
        const Event& a = *pe[ev - 1];
        const Event& b = *pe[ev];
        const double frac = static_cast<double>(t - a.t_ms) / static_cast<double>(std::max<std::int64_t>(1, b.t_ms - a.t_ms));
        f.ball = lerp(a.location, b.location, frac);
      }
      f.in_play = pe.empty() ? std::optional<bool>{} : std::optional<bool>{in_play};
      for (const auto& m : movers) {
        if (m.period != period) continue;
        if (script.dropout > 0.0 && rng.chance(script.dropout)) continue;
        Point xy = m.path.at(m.profile.arc(static_cast<double>(t)));
        if (script.noise_m > 0.0) xy = xy + Point{rng.normal(script.noise_m), rng.normal(script.noise_m)};
        f.players.push_back({m.id, m.team, xy});
      }
      match.frames.push_back(std::move(f));
    }
  }
  match.events = std::move(events);
  apply_directions(match.frames, match.meta);
  out.truth.possessions = script.possessions;
  for (const auto& p : script.possessions) {
    if (p.team_id && p.attack && *p.attack != AttackType::Organized) {
      out.truth.attack_phases.push_back({p.period, p.t_start, p.t_end, *p.attack});
    }
  }
  return out;
}

json truth_to_json(const GroundTruth& truth) {
  json runs = json::array();
  for (const auto& r : truth.runs) {
    runs.push_back({{"player_id", r.player_id},
                    {"period", static_cast<int>(r.period)},
                    {"t_valley_end", r.t_valley_end},
                    {"t_peak_start", r.t_peak_start},
                    {"t_peak_end", r.t_peak_end},
                    {"t_next_valley_start", r.t_next_valley_start},
                    {"peak_kmh", r.peak_kmh},
                    {"is_hi", r.is_hi}});
  }
  json possessions = json::array();
  for (const auto& p : truth.possessions) {
    possessions.push_back({{"team", p.team_id ? json(*p.team_id) : json(nullptr)},
                           {"period", static_cast<int>(p.period)},
                           {"start_ms", p.t_start},
                           {"end_ms", p.t_end},
                           {"attack", p.attack ? json(to_string(*p.attack)) : json(nullptr)}});
  }
  json phases = json::array();
  for (const auto& p : truth.attack_phases) {
    phases.push_back({{"period", static_cast<int>(p.period)},
                      {"start_ms", p.t_start},
                      {"end_ms", p.t_end},
                      {"attack", to_string(p.attack)}});
  }
  json roles = json::object();
  for (const auto& [pid, role] : truth.roles) roles[pid] = to_string(role);
  return {{"runs", runs},
          {"possessions", possessions},
          {"attack_phases", phases},
          {"roles", roles},
          {"formations", truth.formations},
          {"sprints", truth.sprints}};
}

} // namespace runlens::synth
