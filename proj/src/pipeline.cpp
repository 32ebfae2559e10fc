#include "runlens/pipeline.hpp"

#include "runlens/tactical.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <thread>
#include <unordered_map>

namespace runlens {

std::string run_id(std::string_view match_id, std::string_view player_id, Period period, std::int64_t t_valley_end) {
  char t[24];
  std::snprintf(t, sizeof(t), "%010lld", static_cast<long long>(t_valley_end));
  return std::string(match_id) + "/" + std::string(player_id) + "/" + std::to_string(static_cast<int>(period)) + "/" + t;
}

MatchSummary MatchArtifacts::summary() const { return {match_id, ledger, runs, actions, samples}; }

namespace {

struct PlayerTrack {
  std::string player_id;
  std::string team_id;
  Period period = Period::First;
  std::vector<TrackSample> samples;
  SpeedSignal signal;
  std::vector<RunEffort> runs;
};

/// Forward-only segment lookup for increasing times within one period.
class SegmentCursor {
public:
  SegmentCursor(std::span<const PossessionSegment> segments, Period period, std::int64_t t) : segs_(segments) {
    const auto* s = segment_at(segments, period, t);
    i_ = s != nullptr ? static_cast<std::size_t>(s - segments.data()) : segments.size();
    period_ = period;
  }
  const PossessionSegment* at(std::int64_t t) {
    while (i_ < segs_.size() && segs_[i_].period == period_ && t >= segs_[i_].t_end) ++i_;
    if (i_ < segs_.size() && segs_[i_].period == period_ && t >= segs_[i_].t_start) return &segs_[i_];
    return nullptr;
  }

private:
  std::span<const PossessionSegment> segs_;
  std::size_t i_ = 0;
  Period period_;
};

Phase phase_for(const PossessionSegment* seg, std::string_view team) {
  if (seg == nullptr || seg->out_of_play()) return Phase::OutOfPlay;
  return *seg->team_id == team ? Phase::InPossession : Phase::OutOfPossession;
}

template <typename Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn) {
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(1, n))));
  if (threads == 1) {
    for (std::size_t k = 0; k < n; ++k) fn(k);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(threads);
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < threads; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t k = next++; k < n; k = next++) fn(k);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

class SpeedLookup {
public:
  explicit SpeedLookup(const std::vector<PlayerTrack>& tracks) : tracks_(tracks) {
    for (std::size_t k = 0; k < tracks.size(); ++k) {
      if (!tracks[k].signal.samples.empty()) {
        index_[key(tracks[k].player_id, tracks[k].period)].push_back(k);
      }
    }
  }

  /// Smoothed speed of the sample nearest to t within `tol` ms.
  std::optional<double> at(std::string_view player, Period period, std::int64_t t, std::int64_t tol) const {
    auto it = index_.find(key(player, period));
    if (it == index_.end()) return std::nullopt;
    std::optional<double> best;
    std::int64_t best_gap = tol + 1;
    for (std::size_t k : it->second) {
      const auto& s = tracks_[k].signal.samples;
      if (t < s.front().t_ms - tol || t > s.back().t_ms + tol) continue;
      auto pos = std::lower_bound(s.begin(), s.end(), t, [](const SpeedSample& a, std::int64_t v) { return a.t_ms < v; });
      for (auto c : {pos, pos == s.begin() ? pos : pos - 1}) {
        if (c == s.end()) continue;
        const std::int64_t gap = std::abs(c->t_ms - t);
        if (gap < best_gap) {
          best_gap = gap;
          best = c->smoothed_kmh;
        }
      }
    }
    return best;
  }

private:
  static std::string key(std::string_view player, Period period) {
    return std::string(player) + '\x1f' + std::to_string(static_cast<int>(period));
  }
  const std::vector<PlayerTrack>& tracks_;
  std::unordered_map<std::string, std::vector<std::size_t>> index_;
};

std::optional<double> safe_epv(const EpvProvider& epv, const MatchIndex& index, Period period, std::int64_t t,
                               const std::string& team, std::int64_t tol) {
  const Frame* f = index.nearest(period, t, tol);
  if (f == nullptr || (f->in_play && !*f->in_play)) return std::nullopt;
  try {
    return epv.evaluate(*f, team);
  } catch (const Error&) {
    return std::nullopt;
  }
}

std::optional<DefensiveShape> shape_at(const MatchIndex& index, Period period, std::int64_t t, std::int64_t tol,
                                       const std::string& defending_team, int attacking_sign) {
  const Frame* f = index.nearest(period, t, tol);
  if (f == nullptr) return std::nullopt;
  const auto pts = index.outfield(*f, defending_team, attacking_sign);
  try {
    return defensive_shape(pts);
  } catch (const DegenerateGeometry&) {
    return std::nullopt;
  }
}

} // namespace

MatchArtifacts run_pipeline(const Match& match, const Config& config, const PipelineOptions& options) {
  const auto& meta = match.meta;
  const auto& kcfg = config.kinematics;
  const MatchIndex index(match, kcfg.nominal_dt_ms);
  const SurrogateEpv surrogate(meta.pitch);
  const EpvProvider& epv = options.epv != nullptr ? *options.epv : surrogate;

  MatchArtifacts out;
  out.match_id = meta.match_id;
  out.segments = build_phases(index, config.possession);
  out.roles = build_role_timeline(index, out.segments, config.formation);
  const auto& segments = out.segments;

  // Per-player tracks, split at large gaps.
  std::vector<PlayerTrack> tracks;
  for (const auto& span : index.periods()) {
    std::unordered_map<std::string, std::size_t> slot;
    std::vector<std::pair<std::string, std::string>> who;
    std::vector<std::vector<TrackSample>> raw;
    for (std::size_t i = span.first_frame; i < span.end_frame; ++i) {
      const Frame& f = match.frames[i];
      for (const auto& p : f.players) {
        auto [it, inserted] = slot.try_emplace(p.player_id, raw.size());
        if (inserted) {
          raw.emplace_back();
          who.emplace_back(p.player_id, p.team_id);
        }
        auto& v = raw[it->second];
        if (!v.empty() && v.back().t_ms == f.t_ms) continue;
        v.push_back({f.t_ms, p.xy, false});
      }
    }
    std::vector<std::size_t> order(raw.size());
    for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return who[a].first < who[b].first; });
    for (std::size_t k : order) {
      for (auto& piece : split_and_fill(raw[k], kcfg)) {
        PlayerTrack t;
        t.player_id = who[k].first;
        t.team_id = who[k].second;
        t.period = span.period;
        t.samples = std::move(piece);
        tracks.push_back(std::move(t));
      }
    }
  }
  parallel_for(tracks.size(), options.threads, [&](std::size_t k) {
    auto& t = tracks[k];
    if (t.samples.size() < 2) return;
    t.signal = compute_speed(t.player_id, t.samples, kcfg);
    t.runs = segment_runs(t.signal, t.samples, kcfg);
  });
  const SpeedLookup speeds(tracks);
  const auto lookup_tol = config.tactical.frame_lookup_ms;

  // On-ball actions: a reception and the receiver's consecutive events.
  const auto& events = match.events;
  for (std::size_t i = 0; i < events.size(); ++i) {
    const Event& e = events[i];
    if (e.type != EventType::Reception) continue;
    std::int64_t t_end = e.t_ms;
    for (std::size_t j = i + 1; j < events.size(); ++j) {
      const Event& n = events[j];
      if (n.period != e.period || n.player_id != e.player_id || is_stoppage(n.type) || n.type == EventType::Reception) {
        break;
      }
      t_end = n.t_ms;
    }
    OnBallAction a;
    a.match_id = meta.match_id;
    a.player_id = e.player_id;
    a.team_id = e.team_id;
    a.period = e.period;
    a.t_start = e.t_ms;
    a.t_end = t_end;
    if (const auto* r = out.roles.at(e.player_id, e.period, e.t_ms)) a.role = r->role;
    a.action_speed = speeds.at(e.player_id, e.period, e.t_ms, lookup_tol);
    const auto* span = index.period(e.period);
    if (span != nullptr && e.t_ms - config.reception_lookback_ms >= span->t_start) {
      a.reception_speed = speeds.at(e.player_id, e.period, e.t_ms - config.reception_lookback_ms, lookup_tol);
    }
    a.in_possession = phase_for(segment_at(segments, e.period, e.t_ms), e.team_id) == Phase::InPossession;
    a.epv_start = safe_epv(epv, index, e.period, a.t_start, e.team_id, config.valuation.frame_tolerance_ms);
    a.epv_end = safe_epv(epv, index, e.period, a.t_end, e.team_id, config.valuation.frame_tolerance_ms);
    out.actions.push_back(std::move(a));
  }
  std::map<std::pair<std::string, int>, std::vector<const OnBallAction*>> actions_by_player;
  for (const auto& a : out.actions) actions_by_player[{a.player_id, static_cast<int>(a.period)}].push_back(&a);

  // Contextualized runs and valuation.
  for (const auto& t : tracks) {
    const std::string& opp = meta.opponent(t.team_id);
    const int sign = meta.direction(t.team_id, t.period);
    for (const auto& run : t.runs) {
      ContextualizedRun cr;
      cr.match_id = meta.match_id;
      cr.team_id = t.team_id;
      cr.period = t.period;
      cr.run = run;
      if (const auto* r = out.roles.at(run.player_id, t.period, run.t_valley_end)) cr.role = r->role;
      const auto* seg = segment_at(segments, t.period, run.t_valley_end);
      cr.phase = phase_for(seg, t.team_id);
      if (seg != nullptr) {
        cr.attack_type = seg->attack_type;
        cr.defense_type = seg->defense_type;
      }
      if (auto it = actions_by_player.find({run.player_id, static_cast<int>(t.period)}); it != actions_by_player.end()) {
        cr.on_ball = std::any_of(it->second.begin(), it->second.end(), [&](const OnBallAction* a) {
          return a->t_start <= run.t_next_valley_start && run.t_valley_end <= a->t_end;
        });
      }
      if (cr.phase == Phase::InPossession) {
        RunEffort canon = run;
        canon.origin = canonical(run.origin, sign, meta.pitch);
        canon.destination = canonical(run.destination, sign, meta.pitch);
        const auto at_origin = shape_at(index, t.period, run.t_valley_end, lookup_tol, opp, sign);
        const auto at_dest = shape_at(index, t.period, run.t_peak_end, lookup_tol, opp, sign);
        const auto cls = classify_run(canon, at_origin, at_dest, config.tactical);
        cr.origin_zone = cls.origin_zone;
        cr.destination_zone = cls.destination_zone;
        cr.movement = cls.movement;
      }
      if (run.is_hi && cr.role) {
        const RunValueInput input{&run, run_id(meta.match_id, run.player_id, t.period, run.t_valley_end), t.period,
                                  t.team_id, *cr.role};
        auto outcome = value_run(input, index, segments, epv, config.valuation);
        if (outcome.sample) {
          out.samples.push_back(std::move(*outcome.sample));
        } else {
          ++out.discarded[outcome.discard_reason];
        }
      }
      out.runs.push_back(std::move(cr));
    }
  }
  std::sort(out.samples.begin(), out.samples.end(),
            [](const RunValueSample& a, const RunValueSample& b) { return a.run_id < b.run_id; });

  // Effective-time ledger.
  EffectiveTimeLedger& ledger = out.ledger;
  ledger.match_id = meta.match_id;
  const std::int64_t duration_ms = index.duration_ms();
  ledger.duration_s = static_cast<double>(duration_ms) / 1000.0;
  struct TeamMs {
    std::int64_t in = 0, out = 0, oop = 0, direct = 0, press = 0, labelled = 0;
  };
  std::map<std::string, TeamMs> ms;
  for (const auto& team : meta.teams) ms[team.team_id];
  const std::int64_t n_minutes = (duration_ms + 59999) / 60000;
  std::map<std::pair<std::string, std::int64_t>, MinuteStat> minutes;
  std::map<std::pair<std::string, std::int64_t>, std::int64_t> minute_oop_ms;
  for (const auto& team : meta.teams) {
    for (std::int64_t m = 0; m < n_minutes; ++m) minutes[{team.team_id, m}] = {team.team_id, static_cast<int>(m), 0, 0, 0};
  }
  for (const auto& seg : segments) {
    const std::int64_t d = seg.duration_ms();
    if (seg.out_of_play()) {
      for (auto& [_, v] : ms) v.oop += d;
      continue;
    }
    const std::string& team = *seg.team_id;
    const std::string& opp = meta.opponent(team);
    ms[team].in += d;
    ms[opp].out += d;
    if (seg.attack_type == AttackType::DirectPlay) ms[team].direct += d;
    if (seg.defense_type && *seg.defense_type != DefenseType::Unknown) {
      ms[opp].labelled += d;
      if (*seg.defense_type == DefenseType::HighPressure) ms[opp].press += d;
    }
    const std::int64_t off = index.clock_offset(seg.period);
    for (std::int64_t a = off + seg.t_start; a < off + seg.t_end;) {
      const std::int64_t m = std::min(a / 60000, n_minutes - 1);
      const std::int64_t b = std::min(off + seg.t_end, (a / 60000 + 1) * 60000);
      minute_oop_ms[{opp, m}] += b - a;
      a = b;
    }
  }
  std::map<std::string, TeamLedger> team_ledgers;
  for (const auto& team : meta.teams) {
    TeamLedger tl;
    tl.team_id = team.team_id;
    const auto& v = ms[team.team_id];
    tl.in_possession_s = static_cast<double>(v.in) / 1000.0;
    tl.out_of_possession_s = static_cast<double>(v.out) / 1000.0;
    tl.out_of_play_s = static_cast<double>(v.oop) / 1000.0;
    tl.direct_play_s = static_cast<double>(v.direct) / 1000.0;
    tl.high_press_s = static_cast<double>(v.press) / 1000.0;
    tl.defense_labelled_s = static_cast<double>(v.labelled) / 1000.0;
    const auto& other = meta.team(meta.opponent(team.team_id));
    if (team.xg && other.xg) {
      tl.xg_for = team.xg;
      tl.xg_against = other.xg;
    }
    team_ledgers[team.team_id] = tl;
  }
  const double hi = kcfg.bands.running_max;
  for (const auto& t : tracks) {
    const auto& s = t.signal.samples;
    if (s.size() < 2) continue;
    auto tl_it = team_ledgers.find(t.team_id);
    if (tl_it == team_ledgers.end()) continue;
    auto& tl = tl_it->second;
    const std::int64_t off = index.clock_offset(t.period);
    SegmentCursor cursor(segments, t.period, s.front().t_ms);
    for (std::size_t i = 1; i < s.size(); ++i) {
      const double d = s[i].raw_kmh / 3.6 * static_cast<double>(s[i].t_ms - s[i - 1].t_ms) / 1000.0;
      const bool is_hi = s[i].smoothed_kmh >= hi;
      const Phase phase = phase_for(cursor.at(s[i].t_ms), t.team_id);
      if (phase == Phase::InPossession) {
        tl.distance_in += d;
        if (is_hi) tl.hi_distance_in += d;
      } else if (phase == Phase::OutOfPossession) {
        tl.distance_out += d;
        if (is_hi) tl.hi_distance_out += d;
        const std::int64_t m = std::clamp<std::int64_t>((off + s[i].t_ms) / 60000, 0, n_minutes - 1);
        auto& stat = minutes[{t.team_id, m}];
        stat.distance += d;
        if (is_hi) stat.hi_distance += d;
      }
    }
  }
  for (const auto& team : meta.teams) ledger.teams.push_back(team_ledgers[team.team_id]);
  for (auto& [key, stat] : minutes) {
    if (auto it = minute_oop_ms.find(key); it != minute_oop_ms.end()) {
      stat.out_of_possession_s = static_cast<double>(it->second) / 1000.0;
    }
    ledger.minutes.push_back(stat);
  }

  std::map<std::pair<std::string, std::optional<Role>>, TeamMs> player_ms;
  for (const auto& [pid, intervals] : out.roles.players) {
    const auto team = meta.team_of(pid);
    if (!team) continue;
    for (const auto& r : intervals) {
      auto& acc = player_ms[{pid, r.role}];
      SegmentCursor cursor(segments, r.period, r.t_start);
      for (std::int64_t a = r.t_start; a < r.t_end;) {
        const auto* seg = cursor.at(a);
        const std::int64_t b = seg != nullptr ? std::min(seg->t_end, r.t_end) : r.t_end;
        switch (phase_for(seg, *team)) {
        case Phase::InPossession: acc.in += b - a; break;
        case Phase::OutOfPossession: acc.out += b - a; break;
        case Phase::OutOfPlay: acc.oop += b - a; break;
        }
        a = b;
      }
    }
  }
  for (const auto& [key, v] : player_ms) {
    PlayerLedger pl;
    pl.player_id = key.first;
    pl.team_id = *meta.team_of(key.first);
    pl.role = key.second;
    pl.in_possession_s = static_cast<double>(v.in) / 1000.0;
    pl.out_of_possession_s = static_cast<double>(v.out) / 1000.0;
    pl.out_of_play_s = static_cast<double>(v.oop) / 1000.0;
    ledger.players.push_back(std::move(pl));
  }
  return out;
}

} // namespace runlens
