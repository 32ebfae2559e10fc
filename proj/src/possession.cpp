#include "runlens/possession.hpp"

#include "runlens/geometry.hpp"

#include <algorithm>
#include <array>

namespace runlens {

namespace {

constexpr std::array<std::string_view, 6> kEndReasons{"ball_out",   "referee_stop", "turnover",
                                                      "period_end", "restart",      "phase_change"};
constexpr std::array<std::string_view, 4> kAttackTypes{"organized", "direct_play", "counter_attack", "set_piece"};
constexpr std::array<std::string_view, 4> kDefenseTypes{"high_pressure", "medium_block", "low_block", "unknown"};

template <typename Enum, std::size_t N>
Enum parse_enum(const std::array<std::string_view, N>& names, std::string_view name, const char* what) {
  for (std::size_t i = 0; i < N; ++i) {
    if (names[i] == name) return static_cast<Enum>(i);
  }
  throw ValidationError(std::string("unknown ") + what + " '" + std::string(name) + "'");
}

int precedence(AttackType type) {
  switch (type) {
  case AttackType::SetPiece: return 3;
  case AttackType::CounterAttack: return 2;
  case AttackType::DirectPlay: return 1;
  case AttackType::Organized: return 0;
  }
  return 0;
}

/// Builds the tiling of one period.
class SegmentWriter {
public:
  SegmentWriter(std::vector<PossessionSegment>& out, Period period, std::int64_t t0, int& next_id)
      : out_(out), period_(period), start_(t0), next_id_(next_id) {}

  const std::optional<std::string>& team() const { return team_; }

  void close(std::int64_t t, EndReason reason) {
    if (t <= start_) return; // zero-length segments vanish
    PossessionSegment seg;
    seg.team_id = team_;
    seg.period = period_;
    seg.t_start = start_;
    seg.t_end = t;
    seg.end_reason = reason;
    seg.possession_id = team_ ? id_ : -1;
    out_.push_back(std::move(seg));
  }

  void open(std::optional<std::string> team, std::int64_t t) {
    team_ = std::move(team);
    start_ = t;
    if (team_) id_ = next_id_++;
  }

private:
  std::vector<PossessionSegment>& out_;
  Period period_;
  std::optional<std::string> team_;
  std::int64_t start_;
  int id_ = -1;
  int& next_id_;
};

struct PendingTouch {
  std::string team;
  std::int64_t t = 0;
  int count = 0;
};

} // namespace

std::string_view to_string(EndReason reason) { return kEndReasons.at(static_cast<std::size_t>(reason)); }
std::string_view to_string(AttackType type) { return kAttackTypes.at(static_cast<std::size_t>(type)); }
std::string_view to_string(DefenseType type) { return kDefenseTypes.at(static_cast<std::size_t>(type)); }
EndReason end_reason_from_string(std::string_view name) { return parse_enum<EndReason>(kEndReasons, name, "end reason"); }
AttackType attack_type_from_string(std::string_view name) { return parse_enum<AttackType>(kAttackTypes, name, "attack type"); }
DefenseType defense_type_from_string(std::string_view name) {
  return parse_enum<DefenseType>(kDefenseTypes, name, "defense type");
}

void PossessionConfig::validate() const {
  if (regain_window_ms <= 0 || flip_events < 1 || set_piece_ms <= 0 || counter_ms <= 0 || direct_play_ms <= 0) {
    throw ValidationError("possession windows must be positive");
  }
  if (!(high_press_area_share > 0.0 && high_press_area_share <= 1.0)) {
    throw ValidationError("high-press area share must be in (0, 1]");
  }
  if (high_press_players < 0) throw ValidationError("high-press player count must be >= 0");
  if (!(min_block_coverage >= 0.0 && min_block_coverage <= 1.0)) {
    throw ValidationError("block coverage must be in [0, 1]");
  }
}

std::vector<PossessionSegment> segment_possessions(const MatchIndex& index, const PossessionConfig& config) {
  const auto& events = index.match().events;
  const auto& meta = index.meta();
  for (std::size_t i = 0; i < events.size(); ++i) {
    if (!meta.has_team(events[i].team_id)) {
      throw ValidationError("event " + std::to_string(i) + " references unknown team '" + events[i].team_id + "'");
    }
    if (i > 0) {
      const auto& a = events[i - 1];
      const auto& b = events[i];
      if (b.period < a.period || (b.period == a.period && b.t_ms < a.t_ms)) {
        throw ValidationError("events are not ordered by time at index " + std::to_string(i));
      }
    }
  }

  std::vector<PossessionSegment> out;
  int next_id = 0;
  for (const auto& span : index.periods()) {
    SegmentWriter writer(out, span.period, span.t_start, next_id);
    std::optional<PendingTouch> pending;
    auto flip = [&] {
      writer.close(pending->t, EndReason::Turnover);
      writer.open(pending->team, pending->t);
      pending.reset();
    };

    for (const auto& e : events) {
      if (e.period != span.period) continue;
      const std::int64_t t = std::clamp(e.t_ms, span.t_start, span.t_end);
      if (is_stoppage(e.type)) {
        if (pending && t - pending->t >= config.regain_window_ms) flip();
        pending.reset();
        if (writer.team()) {
          writer.close(t, e.type == EventType::BallOut ? EndReason::BallOut : EndReason::RefereeStop);
          writer.open(std::nullopt, t);
        }
        continue;
      }
      if (!is_on_ball(e.type)) continue;
      if (!writer.team()) {
        writer.close(t, EndReason::Restart);
        writer.open(e.team_id, t);
        continue;
      }
      if (e.team_id == *writer.team()) {
        if (pending) {
          if (t - pending->t >= config.regain_window_ms) {
            // The opponent kept the ball long enough; this touch now challenges it.
            flip();
            pending = PendingTouch{e.team_id, t, 1};
          } else {
            pending.reset(); // instant regain
          }
        }
        continue;
      }
      if (pending) {
        ++pending->count;
      } else {
        pending = PendingTouch{e.team_id, t, 1};
      }
      if (pending->count >= config.flip_events) flip();
    }
    if (pending && span.t_end - pending->t >= config.regain_window_ms) flip();
    writer.close(span.t_end, EndReason::PeriodEnd);
  }
  return out;
}

namespace {

struct TriggerWindow {
  std::int64_t t0;
  std::int64_t t1;
  AttackType type;
  bool low_confidence;
};

std::optional<Point> team_centroid(const MatchIndex& index, const Frame& f, std::string_view team, int sign) {
  const auto pts = index.outfield(f, team, sign);
  if (pts.size() < 3) return std::nullopt;
  return geometry::centroid(pts);
}

/// nullopt: not a counter; otherwise whether the ball-only fallback was used.
std::optional<bool> evaluate_counter(const Event& recovery, const PossessionSegment& segment,
                                     const MatchIndex& index, const PossessionConfig& config) {
  const auto& pitch = index.pitch();
  const std::string& team = *segment.team_id;
  const std::string& opp = index.meta().opponent(team);
  const int sign = index.meta().direction(team, segment.period);
  const Point origin = canonical(recovery.location, sign, pitch);
  const double half = pitch.length / 2.0;
  if (origin.x >= half) return std::nullopt;

  const std::int64_t t_end = std::min(recovery.t_ms + config.counter_ms, segment.t_end);
  const auto frames = index.frames_between(segment.period, recovery.t_ms, t_end);
  double advance = 0.0;
  for (const auto& f : frames) advance = std::max(advance, canonical(f.ball, sign, pitch).x - origin.x);
  if (advance < config.counter_advance_m) return std::nullopt;

  const Frame* start = index.nearest(segment.period, recovery.t_ms, 200);
  if (start == nullptr) return true;
  const auto own0 = team_centroid(index, *start, team, sign);
  const auto opp0 = team_centroid(index, *start, opp, sign);
  if (!own0 || !opp0) return true;
  if (own0->x >= half || opp0->x >= half) return std::nullopt;
  for (const auto& f : frames) {
    const auto own = team_centroid(index, f, team, sign);
    const auto other = team_centroid(index, f, opp, sign);
    if (own && other && own->x > half && other->x > half) return false;
  }
  return std::nullopt;
}

bool pass_completed(const MatchIndex& index, std::size_t event_idx) {
  const auto& events = index.match().events;
  const Event& pass = events[event_idx];
  for (std::size_t j = event_idx + 1; j < events.size(); ++j) {
    const Event& e = events[j];
    if (e.period != pass.period || is_stoppage(e.type)) return false;
    if (is_on_ball(e.type)) return e.team_id == pass.team_id;
  }
  return false;
}

} // namespace

std::vector<AttackWindow> classify_attack(const PossessionSegment& segment, const MatchIndex& index,
                                          const PossessionConfig& config) {
  if (segment.out_of_play()) throw Error("attack type is undefined for out-of-play segments");
  const auto& pitch = index.pitch();
  const std::string& team = *segment.team_id;
  const int sign = index.meta().direction(team, segment.period);
  const auto& events = index.match().events;

  std::vector<TriggerWindow> triggers;
  for (std::size_t i = 0; i < events.size(); ++i) {
    const Event& e = events[i];
    if (e.period != segment.period || e.t_ms < segment.t_start || e.t_ms >= segment.t_end || e.team_id != team) {
      continue;
    }
    const Point loc = canonical(e.location, sign, pitch);
    switch (e.type) {
    case EventType::Corner:
    case EventType::FreeKick:
    case EventType::ThrowIn:
      if (loc.x > pitch.length / 2.0) {
        triggers.push_back({e.t_ms, e.t_ms + config.set_piece_ms, AttackType::SetPiece, false});
      }
      break;
    case EventType::Recovery:
      if (auto low = evaluate_counter(e, segment, index, config)) {
        triggers.push_back({e.t_ms, e.t_ms + config.counter_ms, AttackType::CounterAttack, *low});
      }
      break;
    case EventType::Pass:
      if (e.end_location && loc.x < pitch.length / 3.0) {
        const Point end = canonical(*e.end_location, sign, pitch);
        if (end.x - loc.x >= config.long_pass_m && pass_completed(index, i)) {
          triggers.push_back({e.t_ms, e.t_ms + config.direct_play_ms, AttackType::DirectPlay, false});
        }
      }
      break;
    default:
      break;
    }
  }

  std::vector<std::int64_t> cuts{segment.t_start, segment.t_end};
  for (const auto& w : triggers) {
    for (std::int64_t c : {w.t0, w.t1}) {
      if (c > segment.t_start && c < segment.t_end) cuts.push_back(c);
    }
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  std::vector<AttackWindow> out;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    AttackWindow w{cuts[k], cuts[k + 1], AttackType::Organized, false};
    for (const auto& trig : triggers) {
      if (trig.t0 <= w.t_start && w.t_start < trig.t1) {
        if (precedence(trig.type) > precedence(w.type)) {
          w.type = trig.type;
          w.low_confidence = trig.low_confidence;
        } else if (trig.type == w.type) {
          w.low_confidence = w.low_confidence || trig.low_confidence;
        }
      }
    }
    if (!out.empty() && out.back().type == w.type && out.back().low_confidence == w.low_confidence) {
      out.back().t_end = w.t_end;
    } else {
      out.push_back(w);
    }
  }
  return out;
}

std::optional<DefenseType> frame_defense_label(std::span<const Point> defenders, const PitchSpec& pitch,
                                               const PossessionConfig& config) {
  if (defenders.size() < 3) return std::nullopt;
  const auto hull = geometry::convex_hull(defenders);
  if (hull.size() < 3) return std::nullopt;
  const double half = pitch.length / 2.0;
  const double area = geometry::signed_area(hull);
  const double own_half_area = geometry::signed_area(geometry::clip_below_x(hull, half));
  const auto in_last_third =
      std::count_if(defenders.begin(), defenders.end(), [&](Point p) { return p.x < pitch.length / 3.0; });
  if (own_half_area >= config.high_press_area_share * area && in_last_third >= config.high_press_players) {
    return DefenseType::HighPressure;
  }
  const double min_x =
      std::min_element(hull.begin(), hull.end(), [](Point a, Point b) { return a.x < b.x; })->x;
  if (min_x >= half) return DefenseType::LowBlock;
  return DefenseType::MediumBlock;
}

DefenseType classify_defense(const PossessionSegment& segment, const MatchIndex& index,
                             const PossessionConfig& config) {
  if (segment.out_of_play()) return DefenseType::Unknown;
  const std::string& team = *segment.team_id;
  const std::string& opp = index.meta().opponent(team);
  const int sign = index.meta().direction(team, segment.period);
  const auto frames = index.frames_between(segment.period, segment.t_start, segment.t_end);
  if (frames.empty()) return DefenseType::Unknown;
  std::array<std::size_t, 3> counts{};
  std::size_t labelled = 0;
  for (const auto& f : frames) {
    const auto defenders = index.outfield(f, opp, sign);
    if (auto label = frame_defense_label(defenders, index.pitch(), config)) {
      ++counts[static_cast<std::size_t>(*label)];
      ++labelled;
    }
  }
  if (static_cast<double>(labelled) < config.min_block_coverage * static_cast<double>(frames.size()) ||
      labelled == 0) {
    return DefenseType::Unknown;
  }
  const std::size_t best = *std::max_element(counts.begin(), counts.end());
  const auto winners = std::count(counts.begin(), counts.end(), best);
  if (winners > 1) return DefenseType::MediumBlock;
  return static_cast<DefenseType>(std::find(counts.begin(), counts.end(), best) - counts.begin());
}

std::vector<PossessionSegment> label_phases(std::span<const PossessionSegment> possessions,
                                            const MatchIndex& index, const PossessionConfig& config) {
  std::vector<PossessionSegment> out;
  out.reserve(possessions.size());
  for (const auto& seg : possessions) {
    if (seg.out_of_play()) {
      out.push_back(seg);
      continue;
    }
    const auto windows = classify_attack(seg, index, config);
    for (std::size_t k = 0; k < windows.size(); ++k) {
      PossessionSegment part = seg;
      part.t_start = windows[k].t_start;
      part.t_end = windows[k].t_end;
      part.attack_type = windows[k].type;
      part.low_confidence = windows[k].low_confidence;
      if (k + 1 < windows.size()) part.end_reason = EndReason::PhaseChange;
      part.defense_type = classify_defense(part, index, config);
      out.push_back(std::move(part));
    }
  }
  return out;
}

std::vector<PossessionSegment> build_phases(const MatchIndex& index, const PossessionConfig& config) {
  const auto possessions = segment_possessions(index, config);
  return label_phases(possessions, index, config);
}

const PossessionSegment* segment_at(std::span<const PossessionSegment> segments, Period period, std::int64_t t) {
  auto it = std::upper_bound(segments.begin(), segments.end(), std::pair{period, t},
                             [](const std::pair<Period, std::int64_t>& key, const PossessionSegment& s) {
                               if (key.first != s.period) return key.first < s.period;
                               return key.second < s.t_start;
                             });
  if (it == segments.begin()) return nullptr;
  --it;
  if (it->period != period || t < it->t_start || t >= it->t_end) return nullptr;
  return &*it;
}

} // namespace runlens
