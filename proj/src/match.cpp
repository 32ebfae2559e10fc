#include "runlens/match.hpp"

#include <algorithm>

namespace runlens {

namespace {

template <typename T>
bool time_less(const T& a, const T& b) {
  if (a.period != b.period) return a.period < b.period;
  return a.t_ms < b.t_ms;
}

} // namespace

MatchIndex::MatchIndex(const Match& match, std::int64_t nominal_dt_ms) : match_(&match) {
  const auto& frames = match.frames;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    if (periods_.empty() || periods_.back().period != frames[i].period) {
      periods_.push_back({frames[i].period, frames[i].t_ms, frames[i].t_ms + nominal_dt_ms, i, i + 1});
    } else {
      periods_.back().t_end = frames[i].t_ms + nominal_dt_ms;
      periods_.back().end_frame = i + 1;
    }
  }
  for (const auto& t : match.meta.teams) {
    for (const auto& p : t.players) {
      if (p.goalkeeper) goalkeepers_.insert(p.player_id);
    }
  }
}

const PeriodSpan* MatchIndex::period(Period p) const {
  for (const auto& span : periods_) {
    if (span.period == p) return &span;
  }
  return nullptr;
}

std::int64_t MatchIndex::duration_ms() const {
  std::int64_t total = 0;
  for (const auto& span : periods_) total += span.duration_ms();
  return total;
}

std::int64_t MatchIndex::clock_offset(Period p) const {
  std::int64_t offset = 0;
  for (const auto& span : periods_) {
    if (span.period == p) return offset;
    offset += span.duration_ms();
  }
  return offset;
}

std::span<const Frame> MatchIndex::frames_between(Period p, std::int64_t t0, std::int64_t t1) const {
  const PeriodSpan* span = period(p);
  if (span == nullptr || t1 <= t0) return {};
  const auto& frames = match_->frames;
  auto begin = frames.begin() + static_cast<std::ptrdiff_t>(span->first_frame);
  auto end = frames.begin() + static_cast<std::ptrdiff_t>(span->end_frame);
  auto lo = std::lower_bound(begin, end, t0, [](const Frame& f, std::int64_t t) { return f.t_ms < t; });
  auto hi = std::lower_bound(lo, end, t1, [](const Frame& f, std::int64_t t) { return f.t_ms < t; });
  return {lo, hi};
}

const Frame* MatchIndex::nearest(Period p, std::int64_t t, std::int64_t tolerance_ms) const {
  const PeriodSpan* span = period(p);
  if (span == nullptr) return nullptr;
  const auto& frames = match_->frames;
  auto begin = frames.begin() + static_cast<std::ptrdiff_t>(span->first_frame);
  auto end = frames.begin() + static_cast<std::ptrdiff_t>(span->end_frame);
  auto it = std::lower_bound(begin, end, t, [](const Frame& f, std::int64_t v) { return f.t_ms < v; });
  const Frame* best = nullptr;
  std::int64_t best_gap = tolerance_ms + 1;
  if (it != end && it->t_ms - t < best_gap) {
    best = &*it;
    best_gap = it->t_ms - t;
  }
  if (it != begin) {
    const Frame& prev = *(it - 1);
    if (t - prev.t_ms < best_gap) best = &prev;
  }
  return best;
}

std::vector<Point> MatchIndex::outfield(const Frame& frame, std::string_view team_id, int sign) const {
  std::vector<Point> out;
  out.reserve(11);
  for (const auto& p : frame.players) {
    if (p.team_id == team_id && !is_goalkeeper(p.player_id)) out.push_back(canonical(p.xy, sign, pitch()));
  }
  return out;
}

void sort_match(Match& match) {
  std::stable_sort(match.frames.begin(), match.frames.end(), time_less<Frame>);
  std::stable_sort(match.events.begin(), match.events.end(), time_less<Event>);
}

} // namespace runlens
