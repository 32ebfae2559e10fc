#pragma once

#include "runlens/core.hpp"

#include <span>
#include <string>
#include <unordered_set>
#include <vector>

namespace runlens {

/// One match: metadata plus frames and events sorted by (period, t_ms).
struct Match {
  MatchMeta meta;
  std::vector<Frame> frames;
  std::vector<Event> events;
};

struct PeriodSpan {
  Period period = Period::First;
  std::int64_t t_start = 0; // first frame
  std::int64_t t_end = 0;   // last frame + nominal spacing
  std::size_t first_frame = 0;
  std::size_t end_frame = 0; // exclusive

  std::int64_t duration_ms() const { return t_end - t_start; }
};

/// Read-only lookups over a Match. The match must outlive the index.
class MatchIndex {
public:
  explicit MatchIndex(const Match& match, std::int64_t nominal_dt_ms = 100);

  const Match& match() const { return *match_; }
  const MatchMeta& meta() const { return match_->meta; }
  const PitchSpec& pitch() const { return match_->meta.pitch; }
  const std::vector<PeriodSpan>& periods() const { return periods_; }
  const PeriodSpan* period(Period p) const;

  /// Sum of period durations.
  std::int64_t duration_ms() const;
  /// Offset of a period's start on the concatenated match clock.
  std::int64_t clock_offset(Period p) const;

  /// Frames of a period with t in [t0, t1).
  std::span<const Frame> frames_between(Period p, std::int64_t t0, std::int64_t t1) const;
  /// Nearest frame within `tolerance_ms`, or nullptr.
  const Frame* nearest(Period p, std::int64_t t, std::int64_t tolerance_ms) const;

  bool is_goalkeeper(std::string_view player_id) const { return goalkeepers_.contains(std::string(player_id)); }

  /// Visible outfield players of `team_id`, seen by a team attacking with `sign`.
  std::vector<Point> outfield(const Frame& frame, std::string_view team_id, int sign) const;

private:
  const Match* match_;
  std::vector<PeriodSpan> periods_;
  std::unordered_set<std::string> goalkeepers_;
};

/// Sorts frames and events by (period, t_ms); stable for equal keys.
void sort_match(Match& match);

} // namespace runlens
