#pragma once

// One match through every layer: kinematics, tactical context, possession
// phases, roles, valuation and the effective-time ledger.

#include "runlens/aggregation.hpp"
#include "runlens/config.hpp"
#include "runlens/formations.hpp"
#include "runlens/match.hpp"

#include <map>
#include <string>
#include <vector>

namespace runlens {

struct MatchArtifacts {
  std::string match_id;
  std::vector<PossessionSegment> segments;
  RoleTimeline roles;
  std::vector<ContextualizedRun> runs;
  std::vector<RunValueSample> samples;
  std::vector<OnBallAction> actions;
  EffectiveTimeLedger ledger;
  std::map<std::string, std::size_t> discarded; // valuation discard reason -> count

  MatchSummary summary() const;
};

struct PipelineOptions {
  unsigned threads = 1;               // per-player kinematics workers
  const EpvProvider* epv = nullptr;   // defaults to the surrogate
};

/// Throws on invalid input; the match must be sorted (see sort_match).
MatchArtifacts run_pipeline(const Match& match, const Config& config, const PipelineOptions& options = {});

/// Stable id of a run: match/player/period/t_valley_end.
std::string run_id(std::string_view match_id, std::string_view player_id, Period period, std::int64_t t_valley_end);

} // namespace runlens
