#include "runlens/kinematics.hpp"

#include <algorithm>
#include <functional>
#include <queue>
#include <tuple>

namespace runlens {

void KinematicsConfig::validate() const {
  bands.validate();
  if (smoothing_window < 1) throw ValidationError("smoothing window must be >= 1");
  if (!(outlier_cap_kmh > 0.0)) throw ValidationError("outlier cap must be positive");
  if (nominal_dt_ms <= 0 || max_gap_ms < nominal_dt_ms) {
    throw ValidationError("gap tolerance must be at least the nominal spacing");
  }
  if (min_interval_ms < 0 || min_signal_ms < 0) throw ValidationError("durations must be >= 0");
}

std::vector<std::vector<TrackSample>> split_and_fill(std::span<const TrackSample> samples,
                                                     const KinematicsConfig& config) {
  std::vector<std::vector<TrackSample>> pieces;
  if (samples.empty()) return pieces;
  pieces.emplace_back();
  pieces.back().push_back(samples.front());
  for (std::size_t i = 1; i < samples.size(); ++i) {
    const TrackSample& prev = pieces.back().back();
    const TrackSample& cur = samples[i];
    const std::int64_t gap = cur.t_ms - prev.t_ms;
    if (gap <= 0) continue; // duplicate timestamp
    if (gap > config.max_gap_ms) {
      pieces.emplace_back();
      pieces.back().push_back(cur);
      continue;
    }
    const TrackSample anchor = prev;
    for (std::int64_t t = anchor.t_ms + config.nominal_dt_ms; t < cur.t_ms; t += config.nominal_dt_ms) {
      const double f = static_cast<double>(t - anchor.t_ms) / static_cast<double>(gap);
      pieces.back().push_back({t, lerp(anchor.xy, cur.xy, f), true});
    }
    pieces.back().push_back(cur);
  }
  return pieces;
}

void smooth(SpeedSignal& signal, int window) {
  auto& s = signal.samples;
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(s.size());
  const std::ptrdiff_t half = window / 2;
  // Prefix sums keep this linear in the signal length.
  std::vector<double> prefix(s.size() + 1, 0.0);
  for (std::ptrdiff_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + s[i].raw_kmh;
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, i - half);
    const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(n - 1, i + (window - 1 - half));
    const double mean = (prefix[hi + 1] - prefix[lo]) / static_cast<double>(hi - lo + 1);
    s[i].smoothed_kmh = std::max(0.0, mean);
  }
}

SpeedSignal treat_outliers(SpeedSignal signal, const KinematicsConfig& config) {
  auto& s = signal.samples;
  std::vector<std::size_t> valid;
  for (std::size_t i = 0; i < s.size(); ++i) {
    s[i].valid = s[i].valid && s[i].raw_kmh <= config.outlier_cap_kmh;
    if (s[i].valid) valid.push_back(i);
  }
  if (valid.empty()) {
    throw Error("speed signal of player '" + signal.player_id + "' has no valid sample");
  }
  std::size_t next = 0; // index into `valid` of the first valid sample at or after i
  for (std::size_t i = 0; i < s.size(); ++i) {
    while (next < valid.size() && valid[next] < i) ++next;
    if (s[i].valid) continue;
    if (next == 0) {
      s[i].raw_kmh = s[valid.front()].raw_kmh;
    } else if (next == valid.size()) {
      s[i].raw_kmh = s[valid.back()].raw_kmh;
    } else {
      const SpeedSample& a = s[valid[next - 1]];
      const SpeedSample& b = s[valid[next]];
      const double f = static_cast<double>(s[i].t_ms - a.t_ms) / static_cast<double>(b.t_ms - a.t_ms);
      s[i].raw_kmh = a.raw_kmh + (b.raw_kmh - a.raw_kmh) * f;
    }
  }
  smooth(signal, config.smoothing_window);
  return signal;
}

SpeedSignal compute_speed(std::string_view player_id, std::span<const TrackSample> positions,
                          const KinematicsConfig& config) {
  if (positions.size() < 2) {
    throw ValidationError("speed needs at least two samples for player '" + std::string(player_id) + "'");
  }
  SpeedSignal signal{std::string(player_id), {}};
  signal.samples.resize(positions.size());
  for (std::size_t i = 0; i < positions.size(); ++i) {
    signal.samples[i].t_ms = positions[i].t_ms;
    if (i == 0) continue;
    const std::int64_t dt = positions[i].t_ms - positions[i - 1].t_ms;
    if (dt <= 0) throw ValidationError("positions must be strictly increasing in time");
    signal.samples[i].raw_kmh = distance(positions[i].xy, positions[i - 1].xy) / (dt / 1000.0) * 3.6;
  }
  signal.samples[0].raw_kmh = signal.samples[1].raw_kmh;
  return treat_outliers(std::move(signal), config);
}

double integrated_distance(const SpeedSignal& signal, std::size_t first, std::size_t last) {
  double total = 0.0;
  const auto& s = signal.samples;
  for (std::size_t i = first + 1; i <= last && i < s.size(); ++i) {
    total += s[i].raw_kmh / 3.6 * static_cast<double>(s[i].t_ms - s[i - 1].t_ms) / 1000.0;
  }
  return total;
}

namespace {

struct Node {
  std::size_t first;
  std::size_t last;
  int band;
  std::ptrdiff_t prev;
  std::ptrdiff_t next;
  bool alive;
};

} // namespace

std::vector<SpeedInterval> speed_intervals(const SpeedSignal& signal, const KinematicsConfig& config) {
  const auto& s = signal.samples;
  std::vector<Node> nodes;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const int band = static_cast<int>(speed_category(s[i].smoothed_kmh, config.bands));
    if (!nodes.empty() && nodes.back().band == band) {
      nodes.back().last = i;
    } else {
      const auto idx = static_cast<std::ptrdiff_t>(nodes.size());
      nodes.push_back({i, i, band, idx - 1, -1, true});
      if (idx > 0) nodes[idx - 1].next = idx;
    }
  }

  auto duration = [&](const Node& n) {
    return s[n.last].t_ms - s[n.first].t_ms + config.nominal_dt_ms;
  };

  // Shortest interval first; ties resolved by earliest start.
  using Key = std::tuple<std::int64_t, std::size_t, std::ptrdiff_t>;
  std::priority_queue<Key, std::vector<Key>, std::greater<>> heap;
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    heap.emplace(duration(nodes[k]), nodes[k].first, static_cast<std::ptrdiff_t>(k));
  }
  std::size_t alive = nodes.size();

  // Absorbs `from` into `into`, which must be adjacent.
  auto absorb = [&](std::ptrdiff_t into, std::ptrdiff_t from) {
    Node& a = nodes[into];
    Node& b = nodes[from];
    a.first = std::min(a.first, b.first);
    a.last = std::max(a.last, b.last);
    if (b.prev == into) {
      a.next = b.next;
      if (b.next >= 0) nodes[b.next].prev = into;
    } else {
      a.prev = b.prev;
      if (b.prev >= 0) nodes[b.prev].next = into;
    }
    b.alive = false;
    --alive;
  };

  while (!heap.empty() && alive > 1) {
    auto [dur, first, idx] = heap.top();
    heap.pop();
    Node& n = nodes[idx];
    if (!n.alive || n.first != first || duration(n) != dur) continue;
    if (dur >= config.min_interval_ms) break;
    std::ptrdiff_t target;
    if (n.prev < 0) {
      target = n.next;
    } else if (n.next < 0) {
      target = n.prev;
    } else {
      const int dl = std::abs(nodes[n.prev].band - n.band);
      const int dr = std::abs(nodes[n.next].band - n.band);
      target = dr < dl ? n.next : n.prev;
    }
    absorb(target, idx);
    // The absorbed interval's other neighbour may now share the target's band.
    for (std::ptrdiff_t other : {nodes[target].prev, nodes[target].next}) {
      if (other >= 0 && nodes[other].band == nodes[target].band) absorb(target, other);
    }
    heap.emplace(duration(nodes[target]), nodes[target].first, target);
  }

  std::vector<SpeedInterval> out;
  for (const auto& n : nodes) {
    if (n.alive) out.push_back({n.first, n.last, n.band});
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  return out;
}

std::vector<RunEffort> segment_runs(const SpeedSignal& signal, std::span<const TrackSample> positions,
                                    const KinematicsConfig& config) {
  const auto& s = signal.samples;
  std::vector<RunEffort> runs;
  if (s.size() < 2 || s.back().t_ms - s.front().t_ms + config.nominal_dt_ms < config.min_signal_ms) {
    return runs;
  }
  if (positions.size() != s.size()) {
    throw ValidationError("positions must be index-aligned with the speed signal");
  }
  const auto intervals = speed_intervals(signal, config);
  const std::size_t m = intervals.size();

  std::vector<std::size_t> valleys;
  for (std::size_t k = 0; k < m; ++k) {
    const bool below_prev = k == 0 || intervals[k].band < intervals[k - 1].band;
    const bool below_next = k + 1 == m || intervals[k].band < intervals[k + 1].band;
    if (below_prev && below_next) valleys.push_back(k);
  }

  // Builds one run from sample `start` to sample `stop` whose interior
  // intervals are [lo, hi].
  auto make_run = [&](std::size_t start, std::size_t stop, std::size_t lo, std::size_t hi) {
    std::size_t peak = lo;
    auto interval_max = [&](std::size_t k) {
      double best = 0.0;
      for (std::size_t i = intervals[k].first; i <= intervals[k].last; ++i) {
        best = std::max(best, s[i].smoothed_kmh);
      }
      return best;
    };
    double peak_max = interval_max(lo);
    for (std::size_t k = lo + 1; k <= hi; ++k) {
      const double km = interval_max(k);
      if (intervals[k].band > intervals[peak].band ||
          (intervals[k].band == intervals[peak].band && km > peak_max)) {
        peak = k;
        peak_max = km;
      }
    }
    RunEffort run;
    run.player_id = signal.player_id;
    run.t_valley_end = s[start].t_ms;
    run.t_peak_start = s[intervals[peak].first].t_ms;
    run.t_peak_end = s[intervals[peak].last].t_ms;
    run.t_next_valley_start = s[stop].t_ms;
    run.origin = positions[start].xy;
    run.destination = positions[intervals[peak].last].xy;
    for (std::size_t i = start; i <= stop; ++i) run.peak_speed = std::max(run.peak_speed, s[i].smoothed_kmh);
    const std::size_t peak_end = intervals[peak].last;
    run.distance_total = integrated_distance(signal, start, peak_end);
    for (std::size_t i = start + 1; i <= peak_end; ++i) {
      if (s[i].smoothed_kmh >= config.bands.running_max) {
        run.distance_hi += s[i].raw_kmh / 3.6 * static_cast<double>(s[i].t_ms - s[i - 1].t_ms) / 1000.0;
      }
    }
    run.is_hi = run.peak_speed >= config.bands.running_max;
    runs.push_back(std::move(run));
  };

  if (valleys.front() > 0) {
    make_run(0, intervals[valleys.front()].first, 0, valleys.front() - 1);
  }
  for (std::size_t v = 0; v + 1 < valleys.size(); ++v) {
    const std::size_t a = valleys[v];
    const std::size_t b = valleys[v + 1];
    make_run(intervals[a].last, intervals[b].first, a + 1, b - 1);
  }
  if (valleys.back() + 1 < m) {
    make_run(intervals[valleys.back()].last, s.size() - 1, valleys.back() + 1, m - 1);
  }
  return runs;
}

} // namespace runlens
