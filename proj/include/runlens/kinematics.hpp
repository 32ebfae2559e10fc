#pragma once

// Per-player speed signals and their segmentation into valley-to-valley runs.

#include "runlens/core.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace runlens {

struct KinematicsConfig {
  int smoothing_window = 5;          // samples, centred
  double outlier_cap_kmh = 43.2;     // 12 m/s
  std::int64_t min_interval_ms = 500;
  std::int64_t max_gap_ms = 500;     // larger gaps split a track
  std::int64_t nominal_dt_ms = 100;
  std::int64_t min_signal_ms = 1000; // shorter signals yield no runs
  SpeedBands bands;

  void validate() const;
};

struct TrackSample {
  std::int64_t t_ms = 0;
  Point xy;
  bool interpolated = false;
};

/// Contiguous positions of one player within one period.
struct Track {
  std::string player_id;
  std::string team_id;
  Period period = Period::First;
  std::vector<TrackSample> samples;
};

/// Fills gaps of at most `max_gap_ms` by linear interpolation at the nominal
/// spacing and splits the series at larger gaps. Samples must be sorted by time.
std::vector<std::vector<TrackSample>> split_and_fill(std::span<const TrackSample> samples,
                                                     const KinematicsConfig& config = {});

struct SpeedSample {
  std::int64_t t_ms = 0;
  double raw_kmh = 0.0;
  double smoothed_kmh = 0.0;
  bool valid = true;
};

struct SpeedSignal {
  std::string player_id;
  std::vector<SpeedSample> samples;
};

/// Frame-to-frame speed magnitude, outlier treatment and centred smoothing.
/// Throws ValidationError for fewer than two samples or non-increasing times.
SpeedSignal compute_speed(std::string_view player_id, std::span<const TrackSample> positions,
                          const KinematicsConfig& config = {});

/// Marks raw speeds above the cap invalid, replaces them by linear
/// interpolation between the nearest valid neighbours (edges hold the nearest
/// valid value) and recomputes the smoothing. Throws if no sample is valid.
SpeedSignal treat_outliers(SpeedSignal signal, const KinematicsConfig& config = {});

/// Centred rolling mean of raw speeds, truncated at the series edges.
void smooth(SpeedSignal& signal, int window);

struct RunEffort {
  std::string player_id;
  std::int64_t t_valley_end = 0;
  std::int64_t t_peak_start = 0;
  std::int64_t t_peak_end = 0;
  std::int64_t t_next_valley_start = 0;
  Point origin;      // position at t_valley_end
  Point destination; // position at t_peak_end
  double peak_speed = 0.0;
  double distance_total = 0.0;
  double distance_hi = 0.0;
  bool is_hi = false;
};

/// Index range [first, last] of samples sharing one speed band.
struct SpeedInterval {
  std::size_t first = 0;
  std::size_t last = 0;
  int band = 0;
};

/// Maximal constant-band intervals after merging those shorter than
/// `min_interval_ms` into the neighbour with the closer band.
std::vector<SpeedInterval> speed_intervals(const SpeedSignal& signal,
                                           const KinematicsConfig& config = {});

/// Splits a smoothed, outlier-treated signal into runs delimited by valleys.
/// `positions` must be index-aligned with `signal.samples`.
std::vector<RunEffort> segment_runs(const SpeedSignal& signal, std::span<const TrackSample> positions,
                                    const KinematicsConfig& config = {});

/// Sum of per-sample displacement (treated raw speed times spacing) over
/// samples (first, last].
double integrated_distance(const SpeedSignal& signal, std::size_t first, std::size_t last);

} // namespace runlens
