#include "oracles.hpp"

#include "runlens/kinematics.hpp"

#include <doctest.h>

using namespace runlens;

namespace {

std::vector<TrackSample> random_walk(oracle::Rng& rng, int n, double max_step) {
  std::vector<TrackSample> out;
  Point p{50.0, 30.0};
  for (int i = 0; i < n; ++i) {
    out.push_back({i * 100, p, false});
    p = p + Point{rng.uniform(-max_step, max_step), rng.uniform(-max_step, max_step)};
  }
  return out;
}

/// Piecewise-constant speed with raw == smoothed, moving along +x.
struct Plateaus {
  SpeedSignal signal;
  std::vector<TrackSample> positions;
};

Plateaus plateaus(const std::vector<std::pair<int, double>>& steps) {
  Plateaus p;
  p.signal.player_id = "p";
  double x = 0.0;
  std::int64_t t = 0;
  for (const auto& [samples, kmh] : steps) {
    for (int i = 0; i < samples; ++i) {
      x += kmh / 3.6 * 0.1;
      p.signal.samples.push_back({t, kmh, kmh, true});
      p.positions.push_back({t, {x, 0.0}, false});
      t += 100;
    }
  }
  return p;
}

} // namespace

TEST_CASE("speed matches finite differences and a truncated centred mean") {
  oracle::Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const auto pos = random_walk(rng, rng.integer(2, 80), 0.6);
    const auto sig = compute_speed("p", pos);
    const std::size_t n = pos.size();
    std::vector<double> raw(n);
    for (std::size_t i = 1; i < n; ++i) raw[i] = distance(pos[i].xy, pos[i - 1].xy) / 0.1 * 3.6;
    raw[0] = raw[1];
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(sig.samples[i].raw_kmh == doctest::Approx(raw[i]).epsilon(1e-12));
      double sum = 0.0;
      int count = 0;
      for (std::ptrdiff_t k = static_cast<std::ptrdiff_t>(i) - 2; k <= static_cast<std::ptrdiff_t>(i) + 2; ++k) {
        if (k < 0 || k >= static_cast<std::ptrdiff_t>(n)) continue;
        sum += raw[static_cast<std::size_t>(k)];
        ++count;
      }
      CHECK(sig.samples[i].smoothed_kmh == doctest::Approx(sum / count).epsilon(1e-12));
    }
  }
}

TEST_CASE("outliers above the cap are interpolated from valid neighbours") {
  std::vector<TrackSample> pos;
  double x = 0.0;
  for (int i = 0; i < 10; ++i) {
    x += (i == 5 ? 2.0 : 0.5); // 72 km/h spike into sample 5, 18 km/h elsewhere
    pos.push_back({i * 100, {x, 0.0}, false});
  }
  const auto sig = compute_speed("p", pos);
  CHECK_FALSE(sig.samples[5].valid);
  CHECK(sig.samples[5].raw_kmh == doctest::Approx(18.0));
  for (const auto& s : sig.samples) CHECK(s.smoothed_kmh <= 43.2);
}

TEST_CASE("short gaps are filled and long gaps split the track") {
  std::vector<TrackSample> s{{0, {0, 0}, false}, {100, {1, 0}, false}, {400, {4, 0}, false},
                             {500, {5, 0}, false}, {1200, {9, 0}, false}, {1300, {10, 0}, false}};
  const auto pieces = split_and_fill(s);
  REQUIRE(pieces.size() == 2);
  REQUIRE(pieces[0].size() == 6);
  CHECK(pieces[0][2].interpolated);
  CHECK(pieces[0][2].xy.x == doctest::Approx(2.0));
  CHECK(pieces[0][3].t_ms == 300);
  CHECK(pieces[1].size() == 2);
}

TEST_CASE("merged speed intervals tile the signal and respect the minimum duration") {
  oracle::Rng rng(17);
  for (int trial = 0; trial < 200; ++trial) {
    SpeedSignal sig{"p", {}};
    const int n = rng.integer(1, 120);
    double v = rng.uniform(0.0, 30.0);
    for (int i = 0; i < n; ++i) {
      v = std::clamp(v + rng.normal(0.0, 3.0), 0.0, 35.0);
      sig.samples.push_back({i * 100, v, v, true});
    }
    const auto iv = speed_intervals(sig);
    REQUIRE_FALSE(iv.empty());
    CHECK(iv.front().first == 0);
    CHECK(iv.back().last == sig.samples.size() - 1);
    for (std::size_t k = 0; k < iv.size(); ++k) {
      if (k > 0) {
        CHECK(iv[k].first == iv[k - 1].last + 1);
        CHECK(iv[k].band != iv[k - 1].band);
      }
      if (iv.size() > 1) CHECK((iv[k].last - iv[k].first + 1) * 100 >= 500);
    }
  }
}

TEST_CASE("a sub-500 ms blip joins the neighbour with the closer band") {
  // walking, 300 ms running blip, jogging: running is closer to jogging.
  auto p = plateaus({{20, 3.0}, {3, 16.0}, {20, 10.0}});
  const auto iv = speed_intervals(p.signal);
  REQUIRE(iv.size() == 2);
  CHECK(iv[0].last == 19);
  CHECK(iv[1].band == static_cast<int>(SpeedCategory::Jogging));
}

TEST_CASE("runs are ordered valley-to-valley efforts") {
  oracle::Rng rng(23);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<std::pair<int, double>> steps;
    for (int k = 0; k < rng.integer(1, 12); ++k) steps.emplace_back(rng.integer(1, 40), rng.uniform(0.0, 32.0));
    const auto p = plateaus(steps);
    if (p.signal.samples.size() < 2) continue;
    const auto runs = segment_runs(p.signal, p.positions);
    for (std::size_t k = 0; k < runs.size(); ++k) {
      const auto& r = runs[k];
      CHECK(r.t_valley_end <= r.t_peak_start);
      CHECK(r.t_peak_start <= r.t_peak_end);
      CHECK(r.t_peak_end <= r.t_next_valley_start);
      if (k > 0) CHECK(r.t_valley_end >= runs[k - 1].t_next_valley_start);
      double peak = 0.0;
      for (const auto& s : p.signal.samples) {
        if (s.t_ms >= r.t_valley_end && s.t_ms <= r.t_next_valley_start) peak = std::max(peak, s.smoothed_kmh);
      }
      CHECK(r.peak_speed == peak);
      CHECK(r.is_hi == (r.peak_speed >= 21.0));
      CHECK(r.distance_hi <= r.distance_total + 1e-12);
    }
  }
}

TEST_CASE("the HI threshold is inclusive at 21 km/h") {
  for (const auto& [plateau, hi] : {std::pair{21.0, true}, std::pair{20.9, false}, std::pair{21.0001, true}}) {
    const auto p = plateaus({{20, 2.0}, {20, plateau}, {20, 2.0}});
    const auto runs = segment_runs(p.signal, p.positions);
    REQUIRE(runs.size() == 1);
    CHECK(runs[0].peak_speed == plateau);
    CHECK(runs[0].is_hi == hi);
    CHECK(runs[0].t_valley_end == 1900);
    CHECK(runs[0].t_peak_start == 2000);
    CHECK(runs[0].t_peak_end == 3900);
    CHECK(runs[0].t_next_valley_start == 4000);
  }
}

TEST_CASE("a flat signal has no runs and a short one is ignored") {
  auto flat = plateaus({{50, 4.0}});
  CHECK(segment_runs(flat.signal, flat.positions).empty());
  auto brief = plateaus({{3, 2.0}, {3, 25.0}, {3, 2.0}});
  CHECK(segment_runs(brief.signal, brief.positions).empty());
}
