#include "oracles.hpp"

#include "runlens/kinematics.hpp"
#include "runlens/synth.hpp"

#include <doctest.h>

using namespace runlens;

namespace {

synth::Script sprint_script(std::vector<synth::Effort> efforts, std::int64_t period_ms = 30000) {
  synth::Script s;
  s.match_id = "sprints";
  s.periods_ms = {period_ms};
  s.teams = {TeamInfo{"A", "A", 1, {{"a1", "", false}}, std::nullopt},
             TeamInfo{"B", "B", -1, {{"b1", "", false}}, std::nullopt}};
  synth::PlayerDirective d;
  d.player_id = "a1";
  d.path = {{2.0, 34.0}, {103.0, 34.0}};
  d.efforts = std::move(efforts);
  s.players.push_back(d);
  return s;
}

/// Scripted speed of a chain of trapezoidal efforts at time t (ms).
double trapezoid_speed(const std::vector<synth::Effort>& efforts, double t) {
  double v = efforts.front().base_kmh;
  for (const auto& e : efforts) {
    const double rate = e.accel * 3.6 / 1000.0;
    const double t0 = static_cast<double>(e.start_ms);
    const double up = t0 + std::abs(e.cruise_kmh - e.base_kmh) / rate;
    const double hold = up + static_cast<double>(e.hold_ms);
    const double down = hold + std::abs(e.cruise_kmh - e.end_kmh) / rate;
    if (t < t0) return v;
    if (t < up) return e.base_kmh + (e.cruise_kmh - e.base_kmh) * (t - t0) / (up - t0);
    if (t < hold) return e.cruise_kmh;
    if (t < down) return e.cruise_kmh + (e.end_kmh - e.cruise_kmh) * (t - hold) / (down - hold);
    v = e.end_kmh;
  }
  return v;
}

const std::vector<synth::Effort> kEfforts{{3000, 2.0, 24.0, 2000, 2.0, 3.0},
                                          {12000, 2.0, 16.0, 1500, 2.0, 2.5},
                                          {20000, 2.0, 21.5, 1000, 2.0, 3.0}};

} // namespace

TEST_CASE("generated positions reproduce the scripted speeds") {
  const auto out = synth::generate(sprint_script(kEfforts));
  REQUIRE(out.match.frames.size() == 300);
  std::vector<TrackSample> track;
  for (const auto& f : out.match.frames) track.push_back({f.t_ms, f.find("a1")->xy, false});
  const auto sig = compute_speed("a1", track);
  double worst = 0.0;
  for (std::size_t i = 1; i < sig.samples.size(); ++i) {
    const double expected = trapezoid_speed(kEfforts, static_cast<double>(sig.samples[i].t_ms) - 50.0);
    worst = std::max(worst, std::abs(sig.samples[i].raw_kmh - expected));
  }
  CHECK(worst < 0.3);
}

TEST_CASE("truth runs describe the band crossings of each effort") {
  const auto out = synth::generate(sprint_script(kEfforts));
  REQUIRE(out.truth.runs.size() == 3);
  const auto& r0 = out.truth.runs[0];
  const double rate = 3.0 * 3.6 / 1000.0;
  CHECK(r0.t_valley_end == doctest::Approx(3000.0 + 4.0 / rate));
  CHECK(r0.t_peak_start == doctest::Approx(3000.0 + 19.0 / rate));
  CHECK(r0.peak_kmh == 24.0);
  CHECK(r0.is_hi);
  CHECK_FALSE(out.truth.runs[1].is_hi);
  CHECK(out.truth.runs[2].is_hi);
  for (const auto& r : out.truth.runs) {
    CHECK(r.t_valley_end < r.t_peak_start);
    CHECK(r.t_peak_start < r.t_peak_end);
    CHECK(r.t_peak_end < r.t_next_valley_start);
  }
}

TEST_CASE("detected runs land on the truth runs") {
  const auto out = synth::generate(sprint_script(kEfforts));
  std::vector<TrackSample> track;
  for (const auto& f : out.match.frames) track.push_back({f.t_ms, f.find("a1")->xy, false});
  const auto runs = segment_runs(compute_speed("a1", track), track);
  REQUIRE(runs.size() == out.truth.runs.size());
  for (std::size_t k = 0; k < runs.size(); ++k) {
    const auto& t = out.truth.runs[k];
    CHECK(std::abs(static_cast<double>(runs[k].t_valley_end) - t.t_valley_end) <= 200.0);
    CHECK(std::abs(static_cast<double>(runs[k].t_next_valley_start) - t.t_next_valley_start) <= 200.0);
    CHECK(runs[k].is_hi == t.is_hi);
    CHECK(std::abs(runs[k].peak_speed - t.peak_kmh) <= 0.5);
  }
}

TEST_CASE("script violations are named") {
  auto jump = kEfforts;
  jump[1].base_kmh = 5.0;
  CHECK_THROWS_WITH_AS(synth::generate(sprint_script(jump)), doctest::Contains("discontinuity"), ValidationError);

  auto overlap = kEfforts;
  overlap[1].start_ms = 4000;
  CHECK_THROWS_WITH_AS(synth::generate(sprint_script(overlap)), doctest::Contains("overlaps"), ValidationError);

  CHECK_THROWS_WITH_AS(synth::generate(sprint_script(kEfforts, 120000)), doctest::Contains("shorter"),
                       ValidationError);

  auto stranger = sprint_script(kEfforts);
  stranger.players[0].player_id = "zz";
  CHECK_THROWS_WITH_AS(synth::generate(stranger), doctest::Contains("roster"), ValidationError);

  auto odd = sprint_script(kEfforts);
  odd.periods_ms = {30050};
  CHECK_THROWS_AS(synth::generate(odd), ValidationError);
}

TEST_CASE("automatic matches are deterministic and their truth tiles the periods") {
  auto script = synth::read_script(RUNLENS_FIXTURES_DIR "/auto_short.json");
  const auto a = synth::generate(script);
  const auto b = synth::generate(script);
  CHECK(a.match.frames == b.match.frames);
  CHECK(a.match.events == b.match.events);

  script.seed += 1;
  const auto c = synth::generate(script);
  CHECK_FALSE(c.match.frames == a.match.frames);

  for (std::size_t pi = 0; pi < script.periods_ms.size(); ++pi) {
    const Period period = period_from_int(static_cast<int>(pi) + 1);
    std::int64_t t = 0;
    for (const auto& p : a.truth.possessions) {
      if (p.period != period) continue;
      CHECK(p.t_start == t);
      CHECK(p.t_end > p.t_start);
      t = p.t_end;
    }
    CHECK(t == script.periods_ms[pi]);
  }
  CHECK(a.truth.roles.size() == 22);
  CHECK(a.truth.sprints > 0);
  for (const auto& f : a.match.frames) CHECK(f.players.size() == 22);
}
