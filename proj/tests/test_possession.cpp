#include "oracles.hpp"

#include <doctest.h>

using namespace runlens;

namespace {

Event ev(std::int64_t t, EventType type, const std::string& team) {
  return {t, Period::First, type, team, team + "1", {50.0, 34.0}, std::nullopt};
}

std::vector<PossessionSegment> segments_for(const Match& m) {
  const MatchIndex index(m);
  return segment_possessions(index);
}

bool same_spans(const std::vector<oracle::OwnerSpan>& a, const std::vector<oracle::OwnerSpan>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].team != b[i].team || a[i].t_start != b[i].t_start || a[i].t_end != b[i].t_end) return false;
  }
  return true;
}

} // namespace

TEST_CASE("the automaton agrees with the look-ahead replay on every short sequence") {
  // Symbols: A touch, B touch, ball out; each after a 1000 ms or 3000 ms gap.
  const std::int64_t t_end = 60000;
  const EventType types[] = {EventType::Pass, EventType::Pass, EventType::BallOut};
  const char* teams[] = {"A", "B", "A"};
  const std::int64_t gaps[] = {1000, 3000};
  std::size_t checked = 0, mismatches = 0;
  for (int len = 1; len <= 6; ++len) {
    int total = 1;
    for (int i = 0; i < len; ++i) total *= 6;
    for (int code = 0; code < total; ++code) {
      std::vector<Event> events;
      std::int64_t t = 0;
      int c = code;
      for (int i = 0; i < len; ++i) {
        const int sym = c % 6;
        c /= 6;
        t += gaps[sym / 3];
        events.push_back(ev(t, types[sym % 3], teams[sym % 3]));
      }
      const Match m = oracle::bare_match(t_end, events);
      const auto segs = segments_for(m);
      ++checked;
      if (!same_spans(oracle::owner_spans(segs), oracle::replay_possession(events, t_end))) ++mismatches;
    }
  }
  CHECK(checked == 55986);
  CHECK(mismatches == 0);
}

TEST_CASE("segments tile the period exactly") {
  oracle::Rng rng(8);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<Event> events;
    std::int64_t t = 0;
    const std::int64_t t_end = rng.integer(20, 120) * 1000;
    while (true) {
      t += rng.integer(1, 60) * 100;
      if (t >= t_end + 2000) break;
      const int k = rng.integer(0, 9);
      const EventType type = k < 7 ? EventType::Pass : (k == 7 ? EventType::Foul : (k == 8 ? EventType::ThrowIn : EventType::Substitution));
      events.push_back(ev(t, type, rng.chance(0.5) ? "A" : "B"));
    }
    const Match m = oracle::bare_match(t_end, events);
    const auto segs = segments_for(m);
    REQUIRE_FALSE(segs.empty());
    CHECK(segs.front().t_start == 0);
    CHECK(segs.back().t_end == t_end);
    std::int64_t total = 0;
    for (std::size_t i = 0; i < segs.size(); ++i) {
      CHECK(segs[i].t_end > segs[i].t_start);
      if (i > 0) CHECK(segs[i].t_start == segs[i - 1].t_end);
      total += segs[i].duration_ms();
    }
    CHECK(total == t_end);
  }
}

TEST_CASE("a single opponent touch inside the window is an instant regain") {
  const Match m = oracle::bare_match(30000, {ev(1000, EventType::Pass, "A"), ev(2000, EventType::Pass, "B"),
                                             ev(4000, EventType::Pass, "A")});
  const auto segs = segments_for(m);
  REQUIRE(segs.size() == 2);
  CHECK_FALSE(segs[0].team_id);
  CHECK(*segs[1].team_id == "A");
}

TEST_CASE("two consecutive opponent touches flip possession at the first") {
  const Match m = oracle::bare_match(30000, {ev(1000, EventType::Pass, "A"), ev(2000, EventType::Pass, "B"),
                                             ev(2500, EventType::Reception, "B")});
  const auto segs = segments_for(m);
  REQUIRE(segs.size() == 3);
  CHECK(*segs[2].team_id == "B");
  CHECK(segs[2].t_start == 2000);
  CHECK(segs[1].end_reason == EndReason::Turnover);
}

TEST_CASE("stoppages put the ball out of play until the next touch") {
  const Match m = oracle::bare_match(30000, {ev(1000, EventType::Pass, "A"), ev(5000, EventType::BallOut, "A"),
                                             ev(9000, EventType::ThrowIn, "B")});
  const auto segs = segments_for(m);
  REQUIRE(segs.size() == 4);
  CHECK(segs[1].end_reason == EndReason::BallOut);
  CHECK_FALSE(segs[2].team_id);
  CHECK(segs[2].t_start == 5000);
  CHECK(segs[2].t_end == 9000);
  CHECK(*segs[3].team_id == "B");
}

TEST_CASE("unordered events are rejected") {
  const Match m = oracle::bare_match(30000, {ev(5000, EventType::Pass, "A"), ev(1000, EventType::Pass, "B")});
  CHECK_THROWS_AS(segments_for(m), ValidationError);
}

TEST_CASE("block height labels") {
  const PitchSpec pitch;
  // Canonical: the defenders protect x = 105.
  const std::vector<Point> low{{90, 10}, {92, 30}, {90, 50}, {80, 20}, {78, 45}, {70, 34}};
  const std::vector<Point> medium{{85, 10}, {88, 30}, {85, 50}, {60, 20}, {58, 45}, {45, 34}};
  const std::vector<Point> high{{50, 10}, {48, 30}, {50, 55}, {30, 20}, {28, 45}, {20, 34}, {25, 60}};
  CHECK(frame_defense_label(low, pitch) == DefenseType::LowBlock);
  CHECK(frame_defense_label(medium, pitch) == DefenseType::MediumBlock);
  CHECK(frame_defense_label(high, pitch) == DefenseType::HighPressure);
  CHECK_FALSE(frame_defense_label(std::vector<Point>{{1, 1}, {2, 2}}, pitch));
}
