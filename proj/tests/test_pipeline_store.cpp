#include "support.hpp"

#include "runlens/batch.hpp"
#include "runlens/pipeline.hpp"
#include "runlens/store.hpp"

#include <doctest.h>

#include <fstream>

using namespace runlens;
namespace fs = std::filesystem;

namespace {

const MatchArtifacts& short_artifacts() {
  static const MatchArtifacts a = [] {
    auto out = support::synth_match("auto_short.json", "s1", 7);
    sort_match(out.match);
    return run_pipeline(out.match, Config{});
  }();
  return a;
}

std::int64_t ms(double s) { return std::llround(s * 1000.0); }

} // namespace

TEST_CASE("run ids sort by time within a player") {
  CHECK(run_id("m", "p", Period::Second, 1200) == "m/p/2/0000001200");
  CHECK(run_id("m", "p", Period::First, 900) < run_id("m", "p", Period::First, 10000));
}

TEST_CASE("the ledger conserves time for every team and player") {
  const auto& a = short_artifacts();
  const auto& l = a.ledger;
  CHECK(l.duration_s == doctest::Approx(1200.0));
  CHECK(l.conserves(1e-9));
  REQUIRE(l.teams.size() == 2);
  // Integer milliseconds: one team's possession is the other's defending time.
  CHECK(ms(l.teams[0].in_possession_s) == ms(l.teams[1].out_of_possession_s));
  CHECK(ms(l.teams[1].in_possession_s) == ms(l.teams[0].out_of_possession_s));
  CHECK(ms(l.teams[0].out_of_play_s) == ms(l.teams[1].out_of_play_s));

  std::int64_t tiled = 0;
  for (const auto& s : a.segments) tiled += s.duration_ms();
  CHECK(tiled == 1200000);

  for (const auto& t : l.teams) {
    double minute_out = 0.0, minute_dist = 0.0;
    for (const auto& m : l.minutes) {
      if (m.team_id != t.team_id) continue;
      minute_out += m.out_of_possession_s;
      minute_dist += m.distance;
    }
    CHECK(minute_out == doctest::Approx(t.out_of_possession_s));
    CHECK(minute_dist == doctest::Approx(t.distance_out));
    CHECK(t.hi_distance_in <= t.distance_in);
    CHECK(t.defense_labelled_s <= t.out_of_possession_s + 1e-9);
  }
  for (const auto& p : l.players) CHECK(p.total_s() <= l.duration_s + 1e-9);
}

TEST_CASE("runs carry context consistent with their phase") {
  const auto& a = short_artifacts();
  REQUIRE_FALSE(a.runs.empty());
  std::size_t classified = 0;
  for (const auto& r : a.runs) {
    if (r.phase != Phase::InPossession) CHECK_FALSE(r.movement);
    if (r.phase == Phase::OutOfPlay) CHECK_FALSE(r.attack_type);
    if (r.movement) {
      ++classified;
      CHECK(r.origin_zone);
      CHECK(r.destination_zone);
      CHECK(*r.origin_zone != Zone::Back);
    }
  }
  CHECK(classified > 0);
  CHECK_FALSE(a.samples.empty());
  for (std::size_t i = 1; i < a.samples.size(); ++i) CHECK(a.samples[i - 1].run_id < a.samples[i].run_id);
}

TEST_CASE("thread count does not change the artifacts") {
  auto out = support::synth_match("auto_short.json", "s1", 7);
  sort_match(out.match);
  PipelineOptions four;
  four.threads = 4;
  const auto b = run_pipeline(out.match, Config{}, four);
  const auto& a = short_artifacts();
  CHECK(runs_table(a.runs).to_csv() == runs_table(b.runs).to_csv());
  CHECK(samples_table(a.samples).to_csv() == samples_table(b.samples).to_csv());
  CHECK(ledger_to_json(a.ledger) == ledger_to_json(b.ledger));
}

TEST_CASE("the store round-trips every artifact exactly") {
  const auto root = support::scratch("store_roundtrip");
  const auto& a = short_artifacts();
  {
    auto store = Store::open_or_create(root, Config{});
    store.record(a, nlohmann::json{{"issues", nlohmann::json::array()}});
    store.save();
  }
  const auto store = Store::open(root);
  REQUIRE(store.entries().size() == 1);
  const auto& e = store.entries()[0];
  CHECK(e.ok);
  CHECK(e.artifacts.size() == kArtifactKinds.size());
  for (auto kind : kArtifactKinds) CHECK(e.artifacts.contains(std::string(kind)));
  CHECK(store.verify().empty());

  const auto s = store.load_summary(e);
  const auto original = a.summary();
  CHECK(runs_table(s.runs).to_csv() == runs_table(original.runs).to_csv());
  CHECK(samples_table(s.samples).to_csv() == samples_table(original.samples).to_csv());
  CHECK(actions_table(s.actions).to_csv() == actions_table(original.actions).to_csv());
  CHECK(ledger_to_json(s.ledger) == ledger_to_json(original.ledger));
  for (std::size_t i = 0; i < s.samples.size(); ++i) CHECK(s.samples[i].epv_added == original.samples[i].epv_added);

  const auto segs = segments_from_json(segments_to_json(a.segments));
  CHECK(segments_to_json(segs) == segments_to_json(a.segments));
  CHECK(roles_to_json(roles_from_json(roles_to_json(a.roles))) == roles_to_json(a.roles));

  std::ofstream(store.match_dir("s1") / "runs.csv", std::ios::app) << "tampered\n";
  const auto bad = store.verify();
  REQUIRE(bad.size() == 1);
  CHECK(bad[0].find("runs.csv") != std::string::npos);
}

TEST_CASE("a store refuses a different config") {
  const auto root = support::scratch("store_config");
  Store::open_or_create(root, Config{}).save();
  Config other;
  other.aggregation.min_role_minutes = 300.0;
  CHECK_THROWS_AS(Store::open_or_create(root, other), StoreError);
  CHECK_NOTHROW(Store::open_or_create(root, Config{}));
  CHECK_THROWS_AS(Store::open(support::scratch("store_missing")), StoreError);
}

TEST_CASE("match ids must be usable as directory names") {
  CHECK_THROWS_AS(check_match_id(""), ValidationError);
  CHECK_THROWS_AS(check_match_id(".."), ValidationError);
  CHECK_THROWS_AS(check_match_id("a/b"), ValidationError);
  CHECK_NOTHROW(check_match_id("2024-05-01_H_A"));
}

TEST_CASE("a corrupt match is recorded as failed while the others complete") {
  const auto root = support::scratch("batch");
  const auto good1 = support::write_synth(root / "in", "auto_short.json", "g1", 1);
  const auto good2 = support::write_synth(root / "in", "auto_short.json", "g2", 2);
  const auto broken = support::write_synth(root / "in", "auto_short.json", "g3", 3);
  std::ofstream(broken / "events.json") << "[{\"t\": ";

  auto store = Store::open_or_create(root / "store", Config{});
  const auto outcomes = process_matches({good1, broken, good2}, store, 2);
  REQUIRE(outcomes.size() == 3);
  CHECK(outcomes[0].ok);
  CHECK_FALSE(outcomes[1].ok);
  CHECK(outcomes[1].error.find("events.json") != std::string::npos);
  CHECK(outcomes[2].ok);

  const auto reopened = Store::open(root / "store");
  REQUIRE(reopened.entries().size() == 3);
  const auto* failed = reopened.entry("g3");
  REQUIRE(failed != nullptr);
  CHECK_FALSE(failed->ok);
  CHECK_FALSE(fs::exists(reopened.match_dir("g3")));
  CHECK(reopened.load_summaries().size() == 2);

  // Same inputs into a fresh store give byte-identical artifacts.
  auto again = Store::open_or_create(root / "store2", Config{});
  process_matches({good2, good1}, again, 1);
  for (const char* id : {"g1", "g2"}) CHECK(again.entry(id)->artifacts == reopened.entry(id)->artifacts);
}
