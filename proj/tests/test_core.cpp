#include "oracles.hpp"

#include "runlens/config.hpp"
#include "runlens/ingest.hpp"
#include "runlens/table.hpp"

#include <doctest.h>

#include <filesystem>
#include <set>
#include <sstream>

using namespace runlens;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("runlens_core_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

Match two_player_match(std::int64_t frames, std::int64_t dt = 100) {
  Match m;
  m.meta.match_id = "m";
  m.meta.teams = {TeamInfo{"h", "Home", 1, {{"h1", "", false}}, 1.2}, TeamInfo{"a", "Away", -1, {{"a1", "", true}}, 0.4}};
  for (std::int64_t i = 0; i < frames; ++i) {
    Frame f;
    f.t_ms = i * dt;
    f.ball = {50.0, 30.0};
    f.in_play = true;
    f.players = {{"h1", "h", {10.0 + 0.1 * static_cast<double>(i), 20.0}}, {"a1", "a", {90.0, 34.0}}};
    m.frames.push_back(f);
  }
  m.events.push_back({500, Period::First, EventType::Pass, "h", "h1", {10.0, 20.0}, Point{30.0, 20.0}});
  apply_directions(m.frames, m.meta);
  return m;
}

} // namespace

TEST_CASE("speed categories use lower-inclusive bands") {
  CHECK(speed_category(5.999) == SpeedCategory::Walking);
  CHECK(speed_category(6.0) == SpeedCategory::Jogging);
  CHECK(speed_category(13.99) == SpeedCategory::Jogging);
  CHECK(speed_category(14.0) == SpeedCategory::Running);
  CHECK(speed_category(20.9) == SpeedCategory::Running);
  CHECK(speed_category(21.0) == SpeedCategory::Sprinting);
  CHECK_THROWS_AS(speed_category(-0.1), ValidationError);
}

TEST_CASE("canonical coordinates reflect through the centre") {
  const PitchSpec pitch;
  const Point p{10.0, 5.0};
  CHECK(canonical(p, 1, pitch) == p);
  const Point r = canonical(p, -1, pitch);
  CHECK(r.x == doctest::Approx(95.0));
  CHECK(r.y == doctest::Approx(63.0));
  CHECK(canonical(r, -1, pitch) == p);
}

TEST_CASE("directions swap at half time") {
  MatchMeta meta;
  meta.teams = {TeamInfo{"h", "", 1, {}, std::nullopt}, TeamInfo{"a", "", -1, {}, std::nullopt}};
  CHECK(meta.direction("h", Period::First) == 1);
  CHECK(meta.direction("h", Period::Second) == -1);
  CHECK(meta.direction("a", Period::Second) == 1);
  CHECK(meta.opponent("h") == "a");
}

TEST_CASE("tracking, events and meta round-trip through the file formats") {
  const Match m = two_player_match(20);
  const fs::path dir = scratch("roundtrip");
  write_match(m, dir);
  const Bundle b = ingest(MatchFiles::in(dir));
  CHECK(b.match.frames == m.frames);
  CHECK(b.match.events == m.events);
  CHECK(b.match.meta == m.meta);
  CHECK(b.report.clean());
  CHECK(b.report.sequences == 1);
}

TEST_CASE("a malformed tracking line is reported with its number") {
  const Match m = two_player_match(5);
  const fs::path dir = scratch("badline");
  write_match(m, dir);
  std::string text = read_file(dir / "tracking.jsonl");
  std::istringstream lines(text);
  std::string out, line;
  for (int i = 1; std::getline(lines, line); ++i) out += (i == 3 ? std::string("{\"t\": oops}") : line) + "\n";
  write_file(dir / "tracking.jsonl", out);
  try {
    ingest(MatchFiles::in(dir));
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
    CHECK(std::string(e.what()).find("tracking.jsonl") != std::string::npos);
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
}

TEST_CASE("a one-second tracking gap splits the sequence with a warning") {
  Match m = two_player_match(30);
  // Frames 10..19 removed: a 1100 ms jump between t=900 and t=2000.
  m.frames.erase(m.frames.begin() + 10, m.frames.begin() + 20);
  const LintReport r = lint(m);
  CHECK(r.sequences == 2);
  CHECK_FALSE(r.has_errors());
  REQUIRE(r.issues.size() == 1);
  CHECK(r.issues[0].code == "sequence_split");
  CHECK(r.issues[0].severity == LintIssue::Severity::Warning);
}

TEST_CASE("gap splitting matches a direct count of oversize gaps") {
  oracle::Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    Match m = two_player_match(1);
    m.frames.clear();
    std::int64_t t = 0;
    std::size_t expected = 1;
    for (int i = 0; i < 60; ++i) {
      Frame f;
      f.t_ms = t;
      f.players = {{"h1", "h", {50.0, 30.0}}};
      m.frames.push_back(f);
      const std::int64_t gap = rng.chance(0.1) ? rng.integer(2, 15) * 100 : 100;
      if (i + 1 < 60 && gap > 500) ++expected;
      t += gap;
    }
    CHECK(lint(m).sequences == expected);
  }
}

TEST_CASE("lint flags duplicate players, unknown teams and off-pitch points") {
  Match m = two_player_match(3);
  m.frames[1].players.push_back({"h1", "h", {10.0, 20.0}});
  m.frames[2].players.push_back({"x9", "zz", {200.0, 20.0}});
  const LintReport r = lint(m);
  CHECK(r.has_errors());
  std::set<std::string> codes;
  for (const auto& i : r.issues) codes.insert(i.code);
  CHECK(codes == std::set<std::string>{"duplicate_player", "unknown_team", "out_of_bounds"});
}

TEST_CASE("CSV tables round-trip doubles exactly and quote awkward fields") {
  oracle::Rng rng(3);
  Table t;
  t.columns = {"name", "value", "flag", "missing"};
  std::vector<double> values;
  for (int i = 0; i < 200; ++i) {
    const double v = rng.normal(0.0, 1.0) * std::pow(10.0, rng.integer(-8, 8));
    values.push_back(v);
    t.rows.push_back({std::string(i % 7 == 0 ? "a,\"b\"" : "plain"), v, i % 2 == 0, std::monostate{}});
  }
  const CsvReader csv(t.to_csv());
  REQUIRE(csv.size() == values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    CHECK(csv.number(i, "value") == values[i]);
    CHECK(csv.flag(i, "flag") == (i % 2 == 0));
    CHECK_FALSE(csv.opt_number(i, "missing").has_value());
  }
  CHECK(csv.get(0, "name") == "a,\"b\"");
}

TEST_CASE("config round-trips, hashes stably and rejects unknown keys") {
  Config c;
  c.kinematics.smoothing_window = 7;
  c.aggregation.min_role_minutes = 300.0;
  const Config back = config_from_json(config_to_json(c));
  CHECK(config_hash(back) == config_hash(c));
  CHECK(back.kinematics.smoothing_window == 7);
  CHECK(config_hash(Config{}) != config_hash(c));

  auto j = config_to_json(c);
  j["kinematics"]["smoothing"] = 3;
  CHECK_THROWS_AS(config_from_json(j), ValidationError);
  auto k = config_to_json(c);
  k["nonsense"] = 1;
  CHECK_THROWS_AS(config_from_json(k), ValidationError);
}

TEST_CASE("sha256 matches a published digest") {
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}
