#pragma once

// Scratch directories and synthetic match helpers shared by the test binaries.

#include "oracles.hpp"

#include "runlens/ingest.hpp"
#include "runlens/store.hpp"
#include "runlens/synth.hpp"

#include <cstdio>
#include <filesystem>
#include <string>

namespace support {

inline std::filesystem::path scratch(const std::string& name) {
  const auto p = std::filesystem::temp_directory_path() / ("runlens_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

inline runlens::synth::Output synth_match(const std::string& fixture, const std::string& match_id,
                                          std::uint64_t seed) {
  auto script = runlens::synth::read_script(std::string(RUNLENS_FIXTURES_DIR) + "/" + fixture);
  script.match_id = match_id;
  script.seed = seed;
  return runlens::synth::generate(script);
}

/// Writes a synthetic match under `root/match_id` and returns the directory.
inline std::filesystem::path write_synth(const std::filesystem::path& root, const std::string& fixture,
                                         const std::string& match_id, std::uint64_t seed) {
  const auto dir = root / match_id;
  runlens::write_match(synth_match(fixture, match_id, seed).match, dir);
  return dir;
}

inline runlens::MatchArtifacts as_artifacts(const runlens::MatchSummary& s) {
  runlens::MatchArtifacts a;
  a.match_id = s.match_id;
  a.runs = s.runs;
  a.samples = s.samples;
  a.actions = s.actions;
  a.ledger = s.ledger;
  return a;
}

/// Teams H and A with eleven players each over five matches of 100 minutes
/// (500 role minutes), plus H12 on 400 minutes. Movement counts vary by
/// player so rates and percentiles differ.
inline std::vector<runlens::MatchSummary> constructed_season() {
  using runlens::Role;
  const Role roles[] = {Role::Goalkeeper, Role::CentralDefender, Role::CentralDefender, Role::FullBack,
                        Role::FullBack,   Role::DefensiveMidfielder, Role::Midfielder, Role::Midfielder,
                        Role::Midfielder, Role::Winger,           Role::Striker};
  std::vector<runlens::MatchSummary> season;
  for (int g = 0; g < 5; ++g) {
    std::vector<oracle::PlayerSpec> specs;
    for (const std::string team : {"H", "A"}) {
      for (int i = 0; i < 11; ++i) {
        char id[8];
        std::snprintf(id, sizeof(id), "%s%02d", team.c_str(), i + 1);
        oracle::PlayerSpec p{id, team, roles[i], 3600.0, 2400.0, {}};
        const int base = team == "H" ? i : 2 * i;
        p.movements = {base + g % 2, i % 3, (base + 1) / 2, i == 0 ? 0 : 1, g, 2};
        specs.push_back(p);
      }
    }
    specs.push_back({"H12", "H", Role::Striker, g < 4 ? 3600.0 : 0.0, g < 4 ? 2400.0 : 0.0, {4, 0, 0, 0, 0, 0}});
    auto s = oracle::constructed_summary("c" + std::to_string(g + 1), specs);
    s.ledger.duration_s = 6000.0;
    for (const std::string team : {"H", "A"}) {
      runlens::TeamLedger t;
      t.team_id = team;
      t.in_possession_s = team == "H" ? 3600.0 : 2400.0;
      t.out_of_possession_s = team == "H" ? 2400.0 : 3600.0;
      t.distance_in = 30000.0 + 1000.0 * g;
      t.distance_out = 25000.0;
      t.hi_distance_in = 2000.0 + (team == "H" ? 300.0 : 0.0);
      t.hi_distance_out = 1500.0 + 100.0 * g;
      t.direct_play_s = 300.0;
      t.high_press_s = team == "H" ? 400.0 : 100.0;
      t.xg_for = team == "H" ? 1.4 : 0.9;
      t.xg_against = team == "H" ? 0.9 : 1.4;
      s.ledger.teams.push_back(t);
    }
    season.push_back(std::move(s));
  }
  return season;
}

/// Writes constructed_season() into a fresh store at `root`.
inline void write_constructed_store(const std::filesystem::path& root) {
  auto store = runlens::Store::open_or_create(root, runlens::Config{});
  for (const auto& s : constructed_season()) store.record(as_artifacts(s), nullptr);
  store.save();
}

} // namespace support
