#pragma once

// On-disk artifact store: one directory per match plus a manifest holding the
// config, its hash and the sha256 of every artifact.
//
//   <root>/manifest.json
//   <root>/matches/<match_id>/{runs.csv,segments.json,roles.json,samples.csv,ledger.json,actions.csv}

#include "runlens/pipeline.hpp"
#include "runlens/table.hpp"

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

namespace runlens {

inline constexpr int kStoreVersion = 1;
inline constexpr std::array<std::string_view, 6> kArtifactKinds{
    "runs.csv", "segments.json", "roles.json", "samples.csv", "ledger.json", "actions.csv"};

Table runs_table(std::span<const ContextualizedRun> runs);
std::vector<ContextualizedRun> runs_from_csv(std::string_view text);
Table samples_table(std::span<const RunValueSample> samples);
std::vector<RunValueSample> samples_from_csv(std::string_view text);
Table actions_table(std::span<const OnBallAction> actions);
std::vector<OnBallAction> actions_from_csv(std::string_view text);

nlohmann::json segments_to_json(std::span<const PossessionSegment> segments);
std::vector<PossessionSegment> segments_from_json(const nlohmann::json& j);
nlohmann::json roles_to_json(const RoleTimeline& roles);
RoleTimeline roles_from_json(const nlohmann::json& j);
nlohmann::json ledger_to_json(const EffectiveTimeLedger& ledger);
EffectiveTimeLedger ledger_from_json(const nlohmann::json& j);

struct StoreEntry {
  std::string match_id;
  bool ok = false;
  std::string error;
  nlohmann::json lint;                       // lint report, or null
  std::map<std::string, std::size_t> discarded;
  std::map<std::string, std::string> artifacts; // kind -> sha256
};

class StoreError : public Error {
public:
  using Error::Error;
};

class Store {
public:
  /// Opens an existing store built with the same config, or creates one.
  /// Throws StoreError when the manifest records a different config hash.
  static Store open_or_create(const std::filesystem::path& root, const Config& config);
  /// Opens an existing store with the config recorded in its manifest.
  static Store open(const std::filesystem::path& root);

  const std::filesystem::path& root() const { return root_; }
  const Config& config() const { return config_; }
  const std::string& config_hash() const { return hash_; }
  const std::vector<StoreEntry>& entries() const { return entries_; }
  const StoreEntry* entry(std::string_view match_id) const;
  std::filesystem::path match_dir(std::string_view match_id) const;

  /// Writes the six artifacts and replaces the match's entry (not the manifest).
  void record(const MatchArtifacts& artifacts, const nlohmann::json& lint);
  void record_failure(const std::string& match_id, const std::string& error, const nlohmann::json& lint = nullptr);
  /// Writes manifest.json with entries sorted by match id.
  void save() const;

  MatchSummary load_summary(const StoreEntry& entry) const;
  /// Summaries of every successful match, sorted by match id.
  std::vector<MatchSummary> load_summaries() const;
  /// Recomputes artifact hashes; returns the mismatches.
  std::vector<std::string> verify() const;

private:
  Store(std::filesystem::path root, Config config);
  std::filesystem::path root_;
  Config config_;
  std::string hash_;
  std::vector<StoreEntry> entries_;
};

/// Rejects ids that cannot serve as a directory name.
void check_match_id(std::string_view match_id);

} // namespace runlens
