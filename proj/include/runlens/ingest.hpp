#pragma once

// Loading a match from the open file formats, with a lint report.

#include "runlens/match.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace runlens {

struct LintIssue {
  enum class Severity { Warning, Error };
  Severity severity = Severity::Warning;
  std::string code; // frame_gap, sequence_split, duplicate_player, team_size, out_of_bounds, ...
  std::string message;
};

struct LintReport {
  std::vector<LintIssue> issues;
  std::size_t frames = 0;
  std::size_t events = 0;
  std::size_t sequences = 0; // contiguous frame runs after splitting at large gaps

  bool clean() const { return issues.empty(); }
  bool has_errors() const;
  nlohmann::json to_json() const;
};

struct LintOptions {
  std::int64_t nominal_dt_ms = 100;
  std::int64_t max_gap_ms = 500;
  double tolerance_m = 2.0;
  std::size_t max_issues_per_code = 20; // further issues are counted, not listed
};

LintReport lint(const Match& match, const LintOptions& options = {});

/// Standard file names inside a match directory.
struct MatchFiles {
  std::filesystem::path tracking; // tracking.jsonl
  std::filesystem::path events;   // events.json
  std::filesystem::path meta;     // meta.json

  static MatchFiles in(const std::filesystem::path& dir);
};

struct Bundle {
  Match match;
  LintReport report;
};

/// Parses, sorts and lints one match. Malformed input raises ParseError or
/// ValidationError naming the file.
Bundle ingest(const MatchFiles& files, const LintOptions& options = {});

/// Fast reader for the tracking format; same contract as read_tracking.
std::vector<Frame> read_tracking_file(const std::filesystem::path& path);

/// Writes a match in the standard layout.
void write_match(const Match& match, const std::filesystem::path& dir);

} // namespace runlens
