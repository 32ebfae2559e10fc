#pragma once

// Ingest and process many match directories into a store with a worker pool.
// A failing match is recorded and the others proceed.

#include "runlens/ingest.hpp"
#include "runlens/store.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace runlens {

LintOptions lint_options(const Config& config);

struct BatchOutcome {
  std::string source;   // match directory
  std::string match_id; // empty when the meta could not be read
  bool ok = false;
  std::string error;
};

/// Processes `dirs` (each holding tracking.jsonl, events.json, meta.json) and
/// saves the manifest. `jobs` workers split over matches; leftover workers go
/// to per-player kinematics.
std::vector<BatchOutcome> process_matches(const std::vector<std::filesystem::path>& dirs, Store& store, unsigned jobs);

} // namespace runlens
