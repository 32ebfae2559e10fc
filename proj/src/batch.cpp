#include "runlens/batch.hpp"

#include <atomic>
#include <mutex>
#include <thread>

namespace runlens {

LintOptions lint_options(const Config& config) {
  LintOptions o;
  o.nominal_dt_ms = config.kinematics.nominal_dt_ms;
  o.max_gap_ms = config.kinematics.max_gap_ms;
  o.tolerance_m = config.event_tolerance_m;
  return o;
}

std::vector<BatchOutcome> process_matches(const std::vector<std::filesystem::path>& dirs, Store& store, unsigned jobs) {
  const Config& config = store.config();
  std::vector<BatchOutcome> out(dirs.size());
  const unsigned workers = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(std::max<std::size_t>(dirs.size(), 1))));
  const unsigned inner = std::max(1u, jobs / workers);
  std::mutex store_mutex;
  std::atomic<std::size_t> next{0};

  auto one = [&](std::size_t k) {
    BatchOutcome& o = out[k];
    o.source = dirs[k].string();
    nlohmann::json lint_json = nullptr;
    try {
      Bundle b = ingest(MatchFiles::in(dirs[k]), lint_options(config));
      o.match_id = b.match.meta.match_id;
      check_match_id(o.match_id);
      lint_json = b.report.to_json();
      if (b.report.has_errors()) throw ValidationError("lint errors");
      std::optional<TableEpv> table;
      PipelineOptions opts;
      opts.threads = inner;
      if (config.epv != "surrogate") {
        table = TableEpv::from_file(dirs[k] / config.epv);
        opts.epv = &*table;
      }
      const MatchArtifacts a = run_pipeline(b.match, config, opts);
      std::lock_guard lock(store_mutex);
      store.record(a, lint_json);
      o.ok = true;
    } catch (const std::exception& e) {
      o.error = e.what();
      if (o.match_id.empty()) o.match_id = dirs[k].filename().string();
      std::lock_guard lock(store_mutex);
      try {
        store.record_failure(o.match_id, o.error, lint_json);
      } catch (const std::exception&) {
      }
    }
  };

  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t k = next++; k < dirs.size(); k = next++) one(k);
    });
  }
  for (auto& t : pool) t.join();
  store.save();
  return out;
}

} // namespace runlens
