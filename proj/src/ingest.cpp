#include "runlens/ingest.hpp"

#include "runlens/formats.hpp"

#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace runlens {

using nlohmann::json;

bool LintReport::has_errors() const {
  return std::any_of(issues.begin(), issues.end(),
                     [](const LintIssue& i) { return i.severity == LintIssue::Severity::Error; });
}

json LintReport::to_json() const {
  json list = json::array();
  for (const auto& i : issues) {
    list.push_back({{"severity", i.severity == LintIssue::Severity::Error ? "error" : "warning"},
                    {"code", i.code},
                    {"message", i.message}});
  }
  return {{"frames", frames}, {"events", events}, {"sequences", sequences}, {"issues", list}};
}

namespace {

class IssueSink {
public:
  IssueSink(LintReport& report, std::size_t cap) : report_(report), cap_(cap) {}
  void add(LintIssue::Severity sev, const std::string& code, std::string message) {
    const std::size_t n = ++counts_[code];
    if (n <= cap_) report_.issues.push_back({sev, code, std::move(message)});
  }
  void finish() {
    for (const auto& [code, n] : counts_) {
      if (n > cap_) {
        report_.issues.push_back({LintIssue::Severity::Warning, code,
                                  std::to_string(n - cap_) + " further " + code + " issues not listed"});
      }
    }
  }

private:
  LintReport& report_;
  std::size_t cap_;
  std::map<std::string, std::size_t> counts_;
};

std::string at(const Frame& f) {
  return "period " + std::to_string(static_cast<int>(f.period)) + " t=" + std::to_string(f.t_ms);
}

} // namespace

LintReport lint(const Match& match, const LintOptions& options) {
  using S = LintIssue::Severity;
  LintReport report;
  report.frames = match.frames.size();
  report.events = match.events.size();
  IssueSink sink(report, options.max_issues_per_code);
  const auto& pitch = match.meta.pitch;

  const Frame* prev = nullptr;
  std::set<std::string> ids;
  std::map<std::string, int> per_team;
  for (const auto& f : match.frames) {
    if (prev == nullptr || prev->period != f.period) {
      ++report.sequences;
    } else {
      const std::int64_t gap = f.t_ms - prev->t_ms;
      if (gap <= 0) {
        sink.add(S::Error, "time_order", "frame at " + at(f) + " does not advance time");
      } else if (gap > options.max_gap_ms) {
        ++report.sequences;
        sink.add(S::Warning, "sequence_split",
                 std::to_string(gap) + " ms gap before " + at(f) + "; tracking split into a new sequence");
      } else if (gap != options.nominal_dt_ms) {
        sink.add(S::Warning, "frame_gap", std::to_string(gap) + " ms spacing before " + at(f));
      }
    }
    prev = &f;

    ids.clear();
    per_team.clear();
    for (const auto& p : f.players) {
      if (!ids.insert(p.player_id).second) {
        sink.add(S::Error, "duplicate_player", "player " + p.player_id + " appears twice at " + at(f));
      }
      if (!match.meta.has_team(p.team_id)) {
        sink.add(S::Error, "unknown_team", "unknown team '" + p.team_id + "' at " + at(f));
      }
      if (++per_team[p.team_id] == 12) {
        sink.add(S::Error, "team_size", "more than 11 players of team " + p.team_id + " at " + at(f));
      }
      if (!pitch.contains(p.xy, options.tolerance_m)) {
        sink.add(S::Warning, "out_of_bounds", "player " + p.player_id + " off the pitch at " + at(f));
      }
    }
    if (!pitch.contains(f.ball, options.tolerance_m)) {
      sink.add(S::Warning, "out_of_bounds", "ball off the pitch at " + at(f));
    }
  }

  for (const auto& e : match.events) {
    const std::string where = std::string(to_string(e.type)) + " at period " +
                              std::to_string(static_cast<int>(e.period)) + " t=" + std::to_string(e.t_ms);
    if (!match.meta.has_team(e.team_id)) sink.add(S::Error, "unknown_team", where + " references team '" + e.team_id + "'");
    if (!pitch.contains(e.location, options.tolerance_m)) sink.add(S::Warning, "out_of_bounds", where + " lies off the pitch");
  }
  sink.finish();
  return report;
}

MatchFiles MatchFiles::in(const std::filesystem::path& dir) {
  return {dir / "tracking.jsonl", dir / "events.json", dir / "meta.json"};
}

std::vector<Frame> read_tracking_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path.string());
  try {
    return read_tracking(in);
  } catch (const ParseError& e) {
    throw ParseError(e.line(), path.filename().string() + ": " + e.what());
  }
}

Bundle ingest(const MatchFiles& files, const LintOptions& options) {
  Bundle b;
  auto parse_json = [](const std::filesystem::path& p) {
    try {
      return json::parse(read_file(p));
    } catch (const json::parse_error& e) {
      throw ValidationError(p.filename().string() + ": " + e.what());
    }
  };
  try {
    b.match.meta = meta_from_json(parse_json(files.meta));
  } catch (const json::exception& e) {
    throw ValidationError(files.meta.filename().string() + ": " + e.what());
  }
  b.match.frames = read_tracking_file(files.tracking);
  {
    std::ifstream in(files.events);
    if (!in) throw ValidationError("cannot open " + files.events.string());
    try {
      b.match.events = read_events(in);
    } catch (const ValidationError& e) {
      throw ValidationError(files.events.filename().string() + ": " + e.what());
    } catch (const json::exception& e) {
      throw ValidationError(files.events.filename().string() + ": " + e.what());
    }
  }
  sort_match(b.match);
  if (std::any_of(b.match.frames.begin(), b.match.frames.end(),
                  [](const Frame& f) { return f.attacking_direction.empty(); })) {
    apply_directions(b.match.frames, b.match.meta);
  }
  b.report = lint(b.match, options);
  return b;
}

void write_match(const Match& match, const std::filesystem::path& dir) {
  std::ostringstream tracking;
  write_tracking(tracking, match.frames);
  write_file(dir / "tracking.jsonl", tracking.str());
  std::ostringstream events;
  write_events(events, match.events);
  write_file(dir / "events.json", events.str());
  write_file(dir / "meta.json", meta_to_json(match.meta).dump(1) + "\n");
}

} // namespace runlens
