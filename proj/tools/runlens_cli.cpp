// runlens: ingest, process and export tracking/event matches.

#include "runlens/analysis.hpp"
#include "runlens/batch.hpp"
#include "runlens/formats.hpp"
#include "runlens/service.hpp"
#include "runlens/synth.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <thread>

namespace fs = std::filesystem;
using namespace runlens;

namespace {

constexpr int kOk = 0;
constexpr int kValidation = 2;
constexpr int kPartial = 3;

struct Globals {
  std::string config;
  std::string store = "store";
  unsigned jobs = std::max(1u, std::thread::hardware_concurrency());
};

Config load(const Globals& g) { return g.config.empty() ? Config{} : load_config(g.config); }

Season open_season(const Globals& g) {
  const Store store = Store::open(g.store);
  if (!g.config.empty() && config_hash(load_config(g.config)) != store.config_hash()) {
    throw StoreError("--config differs from the config recorded in " + g.store);
  }
  return Season::build(store.load_summaries(), store.config());
}

void emit(const Table& t, const std::string& out, const std::string& format) {
  const std::string text = format == "json" ? t.to_json().dump(2) + "\n" : t.to_csv();
  if (out.empty() || out == "-") {
    std::cout << text;
  } else {
    write_file(out, text);
  }
}

std::vector<LineupMember> read_lineup(const std::string& path) {
  try {
    return lineup_from_json(nlohmann::json::parse(read_file(path)));
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

std::optional<Role> opt_role(const std::string& s) {
  if (s.empty()) return std::nullopt;
  return role_from_string(s);
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"runlens: high-intensity run analysis over tracking and event data"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config, "Config JSON (defaults apply when omitted)");
  app.add_option("--store", g.store, "Artifact store directory")->capture_default_str();
  app.add_option("--jobs", g.jobs, "Worker threads")->check(CLI::PositiveNumber);

  std::vector<std::string> dirs;
  std::string player, role, team, lineup, out, format = "csv", script, file_a, file_b, analysis;

  auto* ingest_cmd = app.add_subcommand("ingest", "Validate match directories and print lint reports");
  ingest_cmd->add_option("dirs", dirs, "Match directories")->required();

  auto* process_cmd = app.add_subcommand("process", "Run the pipeline on match directories into the store");
  process_cmd->add_option("dirs", dirs, "Match directories")->required();

  auto* profile_cmd = app.add_subcommand("profile", "Print one player profile as JSON");
  profile_cmd->add_option("player", player, "Player id")->required();
  profile_cmd->add_option("--role", role, "Role (default: the role with most minutes)");

  auto* team_cmd = app.add_subcommand("team-style", "Team style table");
  team_cmd->add_option("--team", team, "Only this team");

  auto* pca_cmd = app.add_subcommand("pca", "Principal components of qualified team styles");

  auto* lineup_cmd = app.add_subcommand("lineup-compare", "Compare two lineups (JSON arrays of {player_id, role})");
  lineup_cmd->add_option("a", file_a, "Lineup A")->required()->check(CLI::ExistingFile);
  lineup_cmd->add_option("b", file_b, "Lineup B")->required()->check(CLI::ExistingFile);

  auto* export_cmd = app.add_subcommand("export", "Export an analysis table");
  export_cmd->add_option("analysis", analysis, "Analysis name")->required();
  export_cmd->add_option("--player", player, "Filter by player");
  export_cmd->add_option("--role", role, "Filter by role");
  export_cmd->add_option("--team", team, "Filter by team");
  export_cmd->add_option("--lineup", lineup, "Lineup JSON (fig12)");

  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic match from a script");
  synth_cmd->add_option("script", script, "Script JSON")->required()->check(CLI::ExistingFile);
  synth_cmd->add_option("--out", out, "Output match directory")->required();

  for (auto* c : {team_cmd, pca_cmd, lineup_cmd, export_cmd}) {
    c->add_option("--out", out, "Output file (default stdout)");
    c->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  }

  CLI11_PARSE(app, argc, argv);

  try {
    if (*ingest_cmd) {
      const auto options = lint_options(load(g));
      int code = kOk;
      nlohmann::json reports = nlohmann::json::object();
      for (const auto& d : dirs) {
        try {
          const Bundle b = ingest(MatchFiles::in(d), options);
          reports[d] = b.report.to_json();
          if (b.report.has_errors()) code = kValidation;
        } catch (const std::exception& e) {
          reports[d] = {{"error", e.what()}};
          code = kValidation;
        }
      }
      std::cout << reports.dump(2) << "\n";
      return code;
    }
    if (*process_cmd) {
      const Config config = load(g);
      config.validate();
      Store store = Store::open_or_create(g.store, config);
      std::vector<fs::path> paths(dirs.begin(), dirs.end());
      const auto outcomes = process_matches(paths, store, g.jobs);
      std::size_t failed = 0;
      for (const auto& o : outcomes) {
        if (o.ok) {
          std::cerr << "ok      " << o.match_id << "\n";
        } else {
          ++failed;
          std::cerr << "failed  " << o.match_id << " (" << o.source << "): " << o.error << "\n";
        }
      }
      return failed > 0 ? kPartial : kOk;
    }
    if (*synth_cmd) {
      const auto result = synth::generate(synth::read_script(script));
      write_match(result.match, out);
      write_file(fs::path(out) / "truth.json", synth::truth_to_json(result.truth).dump(1) + "\n");
      std::cerr << "wrote " << result.match.frames.size() << " frames and " << result.match.events.size()
                << " events to " << out << "\n";
      return kOk;
    }

    const Season season = open_season(g);
    if (*profile_cmd) {
      const ProfileService service(season);
      const auto r = service.profile(player, role.empty() ? std::nullopt : std::optional<std::string>(role));
      if (r.status != 200) {
        std::cerr << r.body.at("error").get<std::string>() << "\n";
        return kValidation;
      }
      std::cout << r.body.dump(2) << "\n";
      return kOk;
    }
    if (*team_cmd) {
      ExportFilters f;
      if (!team.empty()) f.team = team;
      emit(export_table(season, "teams", f), out, format);
      return kOk;
    }
    if (*pca_cmd) {
      const Table t = pca_table(season);
      if (t.rows.empty()) std::cerr << "fewer than 3 qualified teams with varying styles; table is empty\n";
      emit(t, out, format);
      return kOk;
    }
    if (*lineup_cmd) {
      emit(lineup_table(compare_lineups(read_lineup(file_a), read_lineup(file_b), season.profiles)), out, format);
      return kOk;
    }
    if (*export_cmd) {
      ExportFilters f;
      if (!player.empty()) f.player = player;
      f.role = opt_role(role);
      if (!team.empty()) f.team = team;
      if (!lineup.empty()) f.lineup = read_lineup(lineup);
      emit(export_table(season, analysis, f), out, format);
      return kOk;
    }
  } catch (const LineupError& e) {
    std::cerr << e.what() << "\n";
    for (const auto& g : e.gaps()) std::cerr << "  " << g << "\n";
    return kValidation;
  } catch (const ValidationError& e) {
    std::cerr << e.what() << "\n";
    return kValidation;
  } catch (const StoreError& e) {
    std::cerr << e.what() << "\n";
    return kValidation;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << e.what() << "\n";
    return kValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return kOk;
}
