#include "runlens/store.hpp"

#include "runlens/formats.hpp"

#include <algorithm>

namespace runlens {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

template <typename E>
Cell name_cell(const std::optional<E>& v) {
  if (!v) return std::monostate{};
  return std::string(to_string(*v));
}

Cell role_cell(const std::optional<Role>& r) { return name_cell(r); }

template <typename E, typename Parse>
std::optional<E> parse_opt(const std::string& s, Parse parse) {
  if (s.empty()) return std::nullopt;
  return parse(s);
}

Period period_of(std::int64_t p) {
  if (p < 1 || p > 4) throw ValidationError("bad period " + std::to_string(p));
  return static_cast<Period>(p);
}

json opt_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }
std::optional<double> opt_double(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<double>();
}

template <typename E>
json opt_name(const std::optional<E>& v) {
  return v ? json(std::string(to_string(*v))) : json(nullptr);
}

} // namespace

void check_match_id(std::string_view id) {
  if (id.empty() || id == "." || id == ".." || id.find_first_of("/\\") != std::string_view::npos) {
    throw ValidationError("match id '" + std::string(id) + "' cannot name a store directory");
  }
}

Table runs_table(std::span<const ContextualizedRun> runs) {
  Table t;
  t.columns = {"match_id",   "team_id",      "player_id",     "period",      "role",         "phase",
               "attack_type", "defense_type", "origin_zone",   "destination_zone", "movement", "on_ball",
               "t_valley_end", "t_peak_start", "t_peak_end", "t_next_valley_start", "origin_x", "origin_y",
               "destination_x", "destination_y", "peak_speed", "distance_total", "distance_hi", "is_hi"};
  for (const auto& c : runs) {
    const auto& r = c.run;
    t.rows.push_back({c.match_id,
                      c.team_id,
                      r.player_id,
                      static_cast<std::int64_t>(c.period),
                      role_cell(c.role),
                      std::string(to_string(c.phase)),
                      name_cell(c.attack_type),
                      name_cell(c.defense_type),
                      name_cell(c.origin_zone),
                      name_cell(c.destination_zone),
                      c.movement ? Cell(movement_key(*c.movement)) : Cell(std::monostate{}),
                      c.on_ball,
                      r.t_valley_end,
                      r.t_peak_start,
                      r.t_peak_end,
                      r.t_next_valley_start,
                      r.origin.x,
                      r.origin.y,
                      r.destination.x,
                      r.destination.y,
                      r.peak_speed,
                      r.distance_total,
                      r.distance_hi,
                      r.is_hi});
  }
  return t;
}

std::vector<ContextualizedRun> runs_from_csv(std::string_view text) {
  const CsvReader csv(text, "runs.csv");
  std::vector<ContextualizedRun> out(csv.size());
  for (std::size_t i = 0; i < csv.size(); ++i) {
    auto& c = out[i];
    auto& r = c.run;
    c.match_id = csv.get(i, "match_id");
    c.team_id = csv.get(i, "team_id");
    r.player_id = csv.get(i, "player_id");
    c.period = period_of(csv.integer(i, "period"));
    c.role = parse_opt<Role>(csv.get(i, "role"), role_from_string);
    c.phase = phase_from_string(csv.get(i, "phase"));
    c.attack_type = parse_opt<AttackType>(csv.get(i, "attack_type"), attack_type_from_string);
    c.defense_type = parse_opt<DefenseType>(csv.get(i, "defense_type"), defense_type_from_string);
    c.origin_zone = parse_opt<Zone>(csv.get(i, "origin_zone"), zone_from_string);
    c.destination_zone = parse_opt<Zone>(csv.get(i, "destination_zone"), zone_from_string);
    if (const auto& m = csv.get(i, "movement"); !m.empty()) {
      c.movement = movement_from_key(m);
      if (!c.movement) throw ValidationError("runs.csv: unknown movement '" + m + "'");
    }
    c.on_ball = csv.flag(i, "on_ball");
    r.t_valley_end = csv.integer(i, "t_valley_end");
    r.t_peak_start = csv.integer(i, "t_peak_start");
    r.t_peak_end = csv.integer(i, "t_peak_end");
    r.t_next_valley_start = csv.integer(i, "t_next_valley_start");
    r.origin = {csv.number(i, "origin_x"), csv.number(i, "origin_y")};
    r.destination = {csv.number(i, "destination_x"), csv.number(i, "destination_y")};
    r.peak_speed = csv.number(i, "peak_speed");
    r.distance_total = csv.number(i, "distance_total");
    r.distance_hi = csv.number(i, "distance_hi");
    r.is_hi = csv.flag(i, "is_hi");
  }
  return out;
}

Table samples_table(std::span<const RunValueSample> samples) {
  Table t;
  t.columns = {"run_id", "player_id", "role", "epv_start", "epv_end", "epv_added", "angle", "distance"};
  for (const auto& s : samples) {
    t.rows.push_back({s.run_id, s.player_id, std::string(to_string(s.role)), s.epv_start, s.epv_end, s.epv_added,
                      s.angle, s.distance});
  }
  return t;
}

std::vector<RunValueSample> samples_from_csv(std::string_view text) {
  const CsvReader csv(text, "samples.csv");
  std::vector<RunValueSample> out(csv.size());
  for (std::size_t i = 0; i < csv.size(); ++i) {
    auto& s = out[i];
    s.run_id = csv.get(i, "run_id");
    s.player_id = csv.get(i, "player_id");
    s.role = role_from_string(csv.get(i, "role"));
    s.epv_start = csv.number(i, "epv_start");
    s.epv_end = csv.number(i, "epv_end");
    s.epv_added = csv.number(i, "epv_added");
    s.angle = csv.number(i, "angle");
    s.distance = csv.number(i, "distance");
  }
  return out;
}

Table actions_table(std::span<const OnBallAction> actions) {
  Table t;
  t.columns = {"match_id", "player_id", "team_id", "period", "role", "t_start", "t_end", "action_speed",
               "reception_speed", "epv_start", "epv_end", "in_possession"};
  for (const auto& a : actions) {
    t.rows.push_back({a.match_id, a.player_id, a.team_id, static_cast<std::int64_t>(a.period), role_cell(a.role),
                      a.t_start, a.t_end, opt_cell(a.action_speed), opt_cell(a.reception_speed),
                      opt_cell(a.epv_start), opt_cell(a.epv_end), a.in_possession});
  }
  return t;
}

std::vector<OnBallAction> actions_from_csv(std::string_view text) {
  const CsvReader csv(text, "actions.csv");
  std::vector<OnBallAction> out(csv.size());
  for (std::size_t i = 0; i < csv.size(); ++i) {
    auto& a = out[i];
    a.match_id = csv.get(i, "match_id");
    a.player_id = csv.get(i, "player_id");
    a.team_id = csv.get(i, "team_id");
    a.period = period_of(csv.integer(i, "period"));
    a.role = parse_opt<Role>(csv.get(i, "role"), role_from_string);
    a.t_start = csv.integer(i, "t_start");
    a.t_end = csv.integer(i, "t_end");
    a.action_speed = csv.opt_number(i, "action_speed");
    a.reception_speed = csv.opt_number(i, "reception_speed");
    a.epv_start = csv.opt_number(i, "epv_start");
    a.epv_end = csv.opt_number(i, "epv_end");
    a.in_possession = csv.flag(i, "in_possession");
  }
  return out;
}

json segments_to_json(std::span<const PossessionSegment> segments) {
  json arr = json::array();
  for (const auto& s : segments) {
    arr.push_back({{"team_id", s.team_id ? json(*s.team_id) : json(nullptr)},
                   {"period", static_cast<int>(s.period)},
                   {"t_start", s.t_start},
                   {"t_end", s.t_end},
                   {"end_reason", to_string(s.end_reason)},
                   {"attack_type", opt_name(s.attack_type)},
                   {"defense_type", opt_name(s.defense_type)},
                   {"possession_id", s.possession_id},
                   {"low_confidence", s.low_confidence}});
  }
  return arr;
}

std::vector<PossessionSegment> segments_from_json(const json& j) {
  std::vector<PossessionSegment> out;
  for (const auto& o : j) {
    PossessionSegment s;
    if (!o.at("team_id").is_null()) s.team_id = o.at("team_id").get<std::string>();
    s.period = period_of(o.at("period").get<int>());
    s.t_start = o.at("t_start").get<std::int64_t>();
    s.t_end = o.at("t_end").get<std::int64_t>();
    s.end_reason = end_reason_from_string(o.at("end_reason").get<std::string>());
    if (!o.at("attack_type").is_null()) s.attack_type = attack_type_from_string(o.at("attack_type").get<std::string>());
    if (!o.at("defense_type").is_null()) {
      s.defense_type = defense_type_from_string(o.at("defense_type").get<std::string>());
    }
    s.possession_id = o.at("possession_id").get<int>();
    s.low_confidence = o.at("low_confidence").get<bool>();
    out.push_back(std::move(s));
  }
  return out;
}

json roles_to_json(const RoleTimeline& roles) {
  json players = json::object();
  for (const auto& [pid, intervals] : roles.players) {
    json list = json::array();
    for (const auto& r : intervals) {
      list.push_back({{"period", static_cast<int>(r.period)},
                      {"t_start", r.t_start},
                      {"t_end", r.t_end},
                      {"role", opt_name(r.role)},
                      {"formation", r.formation},
                      {"side", opt_name(r.side)}});
    }
    players[pid] = std::move(list);
  }
  json windows = json::array();
  for (const auto& w : roles.windows) {
    windows.push_back({{"team_id", w.team_id},
                       {"period", static_cast<int>(w.period)},
                       {"t_start", w.t_start},
                       {"t_end", w.t_end},
                       {"formation", w.formation},
                       {"cost", w.cost}});
  }
  return {{"players", players}, {"windows", windows}};
}

RoleTimeline roles_from_json(const json& j) {
  RoleTimeline out;
  for (const auto& [pid, list] : j.at("players").items()) {
    auto& v = out.players[pid];
    for (const auto& o : list) {
      RoleInterval r;
      r.period = period_of(o.at("period").get<int>());
      r.t_start = o.at("t_start").get<std::int64_t>();
      r.t_end = o.at("t_end").get<std::int64_t>();
      if (!o.at("role").is_null()) r.role = role_from_string(o.at("role").get<std::string>());
      r.formation = o.at("formation").get<std::string>();
      if (!o.at("side").is_null()) r.side = side_from_string(o.at("side").get<std::string>());
      v.push_back(std::move(r));
    }
  }
  for (const auto& o : j.at("windows")) {
    out.windows.push_back({o.at("team_id").get<std::string>(), period_of(o.at("period").get<int>()),
                           o.at("t_start").get<std::int64_t>(), o.at("t_end").get<std::int64_t>(),
                           o.at("formation").get<std::string>(), o.at("cost").get<double>()});
  }
  return out;
}

json ledger_to_json(const EffectiveTimeLedger& ledger) {
  json teams = json::array();
  for (const auto& t : ledger.teams) {
    teams.push_back({{"team_id", t.team_id},
                     {"in_possession_s", t.in_possession_s},
                     {"out_of_possession_s", t.out_of_possession_s},
                     {"out_of_play_s", t.out_of_play_s},
                     {"distance_in", t.distance_in},
                     {"distance_out", t.distance_out},
                     {"hi_distance_in", t.hi_distance_in},
                     {"hi_distance_out", t.hi_distance_out},
                     {"direct_play_s", t.direct_play_s},
                     {"high_press_s", t.high_press_s},
                     {"defense_labelled_s", t.defense_labelled_s},
                     {"xg_for", opt_json(t.xg_for)},
                     {"xg_against", opt_json(t.xg_against)}});
  }
  json players = json::array();
  for (const auto& p : ledger.players) {
    players.push_back({{"player_id", p.player_id},
                       {"team_id", p.team_id},
                       {"role", opt_name(p.role)},
                       {"in_possession_s", p.in_possession_s},
                       {"out_of_possession_s", p.out_of_possession_s},
                       {"out_of_play_s", p.out_of_play_s}});
  }
  json minutes = json::array();
  for (const auto& m : ledger.minutes) {
    minutes.push_back({{"team_id", m.team_id},
                       {"minute", m.minute},
                       {"out_of_possession_s", m.out_of_possession_s},
                       {"distance", m.distance},
                       {"hi_distance", m.hi_distance}});
  }
  return {{"match_id", ledger.match_id},
          {"duration_s", ledger.duration_s},
          {"teams", teams},
          {"players", players},
          {"minutes", minutes}};
}

EffectiveTimeLedger ledger_from_json(const json& j) {
  EffectiveTimeLedger l;
  l.match_id = j.at("match_id").get<std::string>();
  l.duration_s = j.at("duration_s").get<double>();
  for (const auto& o : j.at("teams")) {
    TeamLedger t;
    t.team_id = o.at("team_id").get<std::string>();
    t.in_possession_s = o.at("in_possession_s").get<double>();
    t.out_of_possession_s = o.at("out_of_possession_s").get<double>();
    t.out_of_play_s = o.at("out_of_play_s").get<double>();
    t.distance_in = o.at("distance_in").get<double>();
    t.distance_out = o.at("distance_out").get<double>();
    t.hi_distance_in = o.at("hi_distance_in").get<double>();
    t.hi_distance_out = o.at("hi_distance_out").get<double>();
    t.direct_play_s = o.at("direct_play_s").get<double>();
    t.high_press_s = o.at("high_press_s").get<double>();
    t.defense_labelled_s = o.at("defense_labelled_s").get<double>();
    t.xg_for = opt_double(o, "xg_for");
    t.xg_against = opt_double(o, "xg_against");
    l.teams.push_back(std::move(t));
  }
  for (const auto& o : j.at("players")) {
    PlayerLedger p;
    p.player_id = o.at("player_id").get<std::string>();
    p.team_id = o.at("team_id").get<std::string>();
    if (!o.at("role").is_null()) p.role = role_from_string(o.at("role").get<std::string>());
    p.in_possession_s = o.at("in_possession_s").get<double>();
    p.out_of_possession_s = o.at("out_of_possession_s").get<double>();
    p.out_of_play_s = o.at("out_of_play_s").get<double>();
    l.players.push_back(std::move(p));
  }
  for (const auto& o : j.at("minutes")) {
    l.minutes.push_back({o.at("team_id").get<std::string>(), o.at("minute").get<int>(),
                         o.at("out_of_possession_s").get<double>(), o.at("distance").get<double>(),
                         o.at("hi_distance").get<double>()});
  }
  return l;
}

// ---------------------------------------------------------------------------

Store::Store(fs::path root, Config config) : root_(std::move(root)), config_(std::move(config)), hash_(runlens::config_hash(config_)) {}

Store Store::open_or_create(const fs::path& root, const Config& config) {
  if (!fs::exists(root / "manifest.json")) {
    Store s(root, config);
    s.save();
    return s;
  }
  Store existing = open(root);
  if (existing.hash_ != runlens::config_hash(config)) {
    throw StoreError("store " + root.string() + " was built with config " + existing.hash_.substr(0, 12) +
                     ", not " + runlens::config_hash(config).substr(0, 12) + "; use a fresh store");
  }
  return existing;
}

Store Store::open(const fs::path& root) {
  const fs::path path = root / "manifest.json";
  if (!fs::exists(path)) throw StoreError("no store at " + root.string() + " (manifest.json missing)");
  json m;
  try {
    m = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw StoreError("manifest.json: " + std::string(e.what()));
  }
  if (m.value("version", 0) != kStoreVersion) throw StoreError("unsupported store version");
  Store s(root, config_from_json(m.at("config")));
  if (m.at("config_hash").get<std::string>() != s.hash_) throw StoreError("manifest config hash does not match its config");
  for (const auto& o : m.at("matches")) {
    StoreEntry e;
    e.match_id = o.at("match_id").get<std::string>();
    e.ok = o.at("status").get<std::string>() == "ok";
    e.error = o.value("error", "");
    e.lint = o.value("lint", json(nullptr));
    e.discarded = o.value("discarded", std::map<std::string, std::size_t>{});
    e.artifacts = o.value("artifacts", std::map<std::string, std::string>{});
    s.entries_.push_back(std::move(e));
  }
  return s;
}

const StoreEntry* Store::entry(std::string_view match_id) const {
  for (const auto& e : entries_) {
    if (e.match_id == match_id) return &e;
  }
  return nullptr;
}

fs::path Store::match_dir(std::string_view match_id) const {
  check_match_id(match_id);
  return root_ / "matches" / std::string(match_id);
}

namespace {

void replace_entry(std::vector<StoreEntry>& entries, StoreEntry e) {
  auto it = std::find_if(entries.begin(), entries.end(), [&](const StoreEntry& x) { return x.match_id == e.match_id; });
  if (it != entries.end()) {
    *it = std::move(e);
  } else {
    entries.push_back(std::move(e));
  }
}

} // namespace

void Store::record(const MatchArtifacts& a, const json& lint) {
  const fs::path dir = match_dir(a.match_id);
  const std::map<std::string, std::string> files{
      {"runs.csv", runs_table(a.runs).to_csv()},
      {"segments.json", segments_to_json(a.segments).dump(1) + "\n"},
      {"roles.json", roles_to_json(a.roles).dump(1) + "\n"},
      {"samples.csv", samples_table(a.samples).to_csv()},
      {"ledger.json", ledger_to_json(a.ledger).dump(1) + "\n"},
      {"actions.csv", actions_table(a.actions).to_csv()},
  };
  StoreEntry e;
  e.match_id = a.match_id;
  e.ok = true;
  e.lint = lint;
  e.discarded = a.discarded;
  for (const auto& [kind, text] : files) {
    write_file(dir / kind, text);
    e.artifacts[kind] = sha256_hex(text);
  }
  replace_entry(entries_, std::move(e));
}

void Store::record_failure(const std::string& match_id, const std::string& error, const json& lint) {
  StoreEntry e;
  e.match_id = match_id;
  e.error = error;
  e.lint = lint;
  std::error_code ec;
  if (!match_id.empty() && match_id.find_first_of("/\\") == std::string::npos && match_id != "." && match_id != "..") {
    fs::remove_all(root_ / "matches" / match_id, ec);
  }
  replace_entry(entries_, std::move(e));
}

void Store::save() const {
  std::vector<const StoreEntry*> sorted;
  for (const auto& e : entries_) sorted.push_back(&e);
  std::sort(sorted.begin(), sorted.end(), [](const StoreEntry* a, const StoreEntry* b) { return a->match_id < b->match_id; });
  json matches = json::array();
  for (const auto* e : sorted) {
    json o = {{"match_id", e->match_id}, {"status", e->ok ? "ok" : "failed"}, {"lint", e->lint}};
    if (e->ok) {
      o["artifacts"] = e->artifacts;
      o["discarded"] = e->discarded;
    } else {
      o["error"] = e->error;
    }
    matches.push_back(std::move(o));
  }
  const json m = {{"version", kStoreVersion},
                  {"config_hash", hash_},
                  {"config", config_to_json(config_)},
                  {"matches", matches}};
  write_file(root_ / "manifest.json", m.dump(2) + "\n");
}

MatchSummary Store::load_summary(const StoreEntry& e) const {
  if (!e.ok) throw StoreError("match " + e.match_id + " failed to process: " + e.error);
  const fs::path dir = match_dir(e.match_id);
  auto text = [&](std::string_view kind) {
    const fs::path p = dir / std::string(kind);
    if (!fs::exists(p)) throw StoreError("missing artifact " + p.string());
    return read_file(p);
  };
  MatchSummary s;
  s.match_id = e.match_id;
  try {
    s.ledger = ledger_from_json(json::parse(text("ledger.json")));
  } catch (const json::exception& ex) {
    throw StoreError(e.match_id + "/ledger.json: " + ex.what());
  }
  s.runs = runs_from_csv(text("runs.csv"));
  s.actions = actions_from_csv(text("actions.csv"));
  s.samples = samples_from_csv(text("samples.csv"));
  return s;
}

std::vector<MatchSummary> Store::load_summaries() const {
  std::vector<const StoreEntry*> ok;
  for (const auto& e : entries_) {
    if (e.ok) ok.push_back(&e);
  }
  std::sort(ok.begin(), ok.end(), [](const StoreEntry* a, const StoreEntry* b) { return a->match_id < b->match_id; });
  std::vector<MatchSummary> out;
  for (const auto* e : ok) out.push_back(load_summary(*e));
  return out;
}

std::vector<std::string> Store::verify() const {
  std::vector<std::string> problems;
  for (const auto& e : entries_) {
    if (!e.ok) continue;
    for (const auto& [kind, hash] : e.artifacts) {
      const fs::path p = match_dir(e.match_id) / kind;
      if (!fs::exists(p)) {
        problems.push_back(e.match_id + "/" + kind + " missing");
      } else if (sha256_hex(read_file(p)) != hash) {
        problems.push_back(e.match_id + "/" + kind + " hash mismatch");
      }
    }
  }
  return problems;
}

} // namespace runlens
