#include "runlens/service.hpp"

#include <charconv>

#include <httplib.h>

namespace runlens {

using nlohmann::json;

namespace {

ApiResponse error(int status, const std::string& message) { return {status, {{"error", message}}}; }

std::optional<Role> parse_role(const std::string& s) {
  try {
    return role_from_string(s);
  } catch (const ValidationError&) {
    return std::nullopt;
  }
}

} // namespace

ProfileService::ProfileService(Season season) : season_(std::move(season)) {}

ApiResponse ProfileService::health() const {
  return {200,
          {{"status", "ok"},
           {"matches", season_.matches.size()},
           {"profiles", season_.profiles.size()},
           {"teams", season_.teams.size()}}};
}

ApiResponse ProfileService::players(const std::optional<std::string>& role,
                                    const std::optional<std::string>& min_minutes) const {
  std::optional<Role> r;
  if (role) {
    r = parse_role(*role);
    if (!r) return error(400, "unknown role '" + *role + "'");
  }
  double min = season_.config.min_role_minutes;
  if (min_minutes) {
    const auto& s = *min_minutes;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), min);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size() || min < 0.0) {
      return error(400, "min_minutes must be a non-negative number");
    }
  }
  return {200, {{"min_minutes", min}, {"players", roster_table(season_, r, min).to_json()}}};
}

ApiResponse ProfileService::profile(const std::string& player_id, const std::optional<std::string>& role) const {
  std::optional<Role> r;
  if (role) {
    r = parse_role(*role);
    if (!r) return error(400, "unknown role '" + *role + "'");
  }
  const auto* p = season_.profile(player_id, r);
  if (p == nullptr) {
    return error(404, "no qualifying profile for player '" + player_id + "'" + (role ? " as " + *role : std::string()));
  }
  const PlayerProfile one[] = {*p};
  json body = profiles_table(one).row_json(0);
  body["movements"] = movement_table(*p).to_json();
  return {200, body};
}

ApiResponse ProfileService::team_style(const std::string& team_id) const {
  const auto* t = season_.team(team_id);
  if (t == nullptr) return error(404, "unknown team '" + team_id + "'");
  const TeamStyle one[] = {*t};
  return {200, teams_table(one).row_json(0)};
}

ApiResponse ProfileService::role_percentiles(const std::string& role) const {
  const auto r = parse_role(role);
  if (!r) return error(404, "unknown role '" + role + "'");
  const Table t = percentiles_table(season_, *r);
  return {200,
          {{"role", role},
           {"peers", t.rows.size()},
           {"min_peers", season_.config.min_role_peers},
           {"players", t.to_json()}}};
}

ApiResponse ProfileService::compare_lineups(const std::string& body) const {
  json j;
  try {
    j = json::parse(body);
  } catch (const json::parse_error& e) {
    return error(400, std::string("malformed JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("a") || !j.contains("b")) {
    return error(400, "body must be an object with lineups 'a' and 'b'");
  }
  std::vector<LineupMember> a, b;
  try {
    a = lineup_from_json(j.at("a"));
    b = lineup_from_json(j.at("b"));
  } catch (const ValidationError& e) {
    return error(400, e.what());
  }
  std::vector<std::string> gaps;
  if (a.size() != 11) gaps.push_back("a: " + std::to_string(a.size()) + " members, expected 11");
  if (b.size() != 11) gaps.push_back("b: " + std::to_string(b.size()) + " members, expected 11");
  try {
    const auto cmp = runlens::compare_lineups(a, b, season_.profiles);
    if (!gaps.empty()) return {422, {{"error", "invalid lineup"}, {"gaps", gaps}}};
    return {200, {{"movements", lineup_table(cmp).to_json()}}};
  } catch (const LineupError& e) {
    gaps.insert(gaps.end(), e.gaps().begin(), e.gaps().end());
    return {422, {{"error", e.what()}, {"gaps", gaps}}};
  }
}

void ProfileService::mount(httplib::Server& server, const std::optional<std::filesystem::path>& ui_dir) const {
  auto reply = [](httplib::Response& res, const ApiResponse& r) {
    res.status = r.status;
    res.set_content(r.body.dump(), "application/json");
  };
  auto param = [](const httplib::Request& req, const char* key) -> std::optional<std::string> {
    if (!req.has_param(key)) return std::nullopt;
    return req.get_param_value(key);
  };
  server.Get("/health", [=, this](const httplib::Request&, httplib::Response& res) { reply(res, health()); });
  server.Get("/players", [=, this](const httplib::Request& req, httplib::Response& res) {
    reply(res, players(param(req, "role"), param(req, "min_minutes")));
  });
  server.Get(R"(/players/([^/]+)/profile)", [=, this](const httplib::Request& req, httplib::Response& res) {
    reply(res, profile(req.matches[1], param(req, "role")));
  });
  server.Get(R"(/teams/([^/]+)/style)", [=, this](const httplib::Request& req, httplib::Response& res) {
    reply(res, team_style(req.matches[1]));
  });
  server.Get(R"(/roles/([^/]+)/percentiles)", [=, this](const httplib::Request& req, httplib::Response& res) {
    reply(res, role_percentiles(req.matches[1]));
  });
  server.Post("/lineups/compare", [=, this](const httplib::Request& req, httplib::Response& res) {
    reply(res, compare_lineups(req.body));
  });
  if (ui_dir) server.set_mount_point("/", ui_dir->string());
  server.set_error_handler([](const httplib::Request&, httplib::Response& res) {
    if (res.body.empty()) {
      res.set_content(json{{"error", "not found"}}.dump(), "application/json");
    }
  });
  server.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
    std::string what = "internal error";
    try {
      std::rethrow_exception(ep);
    } catch (const std::exception& e) {
      what = e.what();
    } catch (...) {
    }
    res.status = 500;
    res.set_content(json{{"error", what}}.dump(), "application/json");
  });
}

} // namespace runlens
