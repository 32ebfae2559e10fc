#pragma once

// Read-only HTTP facade over a loaded season. Handlers are plain functions of
// the request so tests can call them without a socket.

#include "runlens/analysis.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include <json.hpp>

namespace httplib {
class Server;
}

namespace runlens {

struct ApiResponse {
  int status = 200;
  nlohmann::json body;
};

class ProfileService {
public:
  explicit ProfileService(Season season);

  ApiResponse health() const;
  ApiResponse players(const std::optional<std::string>& role, const std::optional<std::string>& min_minutes) const;
  ApiResponse profile(const std::string& player_id, const std::optional<std::string>& role) const;
  ApiResponse team_style(const std::string& team_id) const;
  ApiResponse role_percentiles(const std::string& role) const;
  ApiResponse compare_lineups(const std::string& body) const;

  /// Routes every endpoint (and optionally a static UI directory) on `server`.
  void mount(httplib::Server& server, const std::optional<std::filesystem::path>& ui_dir = std::nullopt) const;

  const Season& season() const { return season_; }

private:
  Season season_;
};

} // namespace runlens
