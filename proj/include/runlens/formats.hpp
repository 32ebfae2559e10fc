#pragma once

// Open file formats:
//   tracking  JSON Lines, one frame per line
//             {"t":<ms>,"period":1,"ball":[x,y],"in_play":true,
//              "players":[{"id":"p1","team":"h","xy":[x,y]}, ...]}
//             An optional "dir":[["<team>",±1], ...] array carries attacking directions.
//   events    JSON array of {"t_ms","period","type","team_id","player_id",
//             "location":[x,y],"end_location":[x,y]|null}
//   metadata  JSON object with match id, pitch, rosters and kickoff directions.

#include "runlens/core.hpp"

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace runlens {

/// Parse failure carrying the 1-based line of the offending record.
class ParseError : public ValidationError {
public:
  ParseError(std::size_t line, const std::string& what)
      : ValidationError("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

private:
  std::size_t line_;
};

std::string frame_to_json_line(const Frame& frame);
Frame frame_from_json(const nlohmann::json& j);

void write_tracking(std::ostream& out, std::span<const Frame> frames);
/// Throws ParseError naming the first malformed line. Blank lines are skipped.
std::vector<Frame> read_tracking(std::istream& in);

nlohmann::json event_to_json(const Event& event);
Event event_from_json(const nlohmann::json& j);
void write_events(std::ostream& out, std::span<const Event> events);
std::vector<Event> read_events(std::istream& in);

nlohmann::json meta_to_json(const MatchMeta& meta);
MatchMeta meta_from_json(const nlohmann::json& j);

/// Helpers for [x, y] arrays.
nlohmann::json point_to_json(Point p);
Point point_from_json(const nlohmann::json& j);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

} // namespace runlens
