#include "runlens/formats.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace runlens {

using nlohmann::json;

json point_to_json(Point p) { return json::array({p.x, p.y}); }

Point point_from_json(const json& j) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    throw ValidationError("expected a point [x, y]");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

std::string frame_to_json_line(const Frame& frame) {
  json j;
  j["t"] = frame.t_ms;
  j["period"] = static_cast<int>(frame.period);
  j["ball"] = point_to_json(frame.ball);
  if (frame.in_play) j["in_play"] = *frame.in_play;
  json players = json::array();
  for (const auto& p : frame.players) {
    players.push_back({{"id", p.player_id}, {"team", p.team_id}, {"xy", point_to_json(p.xy)}});
  }
  j["players"] = std::move(players);
  if (!frame.attacking_direction.empty()) {
    json dir = json::array();
    for (const auto& d : frame.attacking_direction) dir.push_back({d.team_id, d.sign});
    j["dir"] = std::move(dir);
  }
  return j.dump();
}

Frame frame_from_json(const json& j) {
  if (!j.is_object()) throw ValidationError("frame must be a JSON object");
  Frame f;
  f.t_ms = j.at("t").get<std::int64_t>();
  f.period = period_from_int(j.value("period", 1));
  f.ball = point_from_json(j.at("ball"));
  if (auto it = j.find("in_play"); it != j.end() && !it->is_null()) f.in_play = it->get<bool>();
  const auto& players = j.at("players");
  if (!players.is_array()) throw ValidationError("players must be an array");
  f.players.reserve(players.size());
  for (const auto& p : players) {
    f.players.push_back({p.at("id").get<std::string>(), p.at("team").get<std::string>(),
                         point_from_json(p.at("xy"))});
  }
  if (auto it = j.find("dir"); it != j.end()) {
    for (const auto& d : *it) f.attacking_direction.push_back({d.at(0).get<std::string>(), d.at(1).get<int>()});
  }
  return f;
}

void write_tracking(std::ostream& out, std::span<const Frame> frames) {
  for (const auto& f : frames) out << frame_to_json_line(f) << '\n';
}

std::vector<Frame> read_tracking(std::istream& in) {
  std::vector<Frame> frames;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      frames.push_back(frame_from_json(json::parse(line)));
    } catch (const json::exception& e) {
      throw ParseError(line_no, e.what());
    } catch (const ValidationError& e) {
      throw ParseError(line_no, e.what());
    }
  }
  return frames;
}

json event_to_json(const Event& e) {
  json j;
  j["t_ms"] = e.t_ms;
  j["period"] = static_cast<int>(e.period);
  j["type"] = std::string(to_string(e.type));
  j["team_id"] = e.team_id;
  j["player_id"] = e.player_id;
  j["location"] = point_to_json(e.location);
  j["end_location"] = e.end_location ? point_to_json(*e.end_location) : json(nullptr);
  return j;
}

Event event_from_json(const json& j) {
  Event e;
  e.t_ms = j.at("t_ms").get<std::int64_t>();
  e.period = period_from_int(j.value("period", 1));
  e.type = event_type_from_string(j.at("type").get<std::string>());
  e.team_id = j.at("team_id").get<std::string>();
  e.player_id = j.value("player_id", std::string{});
  e.location = point_from_json(j.at("location"));
  if (auto it = j.find("end_location"); it != j.end() && !it->is_null()) {
    e.end_location = point_from_json(*it);
  }
  return e;
}

void write_events(std::ostream& out, std::span<const Event> events) {
  json arr = json::array();
  for (const auto& e : events) arr.push_back(event_to_json(e));
  out << arr.dump(1) << '\n';
}

std::vector<Event> read_events(std::istream& in) {
  json arr;
  try {
    arr = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("events file: ") + e.what());
  }
  if (!arr.is_array()) throw ValidationError("events file must hold a JSON array");
  std::vector<Event> events;
  events.reserve(arr.size());
  for (std::size_t i = 0; i < arr.size(); ++i) {
    try {
      events.push_back(event_from_json(arr[i]));
    } catch (const json::exception& e) {
      throw ValidationError("event " + std::to_string(i) + ": " + e.what());
    } catch (const ValidationError& e) {
      throw ValidationError("event " + std::to_string(i) + ": " + e.what());
    }
  }
  return events;
}

json meta_to_json(const MatchMeta& meta) {
  json teams = json::array();
  for (const auto& t : meta.teams) {
    json players = json::array();
    for (const auto& p : t.players) {
      players.push_back({{"id", p.player_id}, {"name", p.name}, {"goalkeeper", p.goalkeeper}});
    }
    json jt = {{"id", t.team_id},
               {"name", t.name},
               {"kickoff_direction", t.kickoff_direction},
               {"players", players}};
    if (t.xg) jt["xg"] = *t.xg;
    teams.push_back(std::move(jt));
  }
  return {{"match_id", meta.match_id},
          {"pitch", {{"length", meta.pitch.length}, {"width", meta.pitch.width}}},
          {"teams", teams}};
}

MatchMeta meta_from_json(const json& j) {
  MatchMeta meta;
  try {
    meta.match_id = j.at("match_id").get<std::string>();
    if (auto it = j.find("pitch"); it != j.end()) {
      meta.pitch.length = it->value("length", 105.0);
      meta.pitch.width = it->value("width", 68.0);
    }
    for (const auto& jt : j.at("teams")) {
      TeamInfo t;
      t.team_id = jt.at("id").get<std::string>();
      t.name = jt.value("name", t.team_id);
      t.kickoff_direction = jt.value("kickoff_direction", 1);
      if (auto it = jt.find("xg"); it != jt.end() && !it->is_null()) t.xg = it->get<double>();
      for (const auto& jp : jt.value("players", json::array())) {
        t.players.push_back({jp.at("id").get<std::string>(), jp.value("name", std::string{}),
                             jp.value("goalkeeper", false)});
      }
      meta.teams.push_back(std::move(t));
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("match metadata: ") + e.what());
  }
  meta.validate();
  return meta;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out.flush()) throw Error("cannot write " + path.string());
  }
  std::filesystem::rename(tmp, path);
}

} // namespace runlens
