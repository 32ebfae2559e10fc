#include "runlens/config.hpp"

#include "runlens/formats.hpp"

#include <openssl/evp.h>

#include <array>
#include <set>

namespace runlens {

using nlohmann::json;

void Config::validate() const {
  pitch.validate();
  kinematics.validate();
  possession.validate();
  if (formation.window_ms <= 0 || formation.stride_ms <= 0) throw ValidationError("formation windows must be positive");
  if (formation.templates.empty()) throw ValidationError("at least one formation template is required");
  if (valuation.after_peak_ms < 0 || valuation.frame_tolerance_ms < 0) {
    throw ValidationError("valuation offsets must be non-negative");
  }
  if (aggregation.min_role_minutes < 0.0 || aggregation.rolling_minutes < 1) {
    throw ValidationError("aggregation thresholds out of range");
  }
  if (reception_lookback_ms < 0) throw ValidationError("reception lookback must be non-negative");
  if (epv.empty()) throw ValidationError("epv provider must be 'surrogate' or a table path");
}

json config_to_json(const Config& c) {
  const auto& k = c.kinematics;
  const auto& p = c.possession;
  const auto& f = c.formation;
  const auto& a = c.aggregation;
  return {
      {"version", Config::kVersion},
      {"pitch", {{"length", c.pitch.length}, {"width", c.pitch.width}}},
      {"speed_bands", {{"walking_max", k.bands.walking_max}, {"jogging_max", k.bands.jogging_max},
                       {"running_max", k.bands.running_max}}},
      {"kinematics", {{"smoothing_window", k.smoothing_window}, {"outlier_cap_kmh", k.outlier_cap_kmh},
                      {"min_interval_ms", k.min_interval_ms}, {"max_gap_ms", k.max_gap_ms},
                      {"nominal_dt_ms", k.nominal_dt_ms}, {"min_signal_ms", k.min_signal_ms}}},
      {"tactical", {{"back_line", c.tactical.back_line == BackLineMode::LineCentroid ? "line_centroid"
                                                                                     : "deepest_defender"},
                    {"frame_lookup_ms", c.tactical.frame_lookup_ms}}},
      {"possession", {{"regain_window_ms", p.regain_window_ms}, {"flip_events", p.flip_events},
                      {"set_piece_ms", p.set_piece_ms}, {"counter_ms", p.counter_ms},
                      {"counter_advance_m", p.counter_advance_m}, {"long_pass_m", p.long_pass_m},
                      {"direct_play_ms", p.direct_play_ms}, {"high_press_area_share", p.high_press_area_share},
                      {"high_press_players", p.high_press_players}, {"min_block_coverage", p.min_block_coverage}}},
      {"formation", {{"window_ms", f.window_ms}, {"stride_ms", f.stride_ms}, {"min_phase_ms", f.min_phase_ms},
                     {"min_visibility", f.min_visibility}, {"min_player_visible_ms", f.min_player_visible_ms},
                     {"phase", f.phase == PhaseFilter::OutOfPossession ? "out_of_possession" : "in_possession"},
                     {"templates", templates_to_json(f.templates)}}},
      {"valuation", {{"after_peak_ms", c.valuation.after_peak_ms},
                     {"frame_tolerance_ms", c.valuation.frame_tolerance_ms},
                     {"influence_min_samples", c.influence_min_samples},
                     {"epv", c.epv}}},
      {"aggregation", {{"min_role_minutes", a.min_role_minutes}, {"min_role_peers", a.min_role_peers},
                       {"min_team_matches", a.min_team_matches}, {"rolling_minutes", a.rolling_minutes},
                       {"reception_lookback_ms", c.reception_lookback_ms}}},
      {"ingest", {{"event_tolerance_m", c.event_tolerance_m}}},
  };
}

namespace {

/// Reads known keys from `j` into targets and rejects anything else.
class Section {
public:
  Section(const json& root, const char* name) : name_(name) {
    if (root.contains(name)) {
      if (!root.at(name).is_object()) throw ValidationError(std::string("config section '") + name + "' must be an object");
      j_ = &root.at(name);
    }
  }
  template <typename T>
  void get(const char* key, T& target) {
    seen_.insert(key);
    if (j_ && j_->contains(key)) {
      try {
        target = j_->at(key).get<T>();
      } catch (const json::exception&) {
        throw ValidationError("config key " + name_ + "." + key + " has the wrong type");
      }
    }
  }
  const json* raw(const char* key) {
    seen_.insert(key);
    return j_ && j_->contains(key) ? &j_->at(key) : nullptr;
  }
  void finish() const {
    if (!j_) return;
    for (const auto& [key, _] : j_->items()) {
      if (!seen_.contains(key)) throw ValidationError("unknown config key " + name_ + "." + key);
    }
  }

private:
  std::string name_;
  const json* j_ = nullptr;
  std::set<std::string> seen_;
};

} // namespace

Config config_from_json(const json& j) {
  if (!j.is_object()) throw ValidationError("config must be a JSON object");
  static const std::set<std::string> sections{"version", "pitch", "speed_bands", "kinematics", "tactical", "possession",
                                              "formation", "valuation", "aggregation", "ingest"};
  for (const auto& [key, _] : j.items()) {
    if (!sections.contains(key)) throw ValidationError("unknown config section '" + key + "'");
  }
  if (j.contains("version") && j.at("version") != Config::kVersion) {
    throw ValidationError("unsupported config version " + j.at("version").dump());
  }
  Config c;
  {
    Section s(j, "pitch");
    s.get("length", c.pitch.length);
    s.get("width", c.pitch.width);
    s.finish();
  }
  {
    Section s(j, "speed_bands");
    s.get("walking_max", c.kinematics.bands.walking_max);
    s.get("jogging_max", c.kinematics.bands.jogging_max);
    s.get("running_max", c.kinematics.bands.running_max);
    s.finish();
  }
  {
    auto& k = c.kinematics;
    Section s(j, "kinematics");
    s.get("smoothing_window", k.smoothing_window);
    s.get("outlier_cap_kmh", k.outlier_cap_kmh);
    s.get("min_interval_ms", k.min_interval_ms);
    s.get("max_gap_ms", k.max_gap_ms);
    s.get("nominal_dt_ms", k.nominal_dt_ms);
    s.get("min_signal_ms", k.min_signal_ms);
    s.finish();
  }
  {
    Section s(j, "tactical");
    std::string mode = "line_centroid";
    s.get("back_line", mode);
    if (mode == "line_centroid") {
      c.tactical.back_line = BackLineMode::LineCentroid;
    } else if (mode == "deepest_defender") {
      c.tactical.back_line = BackLineMode::DeepestDefender;
    } else {
      throw ValidationError("tactical.back_line must be line_centroid or deepest_defender");
    }
    s.get("frame_lookup_ms", c.tactical.frame_lookup_ms);
    s.finish();
  }
  {
    auto& p = c.possession;
    Section s(j, "possession");
    s.get("regain_window_ms", p.regain_window_ms);
    s.get("flip_events", p.flip_events);
    s.get("set_piece_ms", p.set_piece_ms);
    s.get("counter_ms", p.counter_ms);
    s.get("counter_advance_m", p.counter_advance_m);
    s.get("long_pass_m", p.long_pass_m);
    s.get("direct_play_ms", p.direct_play_ms);
    s.get("high_press_area_share", p.high_press_area_share);
    s.get("high_press_players", p.high_press_players);
    s.get("min_block_coverage", p.min_block_coverage);
    s.finish();
  }
  {
    auto& f = c.formation;
    Section s(j, "formation");
    s.get("window_ms", f.window_ms);
    s.get("stride_ms", f.stride_ms);
    s.get("min_phase_ms", f.min_phase_ms);
    s.get("min_visibility", f.min_visibility);
    s.get("min_player_visible_ms", f.min_player_visible_ms);
    std::string phase = "out_of_possession";
    s.get("phase", phase);
    if (phase == "out_of_possession") {
      f.phase = PhaseFilter::OutOfPossession;
    } else if (phase == "in_possession") {
      f.phase = PhaseFilter::InPossession;
    } else {
      throw ValidationError("formation.phase must be in_possession or out_of_possession");
    }
    if (const json* t = s.raw("templates")) f.templates = templates_from_json(*t);
    s.finish();
  }
  {
    Section s(j, "valuation");
    s.get("after_peak_ms", c.valuation.after_peak_ms);
    s.get("frame_tolerance_ms", c.valuation.frame_tolerance_ms);
    s.get("influence_min_samples", c.influence_min_samples);
    s.get("epv", c.epv);
    s.finish();
  }
  {
    auto& a = c.aggregation;
    Section s(j, "aggregation");
    s.get("min_role_minutes", a.min_role_minutes);
    s.get("min_role_peers", a.min_role_peers);
    s.get("min_team_matches", a.min_team_matches);
    s.get("rolling_minutes", a.rolling_minutes);
    s.get("reception_lookback_ms", c.reception_lookback_ms);
    s.finish();
  }
  {
    Section s(j, "ingest");
    s.get("event_tolerance_m", c.event_tolerance_m);
    s.finish();
  }
  c.aggregation.bands = c.kinematics.bands;
  c.validate();
  return c;
}

Config load_config(const std::filesystem::path& path) {
  try {
    return config_from_json(json::parse(read_file(path)));
  } catch (const json::parse_error& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

std::string sha256_hex(std::string_view data) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest.data(), &len, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xF]);
  }
  return out;
}

std::string config_hash(const Config& config) { return sha256_hex(config_to_json(config).dump()); }

} // namespace runlens
