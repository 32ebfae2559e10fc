#pragma once

// Every rule constant of the pipeline in one versioned record. The canonical
// JSON form is hashed into the artifact manifest.

#include "runlens/aggregation.hpp"
#include "runlens/formations.hpp"
#include "runlens/kinematics.hpp"
#include "runlens/possession.hpp"
#include "runlens/tactical.hpp"
#include "runlens/valuation.hpp"

#include <filesystem>
#include <string>

#include <json.hpp>

namespace runlens {

struct Config {
  static constexpr int kVersion = 1;

  PitchSpec pitch;
  KinematicsConfig kinematics;
  TacticalConfig tactical;
  PossessionConfig possession;
  FormationConfig formation;
  ValuationConfig valuation;
  AggregationConfig aggregation;
  std::size_t influence_min_samples = 10;
  std::int64_t reception_lookback_ms = 2000;
  double event_tolerance_m = 2.0;
  std::string epv = "surrogate"; // or a path to a t_ms,team,value table per match

  void validate() const;
};

nlohmann::json config_to_json(const Config& config);
/// Missing keys keep their defaults; unknown keys are rejected.
Config config_from_json(const nlohmann::json& j);
Config load_config(const std::filesystem::path& path);

/// SHA-256 of the canonical JSON dump.
std::string config_hash(const Config& config);

std::string sha256_hex(std::string_view data);

} // namespace runlens
