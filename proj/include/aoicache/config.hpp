#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "aoicache/dqn.hpp"
#include "aoicache/env.hpp"
#include "aoicache/policies.hpp"
#include "aoicache/radio.hpp"

namespace aoicache {

enum class Profile { kPaper, kDesk };

std::string_view to_string(Profile profile);
Profile parse_profile(std::string_view name);

struct SensorOverride {
  std::optional<double> distance_m;
  std::optional<double> content_mb;
  std::optional<double> tx_power_w;
};

struct ScenarioConfig {
  double radius_m = 100.0;
  double min_distance_m = 1.0;   // keeps the log-distance model above 1 m
  double content_mb_min = 50.0;
  double content_mb_max = 100.0;
  double tx_power_w = 0.1;       // 20 dBm
  PathLossModel path_loss;
  std::vector<SensorOverride> sensors;  // optional, indexed by sensor
};

struct RunConfig {
  std::vector<PolicyKind> policies{PolicyKind::kDqn};
  std::int64_t epochs = 200000;
  int replications = 1;
  std::vector<double> eta_sweep;   // empty: use env.eta only
  std::size_t window = 10000;
  std::int64_t checkpoint_every = 0;  // 0 disables agent checkpoints
  std::string output_dir = "out";
  unsigned threads = 0;               // 0 = hardware concurrency
};

struct TinyConfig {
  int num_sensors = 2;
  int t_max = 4;
  int num_users = 2;
  double skew = 1.0;
  double eta = 1.0;
  double gamma = 0.99;
  std::vector<double> energies_j{3.5, 1.5};  // per sensor, joules
  double tolerance = 1e-9;
  std::int64_t dqn_epochs = 30000;
  std::int64_t rollout_horizon = 2000;
  int rollouts = 200;
};

/// Everything needed to reproduce a run. All physical quantities are held in
/// linear SI units; dB/dBm inputs are converted when the file is read.
struct ExperimentConfig {
  Profile profile = Profile::kPaper;
  std::uint64_t seed = 1;
  EnvConfig env;
  RadioConfig radio;
  ScenarioConfig scenario;
  AgentConfig agent;
  RunConfig run;
  TinyConfig tiny;

  // Sweep values to run; falls back to {env.eta}.
  std::vector<double> etas() const;

  // Throws ConfigError with a dotted field path.
  void validate() const;
};

// Built-in presets: kPaper uses the published setup, kDesk shrinks it for
// quick runs (F = 10, hidden (128, 64), Adam, 50k epochs, 5 replications).
ExperimentConfig default_config(Profile profile);

// Parses a JSON document over the preset selected by `profile_override`,
// else by the document's "profile" key, else kPaper. Unknown keys are
// rejected. Throws ConfigError (parse errors carry line and column).
ExperimentConfig parse_config(std::string_view text,
                              std::optional<Profile> profile_override = std::nullopt);
ExperimentConfig load_config(const std::filesystem::path& path,
                             std::optional<Profile> profile_override = std::nullopt);

// Canonical JSON (SI units) accepted back by parse_config.
nlohmann::json to_json(const ExperimentConfig& config);

nlohmann::json agent_config_to_json(const AgentConfig& config);
AgentConfig agent_config_from_json(const nlohmann::json& j);

}  // namespace aoicache
