#pragma once

#include <vector>

#include <json.hpp>

#include "aoicache/config.hpp"
#include "aoicache/env.hpp"
#include "aoicache/radio.hpp"
#include "aoicache/rng.hpp"

namespace aoicache {

/// Sensor placement, content sizes and the derived energy table for one
/// experiment. Shared by every policy, eta value and replication.
struct Scenario {
  std::vector<SensorProfile> sensors;
  RadioConfig radio;
  EnergyTable energy;
  nlohmann::json metadata;
};

// Places sensors area-uniformly in the coverage disc (distance R sqrt(u),
// floored at min_distance_m), draws content sizes uniformly in the
// configured MB range (1 MB = 8e6 bits), applies per-sensor overrides, and
// precomputes the energy table.
Scenario build_scenario(const ExperimentConfig& config, Rng& rng);
Scenario build_scenario(const ExperimentConfig& config);

// Environment for one (eta, replication) cell. The request process depends
// only on (seed, rep).
EnvConfig env_config_for(const ExperimentConfig& config, double eta, int rep);
CacheEnv make_env(const ExperimentConfig& config, const Scenario& scenario,
                  double eta, int rep);

std::uint64_t agent_seed_for(const ExperimentConfig& config, int rep);
std::uint64_t policy_seed_for(const ExperimentConfig& config, int rep);

}  // namespace aoicache
