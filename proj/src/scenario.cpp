#include "aoicache/scenario.hpp"

#include <algorithm>
#include <cmath>

namespace aoicache {

Scenario build_scenario(const ExperimentConfig& config, Rng& rng) {
  const ScenarioConfig& sc = config.scenario;
  Scenario out;
  out.radio = config.radio;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> size_mb(sc.content_mb_min, sc.content_mb_max);
  nlohmann::json sensors = nlohmann::json::array();
  for (int f = 0; f < config.env.num_sensors; ++f) {
    // Draw both values even when overridden so overrides do not shift the
    // remaining sensors' draws.
    double distance = std::max(sc.radius_m * std::sqrt(unit(rng)), sc.min_distance_m);
    double content_mb = size_mb(rng);
    double power = sc.tx_power_w;
    if (static_cast<std::size_t>(f) < sc.sensors.size()) {
      const auto& ov = sc.sensors[static_cast<std::size_t>(f)];
      if (ov.distance_m) distance = *ov.distance_m;
      if (ov.content_mb) content_mb = *ov.content_mb;
      if (ov.tx_power_w) power = *ov.tx_power_w;
    }
    SensorProfile p;
    p.tx_power_w = power;
    p.distance_m = distance;
    p.path_gain_sq = sc.path_loss.path_gain_sq(distance);
    p.content_bits = content_mb * 8e6;
    out.sensors.push_back(p);
  }
  out.energy = EnergyTable::build(out.sensors, out.radio);

  for (std::size_t f = 0; f < out.sensors.size(); ++f) {
    const auto& p = out.sensors[f];
    const double beta = out.energy.mean_snr[f];
    sensors.push_back({
        {"index", f + 1},
        {"distance_m", p.distance_m},
        {"path_loss_db", sc.path_loss.loss_db(p.distance_m)},
        {"path_gain_sq", p.path_gain_sq},
        {"tx_power_w", p.tx_power_w},
        {"content_bits", p.content_bits},
        {"mean_snr", beta},
        {"success_probability", success_probability(beta, out.radio.snr_threshold)},
        {"outage_probability", outage_probability(beta, out.radio.snr_threshold)},
        {"avg_energy_j", out.energy.avg_energy_j[f + 1]},
        {"avg_energy_literal_j", avg_energy_paper_literal(p, out.radio)},
    });
  }
  out.metadata = {
      {"config", to_json(config)},
      {"rate_threshold", out.energy.rate_threshold},
      {"energy_table_j", out.energy.avg_energy_j},
      {"sensors", sensors},
  };
  return out;
}

Scenario build_scenario(const ExperimentConfig& config) {
  Rng rng = make_rng(config.seed, SeedStream::kScenario);
  return build_scenario(config, rng);
}

EnvConfig env_config_for(const ExperimentConfig& config, double eta, int rep) {
  EnvConfig env = config.env;
  env.eta = eta;
  env.seed = derive_seed(config.seed, static_cast<std::uint64_t>(SeedStream::kRequests),
                         static_cast<std::uint64_t>(rep));
  return env;
}

CacheEnv make_env(const ExperimentConfig& config, const Scenario& scenario,
                  double eta, int rep) {
  return CacheEnv(env_config_for(config, eta, rep), scenario.energy.avg_energy_j);
}

std::uint64_t agent_seed_for(const ExperimentConfig& config, int rep) {
  return derive_seed(config.seed, static_cast<std::uint64_t>(SeedStream::kAgent),
                     static_cast<std::uint64_t>(rep));
}

std::uint64_t policy_seed_for(const ExperimentConfig& config, int rep) {
  return derive_seed(config.seed, static_cast<std::uint64_t>(SeedStream::kPolicy),
                     static_cast<std::uint64_t>(rep));
}

}  // namespace aoicache
