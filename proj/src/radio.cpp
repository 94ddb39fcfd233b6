#include "aoicache/radio.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "aoicache/errors.hpp"
#include "aoicache/special_functions.hpp"

namespace aoicache {
namespace {

void require_positive(double value, const char* name) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    std::ostringstream msg;
    msg << name << " must be positive and finite, got " << value;
    throw ContractViolation(msg.str());
  }
}

double checked(double value, const char* what, const SensorProfile& profile,
               const RadioConfig& radio) {
  if (std::isfinite(value)) return value;
  std::ostringstream msg;
  msg << what << " is not finite (P=" << profile.tx_power_w
      << " W, chi^2=" << profile.path_gain_sq
      << ", s=" << profile.content_bits << " bits, B=" << radio.bandwidth_hz
      << " Hz, N0=" << radio.noise_psd_w_per_hz
      << " W/Hz, gamma_th=" << radio.snr_threshold << ")";
  throw NumericalError(msg.str());
}

}  // namespace

void SensorProfile::validate() const {
  require_positive(tx_power_w, "tx_power_w");
  require_positive(path_gain_sq, "path_gain_sq");
  require_positive(content_bits, "content_bits");
}

void RadioConfig::validate() const {
  require_positive(bandwidth_hz, "bandwidth_hz");
  require_positive(noise_psd_w_per_hz, "noise_psd_w_per_hz");
  require_positive(snr_threshold, "snr_threshold");
}

double PathLossModel::loss_db(double distance_m) const {
  require_positive(distance_m, "distance_m");
  return intercept_db + slope_db * std::log10(distance_m) - antenna_gain_db;
}

double PathLossModel::path_gain_sq(double distance_m) const {
  return db_to_linear(-loss_db(distance_m));
}

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
double linear_to_db(double linear) { return 10.0 * std::log10(linear); }
double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
double watts_to_dbm(double watts) { return 10.0 * std::log10(watts) + 30.0; }

double mean_snr(const SensorProfile& profile, const RadioConfig& radio) {
  return profile.tx_power_w * profile.path_gain_sq /
         (radio.noise_psd_w_per_hz * radio.bandwidth_hz);
}

double rate_threshold(const RadioConfig& radio) {
  return std::log2(1.0 + radio.snr_threshold);
}

double success_probability(double beta, double snr_threshold) {
  require_positive(beta, "beta");
  return std::exp(-snr_threshold / (2.0 * beta));
}

double outage_probability(double beta, double snr_threshold) {
  require_positive(beta, "beta");
  return -std::expm1(-snr_threshold / (2.0 * beta));
}

double sample_snr(double beta, Rng& rng) {
  // |kappa|^2 for a unit-scale Rayleigh amplitude is exponential, mean 2.
  std::exponential_distribution<double> fading_power(0.5);
  return beta * fading_power(rng);
}

double rho(double x, double beta) {
  require_positive(beta, "beta");
  return exp_integral_e1(x / (2.0 * beta));
}

double expected_spectral_efficiency(double beta, double snr_threshold) {
  require_positive(beta, "beta");
  require_positive(snr_threshold, "snr_threshold");
  const double scale = 2.0 * beta;
  const double survive = std::exp(-snr_threshold / scale);
  // e^{1/(2b)} E1((1+g)/(2b)) = e^{-g/(2b)} * [e^y E1(y)], y = (1+g)/(2b)
  const double tail = survive * exp_integral_e1_scaled((1.0 + snr_threshold) / scale);
  return std::log2(1.0 + snr_threshold) * survive + tail / std::numbers::ln2;
}

double avg_energy_corrected(const SensorProfile& profile,
                            const RadioConfig& radio) {
  profile.validate();
  radio.validate();
  const double beta = checked(mean_snr(profile, radio), "beta", profile, radio);
  const double efficiency = checked(
      expected_spectral_efficiency(beta, radio.snr_threshold),
      "expected spectral efficiency", profile, radio);
  const double rate = radio.bandwidth_hz * efficiency;
  const double energy = profile.tx_power_w * profile.content_bits / rate;
  if (!(energy > 0.0)) {
    throw NumericalError("avg_energy_corrected: expected rate underflowed to zero");
  }
  return checked(energy, "average energy", profile, radio);
}

double avg_energy_paper_literal(const SensorProfile& profile,
                                const RadioConfig& radio) {
  profile.validate();
  radio.validate();
  const double beta = checked(mean_snr(profile, radio), "beta", profile, radio);
  const double g = radio.snr_threshold;
  const double ln2 = std::numbers::ln2;
  const double survive = std::exp(-g / (2.0 * beta));
  const double exp_rho =
      survive * exp_integral_e1_scaled((1.0 + g) / (2.0 * beta));
  const double denominator =
      ln2 * rate_threshold(radio) * survive + radio.bandwidth_hz * exp_rho;
  return checked(ln2 * profile.tx_power_w * profile.content_bits / denominator,
                 "literal average energy", profile, radio);
}

MonteCarloEnergy mc_energy_oracle(const SensorProfile& profile,
                                  const RadioConfig& radio,
                                  std::size_t n_samples, Rng& rng) {
  if (n_samples == 0) throw ContractViolation("mc_energy_oracle: n_samples must be >= 1");
  profile.validate();
  radio.validate();
  const double beta = mean_snr(profile, radio);
  double sum = 0.0;
  double sum_sq = 0.0;
  std::size_t successes = 0;
  for (std::size_t i = 0; i < n_samples; ++i) {
    const double snr = sample_snr(beta, rng);
    if (snr < radio.snr_threshold) continue;
    const double rate = radio.bandwidth_hz * std::log2(1.0 + snr);
    sum += rate;
    sum_sq += rate * rate;
    ++successes;
  }
  MonteCarloEnergy out;
  out.samples = n_samples;
  const double n = static_cast<double>(n_samples);
  out.success_fraction = successes / n;
  out.mean_rate_bps = sum / n;
  if (successes == 0) {
    out.energy_j = std::numeric_limits<double>::infinity();
    out.std_error_j = std::numeric_limits<double>::infinity();
    return out;
  }
  const double variance =
      n_samples > 1 ? std::max(0.0, (sum_sq - sum * sum / n) / (n - 1.0)) : 0.0;
  const double rate_se = std::sqrt(variance / n);
  out.energy_j = profile.tx_power_w * profile.content_bits / out.mean_rate_bps;
  // delta method: se(1/R) ~ se(R) / R^2
  out.std_error_j = out.energy_j * rate_se / out.mean_rate_bps;
  return out;
}

EnergyTable EnergyTable::build(std::span<const SensorProfile> sensors,
                               const RadioConfig& radio) {
  EnergyTable table;
  table.rate_threshold = aoicache::rate_threshold(radio);
  table.avg_energy_j.push_back(0.0);
  for (const auto& sensor : sensors) {
    table.mean_snr.push_back(aoicache::mean_snr(sensor, radio));
    table.avg_energy_j.push_back(avg_energy_corrected(sensor, radio));
  }
  return table;
}

double EnergyTable::energy(int action) const {
  if (action < 0 || static_cast<std::size_t>(action) >= avg_energy_j.size()) {
    throw ContractViolation("EnergyTable::energy: action out of range");
  }
  return avg_energy_j[static_cast<std::size_t>(action)];
}

}  // namespace aoicache
