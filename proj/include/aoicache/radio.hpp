#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "aoicache/rng.hpp"

namespace aoicache {

/// Physical parameters of one sensor's uplink.
struct SensorProfile {
  double tx_power_w = 0.1;
  double path_gain_sq = 1.0;   // chi_f^2, linear
  double content_bits = 8e8;
  double distance_m = 0.0;     // informational once path_gain_sq is set

  void validate() const;
};

/// Shared channel parameters. All values linear SI.
struct RadioConfig {
  double bandwidth_hz = 1e7;
  double noise_psd_w_per_hz = 0.0;
  double snr_threshold = 1.0;  // linear

  void validate() const;
};

/// Log-distance path loss: PL[dB] = intercept + slope * log10(d / 1 m),
/// minus the antenna gain.
struct PathLossModel {
  double intercept_db = 30.6;
  double slope_db = 36.7;
  double antenna_gain_db = 0.0;

  double loss_db(double distance_m) const;
  double path_gain_sq(double distance_m) const;
};

double db_to_linear(double db);
double linear_to_db(double linear);
double dbm_to_watts(double dbm);
double watts_to_dbm(double watts);

// beta_f = P chi^2 / (N0 B).
double mean_snr(const SensorProfile& profile, const RadioConfig& radio);

// r_th = log2(1 + gamma_th).
double rate_threshold(const RadioConfig& radio);

// P(gamma >= gamma_th) = exp(-gamma_th / (2 beta)) under Rayleigh fading
// with E|kappa|^2 = 2.
double success_probability(double beta, double snr_threshold);
double outage_probability(double beta, double snr_threshold);

// One received SNR draw: beta * |kappa|^2 with |kappa| ~ Rayleigh(sigma = 1).
double sample_snr(double beta, Rng& rng);

// rho(x) = \int_x^inf (1/t) exp(-t / (2 beta)) dt = E1(x / (2 beta)).
double rho(double x, double beta);

// E[log2(1 + gamma) ; gamma >= gamma_th] in bits/s/Hz.
double expected_spectral_efficiency(double beta, double snr_threshold);

// Average upload energy P s / R with R = B * expected_spectral_efficiency.
// Throws NumericalError if any intermediate is non-finite.
double avg_energy_corrected(const SensorProfile& profile,
                            const RadioConfig& radio);

// The closed form exactly as originally printed, whose first denominator
// term lacks the bandwidth factor. Kept for comparison only; agrees with
// avg_energy_corrected when B = 1 Hz.
double avg_energy_paper_literal(const SensorProfile& profile,
                                const RadioConfig& radio);

struct MonteCarloEnergy {
  double energy_j = 0.0;        // +inf when every sample was in outage
  double std_error_j = 0.0;
  double mean_rate_bps = 0.0;
  double success_fraction = 0.0;
  std::size_t samples = 0;

  bool all_outage() const { return mean_rate_bps == 0.0; }
};

// Sample-mean estimate of the average energy from fading draws.
MonteCarloEnergy mc_energy_oracle(const SensorProfile& profile,
                                  const RadioConfig& radio,
                                  std::size_t n_samples, Rng& rng);

/// Per-sensor energy constants. Index 0 of `avg_energy_j` is the no-update
/// action and is always zero; sensor f lives at index f.
struct EnergyTable {
  std::vector<double> mean_snr;      // beta_f, one per sensor
  double rate_threshold = 0.0;       // r_th
  std::vector<double> avg_energy_j;  // size F + 1

  static EnergyTable build(std::span<const SensorProfile> sensors,
                           const RadioConfig& radio);

  std::size_t num_sensors() const { return mean_snr.size(); }
  double energy(int action) const;
};

}  // namespace aoicache
