#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "aoicache/rng.hpp"

namespace aoicache {

struct EnvConfig {
  int num_sensors = 20;         // F
  int t_max = 100;              // AoI cap
  double eta = 1.0;             // energy weight in the cost
  int num_users = 100;          // U
  // When set, the user count of each epoch is drawn uniformly from {0..U}
  // instead of being exactly U.
  bool random_users = false;
  std::vector<double> skew_set{0.5, 1.0, 1.5, 2.0};
  double p_shuffle = 0.1;       // per-epoch probability of one rank swap
  double p_skew = 0.05;         // per-epoch probability of a skew redraw
  // Starting rank order (a permutation of 1..F); empty draws one at random.
  std::vector<int> initial_ranks;
  std::uint64_t seed = 1;

  // Throws ConfigError naming the offending field.
  void validate() const;
};

/// Per-content freshness bookkeeping at the edge node.
struct CacheState {
  std::vector<int> aoi;                         // o_f, in [1, t_max]
  std::vector<std::int64_t> generation_epoch;   // v_f
  std::int64_t epoch = 0;                       // t
};

struct PopularityState {
  std::vector<int> ranks;   // ranks[f] is the Zipf rank of content f, 1-based
  double skew = 1.0;        // kappa
  Rng rng;                  // drives the rank/skew evolution only
};

struct RequestBatch {
  std::vector<int> counts;  // N_f
  int total = 0;
};

/// System state presented to a policy: AoI and the requests just observed.
struct MdpState {
  std::vector<int> aoi;
  std::vector<int> requests;

  std::size_t num_sensors() const { return aoi.size(); }
  friend bool operator==(const MdpState&, const MdpState&) = default;
};

struct StepOutcome {
  MdpState next_state;
  double reward = 0.0;       // always -cost
  double cost = 0.0;         // aoi_term + eta * energy_term
  double aoi_term = 0.0;     // request-weighted average AoI at t+1
  double energy_term = 0.0;  // joules spent by the chosen update (0 for A = 0)
  int action = 0;
};

// min(max(t - v_f, 1), t_max)
int compute_aoi(std::int64_t t, std::int64_t generation_epoch, int t_max);

// Request-weighted mean AoI; 0 when no requests arrived.
double average_aoi(std::span<const int> aoi, std::span<const int> requests);

// AoI after one epoch under `action` (0 = no update, f in 1..F refreshes
// content f). Throws ContractViolation if the action is out of range.
std::vector<int> advance_aoi(std::span<const int> aoi, int action, int t_max);

// p_f proportional to rank_f^{-skew}.
std::vector<double> zipf_probabilities(std::span<const int> ranks, double skew);

// One step of the popularity Markov chain: with probability p_shuffle swap
// the ranks of two distinct contents; independently with probability p_skew
// redraw the skew uniformly from skew_set.
PopularityState evolve_popularity(PopularityState state, const EnvConfig& config);

// `users` independent Zipf draws tallied per content.
RequestBatch sample_requests(const PopularityState& popularity, int users,
                             Rng& rng);

/// Edge-cache update environment. Actions are 0 (idle) or 1..F.
///
/// The environment keeps the next epoch's request batch sampled ahead of
/// time, so `peek_next_requests()` is exact and free of side effects, and all
/// randomness is independent of the actions taken. Two environments built
/// from the same config and energies therefore see the same request
/// sequence whatever the policy does.
class CacheEnv {
 public:
  // `energies` has F + 1 entries, energies[0] == 0.
  CacheEnv(EnvConfig config, std::vector<double> energies);

  StepOutcome step(int action);

  const MdpState& state() const { return state_; }
  const RequestBatch& peek_next_requests() const { return pending_; }
  const CacheState& cache() const { return cache_; }
  const PopularityState& popularity() const { return popularity_; }
  const EnvConfig& config() const { return config_; }
  const std::vector<double>& energies() const { return energies_; }

  int num_sensors() const { return config_.num_sensors; }
  int num_actions() const { return config_.num_sensors + 1; }
  std::int64_t epoch() const { return cache_.epoch; }

  // Cost of a hypothetical transition to `next_aoi` with `requests`.
  double cost_of(std::span<const int> next_aoi, const RequestBatch& requests,
                 int action) const;

 private:
  RequestBatch draw_requests();
  void check_action(int action) const;

  EnvConfig config_;
  std::vector<double> energies_;
  CacheState cache_;
  PopularityState popularity_;
  Rng request_rng_;
  MdpState state_;
  RequestBatch pending_;
};

}  // namespace aoicache
