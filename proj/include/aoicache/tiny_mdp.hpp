#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "aoicache/env.hpp"
#include "aoicache/policies.hpp"

namespace aoicache {

inline constexpr std::size_t kMaxTinyStates = 1'000'000;

/// A small, fully enumerable instance of the cache-update MDP with frozen
/// popularity: each epoch U users draw i.i.d. from `probabilities`.
struct TinyMdpSpec {
  int num_sensors = 2;
  int t_max = 4;
  int num_users = 2;
  std::vector<double> probabilities;  // size F, sums to 1
  double eta = 1.0;
  std::vector<double> energies;       // size F + 1, energies[0] == 0
  double gamma = 0.99;

  // Throws ContractViolation for malformed specs, StateSpaceTooLarge when
  // the enumeration exceeds kMaxTinyStates.
  void validate() const;

  // Reads F, t_max, U, eta, energies and the current Zipf law from `env`.
  // The environment must have frozen popularity (p_shuffle = p_skew = 0,
  // a single skew value) and a fixed user count.
  static TinyMdpSpec from_env(const CacheEnv& env, double gamma);
};

/// Enumeration of (AoI vector, request vector) states.
class TinyStateSpace {
 public:
  explicit TinyStateSpace(const TinyMdpSpec& spec);

  std::size_t aoi_count() const { return aoi_vectors_.size(); }
  std::size_t request_count() const { return request_vectors_.size(); }
  std::size_t size() const { return aoi_count() * request_count(); }

  std::size_t index(const MdpState& state) const;
  MdpState state(std::size_t index) const;
  std::size_t aoi_index(std::span<const int> aoi) const;

  const std::vector<std::vector<int>>& aoi_vectors() const { return aoi_vectors_; }
  const std::vector<std::vector<int>>& request_vectors() const { return request_vectors_; }
  // Multinomial probability of each request vector.
  const std::vector<double>& request_pmf() const { return request_pmf_; }

 private:
  int t_max_;
  std::vector<std::vector<int>> aoi_vectors_;
  std::vector<std::vector<int>> request_vectors_;
  std::vector<double> request_pmf_;
};

struct ValueIterationResult {
  Eigen::MatrixXd q_values;    // states x actions
  std::vector<double> values;  // max_a Q
  std::vector<int> policy;     // greedy, ties to the lowest action
  int iterations = 0;
  std::vector<double> deltas;  // sup-norm change per sweep
  double initial_value = 0.0;  // E[V(S^0)] with all AoI equal to 1
};

// Iterates the Bellman optimality operator until the sup-norm change falls
// below `tolerance`.
ValueIterationResult value_iteration(const TinyMdpSpec& spec,
                                     double tolerance = 1e-9,
                                     int max_iterations = 1'000'000);

// Exact discounted value of a deterministic state-feedback policy.
std::vector<double> evaluate_policy_exact(
    const TinyMdpSpec& spec, const std::function<int(const MdpState&)>& policy,
    double tolerance = 1e-9);

// Expected value at the initial state distribution (AoI all 1, requests
// drawn from the multinomial).
double initial_state_value(const TinyMdpSpec& spec, std::span<const double> values);

struct RolloutEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  int rollouts = 0;
};

// Monte-Carlo discounted return sum_t gamma^t R^{t+1} over `horizon` steps,
// averaged over `rollouts` fresh environments make_env(0..rollouts-1).
RolloutEstimate discounted_rollout_return(const EnvFactory& make_env,
                                          const PolicyFactory& make_policy,
                                          double gamma, std::int64_t horizon,
                                          int rollouts);

}  // namespace aoicache
