#include "aoicache/tiny_mdp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "aoicache/errors.hpp"

namespace aoicache {
namespace {

double binomial_count(int n, int k) {
  return std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0));
}

void enumerate_compositions(int remaining, std::size_t slot, std::vector<int>& current,
                            std::vector<std::vector<int>>& out) {
  if (slot + 1 == current.size()) {
    current[slot] = remaining;
    out.push_back(current);
    return;
  }
  for (int n = remaining; n >= 0; --n) {
    current[slot] = n;
    enumerate_compositions(remaining - n, slot + 1, current, out);
  }
}

}  // namespace

void TinyMdpSpec::validate() const {
  if (num_sensors < 1 || num_sensors > 3) throw ContractViolation("tiny MDP: F must lie in [1, 3]");
  if (t_max < 1 || t_max > 6) throw ContractViolation("tiny MDP: t_max must lie in [1, 6]");
  if (num_users < 0) throw ContractViolation("tiny MDP: U must be >= 0");
  if (probabilities.size() != static_cast<std::size_t>(num_sensors)) {
    throw ContractViolation("tiny MDP: need one probability per content");
  }
  const double total = std::accumulate(probabilities.begin(), probabilities.end(), 0.0);
  if (std::abs(total - 1.0) > 1e-9) throw ContractViolation("tiny MDP: probabilities must sum to 1");
  if (energies.size() != static_cast<std::size_t>(num_sensors) + 1 || energies[0] != 0.0) {
    throw ContractViolation("tiny MDP: energies need F + 1 entries with energies[0] = 0");
  }
  if (!(gamma >= 0.0 && gamma < 1.0)) throw ContractViolation("tiny MDP: gamma must lie in [0, 1)");
  if (!(eta >= 0.0)) throw ContractViolation("tiny MDP: eta must be >= 0");

  const double aoi_states = std::pow(static_cast<double>(t_max), num_sensors);
  // compositions of U into F parts: C(U + F - 1, F - 1)
  const double request_states = binomial_count(num_users + num_sensors - 1, num_sensors - 1);
  const double states = aoi_states * std::round(request_states);
  if (states > static_cast<double>(kMaxTinyStates)) {
    std::ostringstream msg;
    msg << "tiny MDP state space has " << states << " states, limit is " << kMaxTinyStates;
    throw StateSpaceTooLarge(msg.str());
  }
}

TinyMdpSpec TinyMdpSpec::from_env(const CacheEnv& env, double gamma) {
  const EnvConfig& c = env.config();
  if (c.p_shuffle != 0.0 || c.p_skew != 0.0 || c.random_users) {
    throw ContractViolation("tiny MDP needs frozen popularity and a fixed user count");
  }
  TinyMdpSpec spec;
  spec.num_sensors = c.num_sensors;
  spec.t_max = c.t_max;
  spec.num_users = c.num_users;
  spec.probabilities = zipf_probabilities(env.popularity().ranks, env.popularity().skew);
  spec.eta = c.eta;
  spec.energies = env.energies();
  spec.gamma = gamma;
  spec.validate();
  return spec;
}

TinyStateSpace::TinyStateSpace(const TinyMdpSpec& spec) : t_max_(spec.t_max) {
  spec.validate();
  const auto F = static_cast<std::size_t>(spec.num_sensors);
  std::vector<int> aoi(F, 1);
  for (;;) {
    aoi_vectors_.push_back(aoi);
    std::size_t f = 0;
    while (f < F && aoi[f] == spec.t_max) aoi[f++] = 1;
    if (f == F) break;
    ++aoi[f];
  }
  std::vector<int> current(F, 0);
  enumerate_compositions(spec.num_users, 0, current, request_vectors_);
  for (const auto& counts : request_vectors_) {
    double logp = std::lgamma(spec.num_users + 1.0);
    for (std::size_t f = 0; f < F; ++f) {
      logp -= std::lgamma(counts[f] + 1.0);
      if (counts[f] > 0) logp += counts[f] * std::log(spec.probabilities[f]);
    }
    const bool impossible = [&] {
      for (std::size_t f = 0; f < F; ++f)
        if (counts[f] > 0 && spec.probabilities[f] == 0.0) return true;
      return false;
    }();
    request_pmf_.push_back(impossible ? 0.0 : std::exp(logp));
  }
}

std::size_t TinyStateSpace::aoi_index(std::span<const int> aoi) const {
  std::size_t idx = 0;
  for (std::size_t f = aoi.size(); f-- > 0;) {
    if (aoi[f] < 1 || aoi[f] > t_max_) throw ContractViolation("tiny MDP: AoI outside [1, t_max]");
    idx = idx * static_cast<std::size_t>(t_max_) + static_cast<std::size_t>(aoi[f] - 1);
  }
  return idx;
}

std::size_t TinyStateSpace::index(const MdpState& state) const {
  const std::size_t a = aoi_index(state.aoi);
  for (std::size_t r = 0; r < request_vectors_.size(); ++r) {
    if (request_vectors_[r] == state.requests) return a * request_count() + r;
  }
  throw ContractViolation("tiny MDP: request vector not in the enumerated support");
}

MdpState TinyStateSpace::state(std::size_t index) const {
  if (index >= size()) throw ContractViolation("tiny MDP: state index out of range");
  return {aoi_vectors_[index / request_count()], request_vectors_[index % request_count()]};
}

namespace {

// Tables shared by value iteration and policy evaluation.
struct TinyModel {
  TinyStateSpace space;
  std::vector<std::vector<std::size_t>> next_aoi;  // [aoi][action]
  std::vector<std::vector<double>> aoi_cost;       // [aoi][request]

  explicit TinyModel(const TinyMdpSpec& spec) : space(spec) {
    const int actions = spec.num_sensors + 1;
    for (const auto& aoi : space.aoi_vectors()) {
      std::vector<std::size_t> row;
      for (int a = 0; a < actions; ++a) row.push_back(space.aoi_index(advance_aoi(aoi, a, spec.t_max)));
      next_aoi.push_back(std::move(row));
      std::vector<double> costs;
      for (const auto& req : space.request_vectors()) costs.push_back(average_aoi(aoi, req));
      aoi_cost.push_back(std::move(costs));
    }
  }

  // W(o') = E_{N'}[-avg_aoi(o', N') + gamma V(o', N')]
  std::vector<double> continuation(const TinyMdpSpec& spec, std::span<const double> values) const {
    const std::size_t R = space.request_count();
    std::vector<double> w(space.aoi_count(), 0.0);
    for (std::size_t o = 0; o < space.aoi_count(); ++o) {
      double acc = 0.0;
      for (std::size_t r = 0; r < R; ++r) {
        acc += space.request_pmf()[r] * (-aoi_cost[o][r] + spec.gamma * values[o * R + r]);
      }
      w[o] = acc;
    }
    return w;
  }
};

}  // namespace

ValueIterationResult value_iteration(const TinyMdpSpec& spec, double tolerance,
                                     int max_iterations) {
  const TinyModel model(spec);
  const std::size_t S = model.space.size();
  const std::size_t R = model.space.request_count();
  const int actions = spec.num_sensors + 1;

  ValueIterationResult result;
  result.values.assign(S, 0.0);
  result.q_values = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(S), actions);
  std::vector<double> next(S);
  for (int it = 0; it < max_iterations; ++it) {
    const auto w = model.continuation(spec, result.values);
    double delta = 0.0;
    for (std::size_t s = 0; s < S; ++s) {
      const std::size_t o = s / R;
      double best = -std::numeric_limits<double>::infinity();
      for (int a = 0; a < actions; ++a) {
        const double q = w[model.next_aoi[o][static_cast<std::size_t>(a)]] -
                         spec.eta * spec.energies[static_cast<std::size_t>(a)];
        result.q_values(static_cast<Eigen::Index>(s), a) = q;
        best = std::max(best, q);
      }
      next[s] = best;
      delta = std::max(delta, std::abs(best - result.values[s]));
    }
    result.values.swap(next);
    result.deltas.push_back(delta);
    result.iterations = it + 1;
    if (delta < tolerance) break;
  }
  // Refresh Q against the final values so it is consistent with them.
  const auto w = model.continuation(spec, result.values);
  result.policy.assign(S, 0);
  for (std::size_t s = 0; s < S; ++s) {
    const std::size_t o = s / R;
    int best_action = 0;
    for (int a = 0; a < actions; ++a) {
      const double q = w[model.next_aoi[o][static_cast<std::size_t>(a)]] -
                       spec.eta * spec.energies[static_cast<std::size_t>(a)];
      result.q_values(static_cast<Eigen::Index>(s), a) = q;
      if (q > result.q_values(static_cast<Eigen::Index>(s), best_action)) best_action = a;
    }
    result.policy[s] = best_action;
  }
  result.initial_value = initial_state_value(spec, result.values);
  return result;
}

std::vector<double> evaluate_policy_exact(
    const TinyMdpSpec& spec, const std::function<int(const MdpState&)>& policy,
    double tolerance) {
  const TinyModel model(spec);
  const std::size_t S = model.space.size();
  const std::size_t R = model.space.request_count();
  std::vector<int> chosen(S);
  for (std::size_t s = 0; s < S; ++s) {
    chosen[s] = policy(model.space.state(s));
    if (chosen[s] < 0 || chosen[s] > spec.num_sensors) {
      throw ContractViolation("evaluate_policy_exact: policy returned an invalid action");
    }
  }
  std::vector<double> values(S, 0.0);
  std::vector<double> next(S);
  for (int it = 0; it < 10'000'000; ++it) {
    const auto w = model.continuation(spec, values);
    double delta = 0.0;
    for (std::size_t s = 0; s < S; ++s) {
      const auto a = static_cast<std::size_t>(chosen[s]);
      next[s] = w[model.next_aoi[s / R][a]] - spec.eta * spec.energies[a];
      delta = std::max(delta, std::abs(next[s] - values[s]));
    }
    values.swap(next);
    if (delta < tolerance) break;
  }
  return values;
}

double initial_state_value(const TinyMdpSpec& spec, std::span<const double> values) {
  const TinyStateSpace space(spec);
  const std::vector<int> fresh(static_cast<std::size_t>(spec.num_sensors), 1);
  const std::size_t o = space.aoi_index(fresh);
  double v = 0.0;
  for (std::size_t r = 0; r < space.request_count(); ++r) {
    v += space.request_pmf()[r] * values[o * space.request_count() + r];
  }
  return v;
}

RolloutEstimate discounted_rollout_return(const EnvFactory& make_env,
                                          const PolicyFactory& make_policy,
                                          double gamma, std::int64_t horizon,
                                          int rollouts) {
  if (rollouts < 1 || horizon < 1) throw ContractViolation("discounted_rollout_return: empty run");
  std::vector<double> returns;
  returns.reserve(static_cast<std::size_t>(rollouts));
  for (int r = 0; r < rollouts; ++r) {
    CacheEnv env = make_env(r);
    auto policy = make_policy(env, r);
    double discount = 1.0;
    double total = 0.0;
    for (std::int64_t t = 0; t < horizon; ++t) {
      const int action = policy->select(env);
      total += discount * env.step(action).reward;
      discount *= gamma;
    }
    returns.push_back(total);
  }
  RolloutEstimate est;
  est.rollouts = rollouts;
  est.mean = mean_of(returns);
  est.std_error = sample_stddev(returns) / std::sqrt(static_cast<double>(rollouts));
  return est;
}

}  // namespace aoicache
