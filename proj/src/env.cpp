#include "aoicache/env.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <string>

#include "aoicache/errors.hpp"

namespace aoicache {
namespace {

void require_probability(double p, const char* field) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw ConfigError(field, "must be a probability in [0, 1]");
  }
}

}  // namespace

void EnvConfig::validate() const {
  if (num_sensors < 1) throw ConfigError("num_sensors", "must be >= 1");
  if (t_max < 1) throw ConfigError("t_max", "must be >= 1");
  if (!(eta >= 0.0) || !std::isfinite(eta)) throw ConfigError("eta", "must be finite and >= 0");
  if (num_users < 0) throw ConfigError("num_users", "must be >= 0");
  if (skew_set.empty()) throw ConfigError("skew_set", "must be non-empty");
  for (double k : skew_set) {
    if (!(k >= 0.0) || !std::isfinite(k)) throw ConfigError("skew_set", "values must be finite and >= 0");
  }
  require_probability(p_shuffle, "p_shuffle");
  require_probability(p_skew, "p_skew");
  if (!initial_ranks.empty()) {
    std::vector<int> sorted = initial_ranks;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < sorted.size(); ++i) {
      if (sorted.size() != static_cast<std::size_t>(num_sensors) || sorted[i] != static_cast<int>(i) + 1) {
        throw ConfigError("initial_ranks", "must be a permutation of 1..num_sensors");
      }
    }
  }
}

int compute_aoi(std::int64_t t, std::int64_t generation_epoch, int t_max) {
  const std::int64_t age = std::max<std::int64_t>(t - generation_epoch, 1);
  return static_cast<int>(std::min<std::int64_t>(age, t_max));
}

double average_aoi(std::span<const int> aoi, std::span<const int> requests) {
  if (aoi.size() != requests.size()) {
    throw ContractViolation("average_aoi: AoI and request vectors differ in length");
  }
  long long weighted = 0;
  long long total = 0;
  for (std::size_t f = 0; f < aoi.size(); ++f) {
    weighted += static_cast<long long>(aoi[f]) * requests[f];
    total += requests[f];
  }
  if (total == 0) return 0.0;
  return static_cast<double>(weighted) / static_cast<double>(total);
}

std::vector<int> advance_aoi(std::span<const int> aoi, int action, int t_max) {
  if (action < 0 || static_cast<std::size_t>(action) > aoi.size()) {
    std::ostringstream msg;
    msg << "advance_aoi: action " << action << " outside {0.." << aoi.size() << "}";
    throw ContractViolation(msg.str());
  }
  std::vector<int> next(aoi.size());
  for (std::size_t f = 0; f < aoi.size(); ++f) {
    next[f] = std::min(aoi[f] + 1, t_max);
  }
  if (action > 0) next[static_cast<std::size_t>(action - 1)] = 1;
  return next;
}

std::vector<double> zipf_probabilities(std::span<const int> ranks, double skew) {
  std::vector<double> p(ranks.size());
  for (std::size_t f = 0; f < ranks.size(); ++f) {
    p[f] = std::pow(static_cast<double>(ranks[f]), -skew);
  }
  const double norm = std::accumulate(p.begin(), p.end(), 0.0);
  for (double& v : p) v /= norm;
  return p;
}

PopularityState evolve_popularity(PopularityState state, const EnvConfig& config) {
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  const auto n = state.ranks.size();
  // Both coins are always flipped so the stream position does not depend on
  // the outcomes.
  const bool shuffle = coin(state.rng) < config.p_shuffle;
  const bool reskew = coin(state.rng) < config.p_skew;
  if (shuffle && n >= 2) {
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    const std::size_t a = pick(state.rng);
    std::uniform_int_distribution<std::size_t> pick_other(0, n - 2);
    std::size_t b = pick_other(state.rng);
    if (b >= a) ++b;
    std::swap(state.ranks[a], state.ranks[b]);
  }
  if (reskew) {
    std::uniform_int_distribution<std::size_t> pick(0, config.skew_set.size() - 1);
    state.skew = config.skew_set[pick(state.rng)];
  }
  return state;
}

RequestBatch sample_requests(const PopularityState& popularity, int users,
                             Rng& rng) {
  if (users < 0) throw ContractViolation("sample_requests: users must be >= 0");
  RequestBatch batch;
  batch.counts.assign(popularity.ranks.size(), 0);
  if (users == 0) return batch;
  const auto p = zipf_probabilities(popularity.ranks, popularity.skew);
  std::discrete_distribution<int> choose(p.begin(), p.end());
  for (int u = 0; u < users; ++u) ++batch.counts[static_cast<std::size_t>(choose(rng))];
  batch.total = users;
  return batch;
}

CacheEnv::CacheEnv(EnvConfig config, std::vector<double> energies)
    : config_(std::move(config)), energies_(std::move(energies)) {
  config_.validate();
  const auto F = static_cast<std::size_t>(config_.num_sensors);
  if (energies_.size() != F + 1) {
    throw ContractViolation("CacheEnv: energy table must have F + 1 entries");
  }
  if (energies_[0] != 0.0) throw ContractViolation("CacheEnv: energies[0] must be 0");
  for (double e : energies_) {
    if (!(e >= 0.0) || !std::isfinite(e)) throw ContractViolation("CacheEnv: energies must be finite and >= 0");
  }

  popularity_.rng = make_rng(config_.seed, SeedStream::kPopularity);
  request_rng_ = make_rng(config_.seed, SeedStream::kRequests);

  if (config_.initial_ranks.empty()) {
    popularity_.ranks.resize(F);
    std::iota(popularity_.ranks.begin(), popularity_.ranks.end(), 1);
    std::shuffle(popularity_.ranks.begin(), popularity_.ranks.end(), popularity_.rng);
  } else {
    popularity_.ranks = config_.initial_ranks;
  }
  std::uniform_int_distribution<std::size_t> pick(0, config_.skew_set.size() - 1);
  popularity_.skew = config_.skew_set[pick(popularity_.rng)];

  // Every item starts fresh: generated one epoch before t = 0.
  cache_.epoch = 0;
  cache_.generation_epoch.assign(F, -1);
  cache_.aoi.assign(F, 1);

  state_.aoi = cache_.aoi;
  state_.requests = draw_requests().counts;
  popularity_ = evolve_popularity(std::move(popularity_), config_);
  pending_ = draw_requests();
}

RequestBatch CacheEnv::draw_requests() {
  int users = config_.num_users;
  if (config_.random_users) {
    std::uniform_int_distribution<int> count(0, config_.num_users);
    users = count(request_rng_);
  }
  return sample_requests(popularity_, users, request_rng_);
}

void CacheEnv::check_action(int action) const {
  if (action < 0 || action > config_.num_sensors) {
    std::ostringstream msg;
    msg << "CacheEnv: action " << action << " outside {0.." << config_.num_sensors << "}";
    throw ContractViolation(msg.str());
  }
}

double CacheEnv::cost_of(std::span<const int> next_aoi,
                         const RequestBatch& requests, int action) const {
  check_action(action);
  return average_aoi(next_aoi, requests.counts) +
         config_.eta * energies_[static_cast<std::size_t>(action)];
}

StepOutcome CacheEnv::step(int action) {
  check_action(action);
  const std::int64_t t = cache_.epoch;
  cache_.aoi = advance_aoi(cache_.aoi, action, config_.t_max);
  if (action > 0) cache_.generation_epoch[static_cast<std::size_t>(action - 1)] = t;
  cache_.epoch = t + 1;

  StepOutcome out;
  out.action = action;
  out.aoi_term = average_aoi(cache_.aoi, pending_.counts);
  out.energy_term = energies_[static_cast<std::size_t>(action)];
  out.cost = out.aoi_term + config_.eta * out.energy_term;
  out.reward = -out.cost;

  state_.aoi = cache_.aoi;
  state_.requests = std::move(pending_.counts);
  out.next_state = state_;

  popularity_ = evolve_popularity(std::move(popularity_), config_);
  pending_ = draw_requests();
  return out;
}

}  // namespace aoicache
