#include "aoicache/policies.hpp"

#include <algorithm>
#include <cctype>
#include <string>

#include "aoicache/errors.hpp"

namespace aoicache {

std::string_view to_string(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::kDqn: return "dqn";
    case PolicyKind::kMpu: return "mpu";
    case PolicyKind::kOu: return "ou";
    case PolicyKind::kRu: return "ru";
    case PolicyKind::kOracleVi: return "vi";
  }
  return "unknown";
}

PolicyKind parse_policy_kind(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  for (auto kind : {PolicyKind::kDqn, PolicyKind::kMpu, PolicyKind::kOu,
                    PolicyKind::kRu, PolicyKind::kOracleVi}) {
    if (lower == to_string(kind)) return kind;
  }
  throw ConfigError("policy", "unknown policy '" + std::string(name) + "'");
}

int mpu_action(const MdpState& state) {
  int best = 0;
  int best_count = 0;
  for (std::size_t f = 0; f < state.requests.size(); ++f) {
    if (state.requests[f] > best_count) {
      best_count = state.requests[f];
      best = static_cast<int>(f) + 1;
    }
  }
  return best;
}

int ou_action(const CacheEnv& env) {
  const RequestBatch& next = env.peek_next_requests();
  const auto& aoi = env.state().aoi;
  int best = 0;
  double best_cost = env.cost_of(advance_aoi(aoi, 0, env.config().t_max), next, 0);
  for (int a = 1; a < env.num_actions(); ++a) {
    const double c = env.cost_of(advance_aoi(aoi, a, env.config().t_max), next, a);
    if (c < best_cost) {
      best_cost = c;
      best = a;
    }
  }
  return best;
}

int ru_action(int num_sensors, Rng& rng) {
  if (num_sensors < 1) throw ContractViolation("ru_action: F must be >= 1");
  std::uniform_int_distribution<int> uniform(0, num_sensors);
  return uniform(rng);
}

int DqnPolicy::select(const CacheEnv& env) {
  return training_ ? agent_->act(env.state()) : agent_->greedy_action(env.state());
}

std::optional<double> DqnPolicy::observe(Transition t) {
  if (!training_) return std::nullopt;
  return agent_->observe(std::move(t));
}

std::vector<RunRecord> run_policy(CacheEnv& env, Policy& policy,
                                  std::int64_t epochs, int rep,
                                  const std::function<void(const RunRecord&)>& on_epoch) {
  std::vector<RunRecord> records;
  records.reserve(static_cast<std::size_t>(std::max<std::int64_t>(epochs, 0)));
  for (std::int64_t i = 0; i < epochs; ++i) {
    RunRecord rec;
    rec.epoch = env.epoch();
    rec.rep = rep;
    rec.epsilon = policy.epsilon();
    const int action = policy.select(env);
    if (policy.learns()) {
      MdpState state = env.state();
      StepOutcome out = env.step(action);
      rec.loss = policy.observe({std::move(state), action, out.next_state, out.reward});
      rec.reward = out.reward;
      rec.cost = out.cost;
      rec.aoi = out.aoi_term;
      rec.energy_j = out.energy_term;
    } else {
      const StepOutcome out = env.step(action);
      rec.reward = out.reward;
      rec.cost = out.cost;
      rec.aoi = out.aoi_term;
      rec.energy_j = out.energy_term;
    }
    rec.action = action;
    records.push_back(rec);
    if (on_epoch) on_epoch(rec);
  }
  return records;
}

ReplicationSummary summarize_replication(std::vector<RunRecord> records, int rep,
                                         std::size_t window, bool keep_records) {
  if (records.empty()) throw ContractViolation("summarize_replication: no records");
  window = std::min(window, records.size());
  ReplicationSummary s;
  s.rep = rep;
  const std::size_t start = records.size() - window;
  std::vector<double> rewards;
  rewards.reserve(records.size());
  for (const auto& r : records) rewards.push_back(r.reward);
  double cost = 0.0, aoi = 0.0, energy = 0.0, reward = 0.0;
  for (std::size_t i = start; i < records.size(); ++i) {
    reward += records[i].reward;
    cost += records[i].cost;
    aoi += records[i].aoi;
    energy += records[i].energy_j;
  }
  const double n = static_cast<double>(window);
  s.reward = reward / n;
  s.cost = cost / n;
  s.aoi = aoi / n;
  s.energy_j = energy / n;
  s.moving_average = moving_average(rewards, window);
  if (keep_records) s.records = std::move(records);
  return s;
}

PolicyEvaluation aggregate_replications(std::vector<ReplicationSummary> reps,
                                        std::size_t window, bool truncated) {
  PolicyEvaluation eval;
  eval.window = window;
  eval.window_truncated = truncated;
  std::vector<double> reward, cost, aoi, energy;
  for (const auto& r : reps) {
    reward.push_back(r.reward);
    cost.push_back(r.cost);
    aoi.push_back(r.aoi);
    energy.push_back(r.energy_j);
  }
  eval.reward = mean_interval(reward);
  eval.cost = mean_interval(cost);
  eval.aoi = mean_interval(aoi);
  eval.energy_j = mean_interval(energy);
  eval.replications = std::move(reps);
  return eval;
}

PolicyEvaluation evaluate_policy(const EnvFactory& make_env,
                                 const PolicyFactory& make_policy,
                                 const EvaluationOptions& options) {
  if (options.epochs < 1 || options.replications < 1) {
    throw ContractViolation("evaluate_policy: need at least one epoch and one replication");
  }
  const bool truncated = options.window > static_cast<std::size_t>(options.epochs);
  const std::size_t window =
      truncated ? static_cast<std::size_t>(options.epochs) : options.window;
  std::vector<ReplicationSummary> reps(static_cast<std::size_t>(options.replications));
  parallel_for(reps.size(), options.threads, [&](std::size_t i) {
    const int rep = static_cast<int>(i);
    CacheEnv env = make_env(rep);
    auto policy = make_policy(env, rep);
    auto records = run_policy(env, *policy, options.epochs, rep);
    reps[i] = summarize_replication(std::move(records), rep, window, options.keep_records);
  });
  return aggregate_replications(std::move(reps), window, truncated);
}

}  // namespace aoicache
