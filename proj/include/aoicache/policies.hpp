#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "aoicache/dqn.hpp"
#include "aoicache/env.hpp"
#include "aoicache/replay_buffer.hpp"
#include "aoicache/rng.hpp"
#include "aoicache/run_record.hpp"
#include "aoicache/stats.hpp"

namespace aoicache {

enum class PolicyKind { kDqn, kMpu, kOu, kRu, kOracleVi };

std::string_view to_string(PolicyKind kind);
// Accepts "dqn", "mpu", "ou", "ru", "vi" (case-insensitive).
PolicyKind parse_policy_kind(std::string_view name);

// Most popular update: the content with the most requests in the current
// state, ties to the lowest index, 0 when nothing was requested.
int mpu_action(const MdpState& state);

// Oracle update: one-step cost minimiser using the environment's exact next
// request batch. Ties to the lowest action.
int ou_action(const CacheEnv& env);

// Uniform over {0..F}.
int ru_action(int num_sensors, Rng& rng);

class Policy {
 public:
  virtual ~Policy() = default;
  virtual PolicyKind kind() const = 0;
  virtual int select(const CacheEnv& env) = 0;
  // Learning hook; returns the training loss when one was computed.
  virtual std::optional<double> observe(Transition) { return std::nullopt; }
  virtual double epsilon() const { return 0.0; }
  virtual bool learns() const { return false; }
};

class MpuPolicy final : public Policy {
 public:
  PolicyKind kind() const override { return PolicyKind::kMpu; }
  int select(const CacheEnv& env) override { return mpu_action(env.state()); }
};

class OuPolicy final : public Policy {
 public:
  PolicyKind kind() const override { return PolicyKind::kOu; }
  int select(const CacheEnv& env) override { return ou_action(env); }
};

class RuPolicy final : public Policy {
 public:
  explicit RuPolicy(std::uint64_t seed) : rng_(seed) {}
  PolicyKind kind() const override { return PolicyKind::kRu; }
  int select(const CacheEnv& env) override { return ru_action(env.num_sensors(), rng_); }

 private:
  Rng rng_;
};

/// DQN as a policy. In training mode it explores and learns; in greedy
/// mode it acts on argmax Q with learning disabled.
class DqnPolicy final : public Policy {
 public:
  explicit DqnPolicy(std::shared_ptr<DqnAgent> agent, bool training = true)
      : agent_(std::move(agent)), training_(training) {}
  PolicyKind kind() const override { return PolicyKind::kDqn; }
  int select(const CacheEnv& env) override;
  std::optional<double> observe(Transition t) override;
  double epsilon() const override { return training_ ? agent_->epsilon() : 0.0; }
  bool learns() const override { return training_; }
  DqnAgent& agent() { return *agent_; }

 private:
  std::shared_ptr<DqnAgent> agent_;
  bool training_;
};

/// Deterministic state-feedback policy, e.g. a value-iteration greedy table.
class TablePolicy final : public Policy {
 public:
  explicit TablePolicy(std::function<int(const MdpState&)> rule)
      : rule_(std::move(rule)) {}
  PolicyKind kind() const override { return PolicyKind::kOracleVi; }
  int select(const CacheEnv& env) override { return rule_(env.state()); }

 private:
  std::function<int(const MdpState&)> rule_;
};

// Steps `env` for `epochs` epochs under `policy`, feeding transitions to
// policies that learn.
std::vector<RunRecord> run_policy(
    CacheEnv& env, Policy& policy, std::int64_t epochs, int rep,
    const std::function<void(const RunRecord&)>& on_epoch = {});

using EnvFactory = std::function<CacheEnv(int rep)>;
using PolicyFactory = std::function<std::unique_ptr<Policy>(const CacheEnv&, int rep)>;

struct EvaluationOptions {
  std::int64_t epochs = 10000;
  int replications = 1;
  std::size_t window = 10000;
  unsigned threads = 0;
  bool keep_records = true;
};

struct ReplicationSummary {
  int rep = 0;
  // Means over the final `window` epochs.
  double reward = 0.0;
  double cost = 0.0;
  double aoi = 0.0;
  double energy_j = 0.0;
  std::vector<double> moving_average;  // trailing window of rewards
  std::vector<RunRecord> records;      // empty unless keep_records
};

struct PolicyEvaluation {
  std::size_t window = 0;          // window actually used
  bool window_truncated = false;   // window exceeded the run; full-run mean used
  MeanInterval reward;
  MeanInterval cost;
  MeanInterval aoi;
  MeanInterval energy_j;
  std::vector<ReplicationSummary> replications;  // ordered by rep id
};

// Summarises one replication's records over its final `window` epochs.
ReplicationSummary summarize_replication(std::vector<RunRecord> records, int rep,
                                         std::size_t window, bool keep_records);

// Aggregates per-replication summaries (already ordered by rep) into means
// with 95% half-widths.
PolicyEvaluation aggregate_replications(std::vector<ReplicationSummary> reps,
                                        std::size_t window, bool truncated);

// Runs `replications` independent (env, policy) pairs, in parallel when
// threads allow, and summarises the final window of each.
PolicyEvaluation evaluate_policy(const EnvFactory& make_env,
                                 const PolicyFactory& make_policy,
                                 const EvaluationOptions& options);

}  // namespace aoicache
