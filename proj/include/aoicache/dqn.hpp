#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "aoicache/env.hpp"
#include "aoicache/mlp.hpp"
#include "aoicache/replay_buffer.hpp"
#include "aoicache/rng.hpp"
#include "aoicache/run_record.hpp"

namespace aoicache {

enum class OptimizerKind { kSgd, kAdam };

struct AgentConfig {
  double gamma = 0.99;
  double learning_rate = 1e-3;
  double epsilon_start = 0.9;
  double epsilon_decay = 0.995;
  double epsilon_min = 0.05;
  std::size_t batch_size = 100;
  std::size_t target_sync = 100;   // T_0
  std::size_t buffer_capacity = 5000;
  std::vector<std::size_t> hidden{512, 256, 128};
  OptimizerKind optimizer = OptimizerKind::kSgd;
  double grad_clip_norm = 0.0;     // 0 disables global-norm clipping

  void validate() const;  // throws ConfigError
};

/// Maps an MdpState to the network input: AoI / t_max followed by
/// requests / max(U, 1).
struct StateEncoder {
  int t_max = 100;
  int users = 100;

  std::size_t input_size(std::size_t num_sensors) const { return 2 * num_sensors; }
  Eigen::VectorXd encode(const MdpState& state) const;
  void encode_into(const MdpState& state, double* out) const;
};

Eigen::VectorXd encode_state(const MdpState& state, int t_max, int users);

// Index of the largest entry; ties go to the lowest index.
int argmax_action(const Eigen::VectorXd& q_values);

// Uniform over {0..F} with probability epsilon, otherwise the greedy head.
int select_action(const MlpParameters& qnet, const MdpState& state,
                  double epsilon, const StateEncoder& encoder, Rng& rng);

double decay_epsilon(double epsilon, double decay, double epsilon_min);

// r + gamma * max_a' Q_target(s', a'); the task is continuing, so the
// bootstrap term is never dropped.
double compute_target(const MlpParameters& target_net,
                      const Transition& transition, double gamma,
                      const StateEncoder& encoder);

/// Plain SGD or Adam behind one call.
class Optimizer {
 public:
  Optimizer(OptimizerKind kind, const MlpParameters& params);
  void step(MlpParameters& params, const GradientBuffer& grads,
            double learning_rate);
  OptimizerKind kind() const { return kind_; }

 private:
  OptimizerKind kind_;
  std::optional<AdamOptimizer> adam_;
};

/// Batch buffers reused by train_step.
struct TrainWorkspace {
  Eigen::MatrixXd states;
  Eigen::MatrixXd next_states;
  std::vector<int> actions;
  std::vector<double> targets;
  MlpWorkspace target_pass;
  MlpWorkspace online_pass;
  GradientBuffer grads;
};

// One mini-batch update of `qnet` against the frozen `target_net`. Returns
// the batch loss (before the update), or nullopt while the buffer holds fewer
// than batch_size transitions. Throws NumericalError on non-finite loss or
// gradients.
std::optional<double> train_step(MlpParameters& qnet,
                                 const MlpParameters& target_net,
                                 const ReplayBuffer& buffer,
                                 const AgentConfig& config,
                                 const StateEncoder& encoder,
                                 Optimizer& optimizer, Rng& rng);
std::optional<double> train_step(MlpParameters& qnet,
                                 const MlpParameters& target_net,
                                 const ReplayBuffer& buffer,
                                 const AgentConfig& config,
                                 const StateEncoder& encoder,
                                 Optimizer& optimizer, Rng& rng,
                                 TrainWorkspace& workspace);

// Copies qnet into target_net when t mod T_0 == 0.
bool maybe_sync_target(const MlpParameters& qnet, MlpParameters& target_net,
                       std::int64_t t, std::size_t target_sync);

/// Online Q-network, target network, replay buffer and exploration schedule.
class DqnAgent {
 public:
  DqnAgent(AgentConfig config, int num_sensors, StateEncoder encoder,
           std::uint64_t seed);

  // epsilon-greedy at the current epsilon.
  int act(const MdpState& state);
  int greedy_action(const MdpState& state) const;
  Eigen::VectorXd q_values(const MdpState& state) const;

  // Stores the transition, trains once, syncs the target on schedule and
  // decays epsilon. Returns the training loss when a gradient step ran.
  std::optional<double> observe(Transition transition);

  double epsilon() const { return epsilon_; }
  std::int64_t epoch() const { return epoch_; }
  int num_sensors() const { return num_sensors_; }
  const AgentConfig& config() const { return config_; }
  const StateEncoder& encoder() const { return encoder_; }
  const MlpParameters& online() const { return online_; }
  const MlpParameters& target() const { return target_; }
  const ReplayBuffer& buffer() const { return buffer_; }

  // Header (magic "AOIAGNT1", version, JSON metadata with the agent config,
  // epsilon and epoch) followed by the online and target networks in the
  // network checkpoint format. The replay buffer is not persisted.
  void save_checkpoint(std::ostream& out) const;
  static DqnAgent load_checkpoint(std::istream& in, std::uint64_t seed);

 private:
  AgentConfig config_;
  int num_sensors_;
  StateEncoder encoder_;
  Rng rng_;
  MlpParameters online_;
  MlpParameters target_;
  Optimizer optimizer_;
  ReplayBuffer buffer_;
  TrainWorkspace workspace_;
  double epsilon_;
  std::int64_t epoch_ = 0;
};

// Runs the act/observe/store/train/decay/sync loop for `epochs` epochs and
// returns one record per epoch (rep id 0). `on_epoch`, if set, is called
// after each epoch.
std::vector<RunRecord> run_training(
    CacheEnv& env, DqnAgent& agent, std::int64_t epochs,
    const std::function<void(const RunRecord&, const DqnAgent&)>& on_epoch = {});

}  // namespace aoicache
