#include "aoicache/dqn.hpp"

#include <array>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "aoicache/config.hpp"
#include "aoicache/errors.hpp"

namespace aoicache {
namespace {

constexpr std::array<char, 8> kAgentMagic{'A', 'O', 'I', 'A', 'G', 'N', 'T', '1'};
constexpr std::uint32_t kAgentVersion = 1;

std::vector<std::size_t> layer_sizes_for(const AgentConfig& config, int num_sensors) {
  std::vector<std::size_t> sizes{2 * static_cast<std::size_t>(num_sensors)};
  sizes.insert(sizes.end(), config.hidden.begin(), config.hidden.end());
  sizes.push_back(static_cast<std::size_t>(num_sensors) + 1);
  return sizes;
}

}  // namespace

void AgentConfig::validate() const {
  if (!(gamma >= 0.0 && gamma < 1.0)) throw ConfigError("gamma", "must lie in [0, 1)");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw ConfigError("learning_rate", "must be positive");
  }
  if (!(epsilon_min >= 0.0 && epsilon_min <= epsilon_start && epsilon_start <= 1.0)) {
    throw ConfigError("epsilon_start", "need 0 <= epsilon_min <= epsilon_start <= 1");
  }
  if (!(epsilon_decay > 0.0 && epsilon_decay <= 1.0)) {
    throw ConfigError("epsilon_decay", "must lie in (0, 1]");
  }
  if (batch_size == 0) throw ConfigError("batch_size", "must be >= 1");
  if (buffer_capacity == 0) throw ConfigError("buffer_capacity", "must be >= 1");
  if (batch_size > buffer_capacity) throw ConfigError("batch_size", "must not exceed buffer_capacity");
  if (target_sync == 0) throw ConfigError("target_sync", "must be >= 1");
  for (std::size_t h : hidden) {
    if (h == 0) throw ConfigError("hidden", "layer sizes must be positive");
  }
  if (!(grad_clip_norm >= 0.0)) throw ConfigError("grad_clip_norm", "must be >= 0");
}

Eigen::VectorXd StateEncoder::encode(const MdpState& state) const {
  Eigen::VectorXd out(static_cast<Eigen::Index>(input_size(state.num_sensors())));
  encode_into(state, out.data());
  return out;
}

void StateEncoder::encode_into(const MdpState& state, double* out) const {
  const std::size_t F = state.num_sensors();
  if (state.requests.size() != F) throw ContractViolation("MdpState: aoi/requests length mismatch");
  const double aoi_scale = 1.0 / t_max;
  const double request_scale = 1.0 / std::max(users, 1);
  for (std::size_t f = 0; f < F; ++f) {
    out[f] = state.aoi[f] * aoi_scale;
    out[F + f] = state.requests[f] * request_scale;
  }
}

Eigen::VectorXd encode_state(const MdpState& state, int t_max, int users) {
  return StateEncoder{t_max, users}.encode(state);
}

int argmax_action(const Eigen::VectorXd& q_values) {
  if (q_values.size() == 0) throw ContractViolation("argmax_action: empty vector");
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < q_values.size(); ++i) {
    if (q_values(i) > q_values(best)) best = i;
  }
  return static_cast<int>(best);
}

int select_action(const MlpParameters& qnet, const MdpState& state,
                  double epsilon, const StateEncoder& encoder, Rng& rng) {
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  if (coin(rng) < epsilon) {
    std::uniform_int_distribution<int> uniform(0, static_cast<int>(qnet.output_size()) - 1);
    return uniform(rng);
  }
  const Eigen::VectorXd x = encoder.encode(state);
  return argmax_action(forward(qnet, {x.data(), static_cast<std::size_t>(x.size())}));
}

double decay_epsilon(double epsilon, double decay, double epsilon_min) {
  return std::max(epsilon * decay, epsilon_min);
}

double compute_target(const MlpParameters& target_net,
                      const Transition& transition, double gamma,
                      const StateEncoder& encoder) {
  const Eigen::VectorXd x = encoder.encode(transition.next_state);
  const Eigen::VectorXd q = forward(target_net, {x.data(), static_cast<std::size_t>(x.size())});
  return transition.reward + gamma * q.maxCoeff();
}

Optimizer::Optimizer(OptimizerKind kind, const MlpParameters& params) : kind_(kind) {
  if (kind_ == OptimizerKind::kAdam) adam_.emplace(params);
}

void Optimizer::step(MlpParameters& params, const GradientBuffer& grads,
                     double learning_rate) {
  if (adam_) {
    adam_->step(params, grads, learning_rate);
  } else {
    sgd_step(params, grads, learning_rate);
  }
}

std::optional<double> train_step(MlpParameters& qnet,
                                 const MlpParameters& target_net,
                                 const ReplayBuffer& buffer,
                                 const AgentConfig& config,
                                 const StateEncoder& encoder,
                                 Optimizer& optimizer, Rng& rng) {
  TrainWorkspace workspace;
  return train_step(qnet, target_net, buffer, config, encoder, optimizer, rng, workspace);
}

std::optional<double> train_step(MlpParameters& qnet,
                                 const MlpParameters& target_net,
                                 const ReplayBuffer& buffer,
                                 const AgentConfig& config,
                                 const StateEncoder& encoder,
                                 Optimizer& optimizer, Rng& rng,
                                 TrainWorkspace& ws) {
  const auto indices = buffer.sample_indices(config.batch_size, rng);
  if (!indices) return std::nullopt;

  const auto batch = static_cast<Eigen::Index>(indices->size());
  const auto rows = static_cast<Eigen::Index>(qnet.input_size());
  ws.states.resize(rows, batch);
  ws.next_states.resize(rows, batch);
  ws.actions.resize(indices->size());
  ws.targets.resize(indices->size());
  for (Eigen::Index i = 0; i < batch; ++i) {
    const Transition& t = buffer.at((*indices)[static_cast<std::size_t>(i)]);
    encoder.encode_into(t.state, ws.states.col(i).data());
    encoder.encode_into(t.next_state, ws.next_states.col(i).data());
    ws.actions[static_cast<std::size_t>(i)] = t.action;
  }

  const Eigen::MatrixXd& next_q = forward_batch(target_net, ws.next_states, ws.target_pass);
  for (Eigen::Index i = 0; i < batch; ++i) {
    const Transition& t = buffer.at((*indices)[static_cast<std::size_t>(i)]);
    ws.targets[static_cast<std::size_t>(i)] = t.reward + config.gamma * next_q.col(i).maxCoeff();
  }

  const double loss =
      backward_batch(qnet, ws.states, ws.actions, ws.targets, ws.online_pass, ws.grads);
  if (!std::isfinite(loss) || !ws.grads.all_finite()) {
    std::ostringstream msg;
    msg << "train_step: non-finite loss or gradient (loss=" << loss
        << ", |grad|^2=" << ws.grads.squared_norm() << ")";
    throw NumericalError(msg.str());
  }
  if (config.grad_clip_norm > 0.0) {
    const double norm = std::sqrt(ws.grads.squared_norm());
    if (norm > config.grad_clip_norm) ws.grads.scale(config.grad_clip_norm / norm);
  }
  optimizer.step(qnet, ws.grads, config.learning_rate);
  return loss;
}

bool maybe_sync_target(const MlpParameters& qnet, MlpParameters& target_net,
                       std::int64_t t, std::size_t target_sync) {
  if (target_sync == 0) throw ContractViolation("maybe_sync_target: T_0 must be >= 1");
  if (t % static_cast<std::int64_t>(target_sync) != 0) return false;
  clone_into(qnet, target_net);
  return true;
}

DqnAgent::DqnAgent(AgentConfig config, int num_sensors, StateEncoder encoder,
                   std::uint64_t seed)
    : config_((config.validate(), std::move(config))),
      num_sensors_(num_sensors),
      encoder_(encoder),
      rng_(seed),
      online_(init_params(layer_sizes_for(config_, num_sensors), rng_)),
      target_(online_),
      optimizer_(config_.optimizer, online_),
      buffer_(config_.buffer_capacity),
      epsilon_(config_.epsilon_start) {
  if (num_sensors < 1) throw ContractViolation("DqnAgent: num_sensors must be >= 1");
}

int DqnAgent::act(const MdpState& state) {
  if (state.num_sensors() != static_cast<std::size_t>(num_sensors_)) {
    throw ContractViolation("DqnAgent::act: state dimension mismatch");
  }
  return select_action(online_, state, epsilon_, encoder_, rng_);
}

Eigen::VectorXd DqnAgent::q_values(const MdpState& state) const {
  const Eigen::VectorXd x = encoder_.encode(state);
  return forward(online_, {x.data(), static_cast<std::size_t>(x.size())});
}

int DqnAgent::greedy_action(const MdpState& state) const {
  return argmax_action(q_values(state));
}

std::optional<double> DqnAgent::observe(Transition transition) {
  buffer_.push(std::move(transition));
  auto loss = train_step(online_, target_, buffer_, config_, encoder_, optimizer_, rng_, workspace_);
  maybe_sync_target(online_, target_, epoch_, config_.target_sync);
  epsilon_ = decay_epsilon(epsilon_, config_.epsilon_decay, config_.epsilon_min);
  ++epoch_;
  return loss;
}

void DqnAgent::save_checkpoint(std::ostream& out) const {
  nlohmann::json header;
  header["agent"] = agent_config_to_json(config_);
  header["num_sensors"] = num_sensors_;
  header["t_max"] = encoder_.t_max;
  header["users"] = encoder_.users;
  header["epsilon"] = epsilon_;
  header["epoch"] = epoch_;
  const std::string text = header.dump();
  out.write(kAgentMagic.data(), kAgentMagic.size());
  const std::uint32_t version = kAgentVersion;
  out.write(reinterpret_cast<const char*>(&version), sizeof(version));
  const auto length = static_cast<std::uint64_t>(text.size());
  out.write(reinterpret_cast<const char*>(&length), sizeof(length));
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  save_params(out, online_);
  save_params(out, target_);
}

DqnAgent DqnAgent::load_checkpoint(std::istream& in, std::uint64_t seed) {
  std::array<char, 8> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kAgentMagic) throw ContractViolation("not an agent checkpoint (bad magic)");
  std::uint32_t version = 0;
  in.read(reinterpret_cast<char*>(&version), sizeof(version));
  if (!in || version != kAgentVersion) throw ContractViolation("unsupported agent checkpoint version");
  std::uint64_t length = 0;
  in.read(reinterpret_cast<char*>(&length), sizeof(length));
  if (!in || length > (1u << 20)) throw ContractViolation("agent checkpoint header is corrupt");
  std::string text(length, '\0');
  in.read(text.data(), static_cast<std::streamsize>(length));
  if (!in) throw ContractViolation("agent checkpoint truncated");
  const auto header = nlohmann::json::parse(text);

  DqnAgent agent(agent_config_from_json(header.at("agent")),
                 header.at("num_sensors").get<int>(),
                 StateEncoder{header.at("t_max").get<int>(), header.at("users").get<int>()},
                 seed);
  const auto sizes = agent.online_.layer_sizes;
  agent.online_ = load_params(in, sizes);
  agent.target_ = load_params(in, sizes);
  agent.optimizer_ = Optimizer(agent.config_.optimizer, agent.online_);
  agent.epsilon_ = header.at("epsilon").get<double>();
  agent.epoch_ = header.at("epoch").get<std::int64_t>();
  return agent;
}

std::vector<RunRecord> run_training(
    CacheEnv& env, DqnAgent& agent, std::int64_t epochs,
    const std::function<void(const RunRecord&, const DqnAgent&)>& on_epoch) {
  if (env.num_sensors() != agent.num_sensors()) {
    throw ContractViolation("run_training: environment and agent disagree on F");
  }
  std::vector<RunRecord> records;
  records.reserve(static_cast<std::size_t>(std::max<std::int64_t>(epochs, 0)));
  for (std::int64_t i = 0; i < epochs; ++i) {
    RunRecord rec;
    rec.epoch = env.epoch();
    rec.epsilon = agent.epsilon();
    MdpState state = env.state();
    const int action = agent.act(state);
    StepOutcome out = env.step(action);
    rec.reward = out.reward;
    rec.cost = out.cost;
    rec.aoi = out.aoi_term;
    rec.energy_j = out.energy_term;
    rec.action = action;
    rec.loss = agent.observe({std::move(state), action, std::move(out.next_state), out.reward});
    records.push_back(rec);
    if (on_epoch) on_epoch(rec, agent);
  }
  return records;
}

}  // namespace aoicache
