#include "aoicache/mlp.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>
#include <sstream>

#include "aoicache/errors.hpp"

namespace aoicache {
namespace {

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

constexpr std::array<char, 8> kMagic{'A', 'O', 'I', 'Q', 'N', 'E', 'T', '1'};

void check_input(const MlpParameters& params, std::size_t rows) {
  if (params.weights.empty()) throw ContractViolation("network has no layers");
  if (rows != params.input_size()) {
    std::ostringstream msg;
    msg << "input length " << rows << " does not match network input "
        << params.input_size();
    throw ContractViolation(msg.str());
  }
}

template <typename T>
void write_pod(std::ostream& out, const T& value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_pod(std::istream& in) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw ContractViolation("checkpoint truncated");
  return value;
}

// Fills ws.activations; activations[0] is the input.
void forward_trace(const MlpParameters& params, const Eigen::MatrixXd& inputs,
                   MlpWorkspace& ws) {
  ws.activations.resize(params.num_layers() + 1);
  ws.activations[0] = inputs;
  for (std::size_t l = 0; l < params.num_layers(); ++l) {
    Eigen::MatrixXd& z = ws.activations[l + 1];
    z.noalias() = params.weights[l] * ws.activations[l];
    z.colwise() += params.biases[l];
    if (l + 1 < params.num_layers()) z = z.cwiseMax(0.0);
  }
}

}  // namespace

MlpParameters MlpParameters::zeros(std::vector<std::size_t> layer_sizes) {
  if (layer_sizes.size() < 2) throw ContractViolation("need at least input and output sizes");
  MlpParameters p;
  p.layer_sizes = std::move(layer_sizes);
  for (std::size_t l = 0; l + 1 < p.layer_sizes.size(); ++l) {
    if (p.layer_sizes[l] == 0 || p.layer_sizes[l + 1] == 0) {
      throw ContractViolation("layer sizes must be positive");
    }
    const auto rows = static_cast<Eigen::Index>(p.layer_sizes[l + 1]);
    const auto cols = static_cast<Eigen::Index>(p.layer_sizes[l]);
    p.weights.push_back(Eigen::MatrixXd::Zero(rows, cols));
    p.biases.push_back(Eigen::VectorXd::Zero(rows));
  }
  return p;
}

std::size_t MlpParameters::num_parameters() const {
  std::size_t n = 0;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    n += static_cast<std::size_t>(weights[l].size() + biases[l].size());
  }
  return n;
}

namespace {

template <typename Layers>
std::vector<double> flatten_layers(const Layers& layers) {
  std::vector<double> theta;
  for (std::size_t l = 0; l < layers.weights.size(); ++l) {
    const auto& w = layers.weights[l];
    for (Eigen::Index r = 0; r < w.rows(); ++r)
      for (Eigen::Index c = 0; c < w.cols(); ++c) theta.push_back(w(r, c));
    const auto& b = layers.biases[l];
    theta.insert(theta.end(), b.data(), b.data() + b.size());
  }
  return theta;
}

}  // namespace

std::vector<double> MlpParameters::flatten() const { return flatten_layers(*this); }

void MlpParameters::assign_flat(std::span<const double> theta) {
  if (theta.size() != num_parameters()) throw ContractViolation("assign_flat: length mismatch");
  std::size_t i = 0;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    auto& w = weights[l];
    for (Eigen::Index r = 0; r < w.rows(); ++r)
      for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = theta[i++];
    for (Eigen::Index r = 0; r < biases[l].size(); ++r) biases[l](r) = theta[i++];
  }
}

bool MlpParameters::same_shape(const MlpParameters& other) const {
  return layer_sizes == other.layer_sizes;
}

bool MlpParameters::all_finite() const {
  for (std::size_t l = 0; l < weights.size(); ++l) {
    if (!weights[l].allFinite() || !biases[l].allFinite()) return false;
  }
  return true;
}

GradientBuffer GradientBuffer::zeros_like(const MlpParameters& params) {
  GradientBuffer g;
  for (std::size_t l = 0; l < params.weights.size(); ++l) {
    g.weights.push_back(Eigen::MatrixXd::Zero(params.weights[l].rows(), params.weights[l].cols()));
    g.biases.push_back(Eigen::VectorXd::Zero(params.biases[l].size()));
  }
  return g;
}

std::vector<double> GradientBuffer::flatten() const { return flatten_layers(*this); }

double GradientBuffer::squared_norm() const {
  double s = 0.0;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    s += weights[l].squaredNorm() + biases[l].squaredNorm();
  }
  return s;
}

void GradientBuffer::scale(double factor) {
  for (std::size_t l = 0; l < weights.size(); ++l) {
    weights[l] *= factor;
    biases[l] *= factor;
  }
}

bool GradientBuffer::all_finite() const {
  for (std::size_t l = 0; l < weights.size(); ++l) {
    if (!weights[l].allFinite() || !biases[l].allFinite()) return false;
  }
  return true;
}

MlpParameters init_params(std::vector<std::size_t> layer_sizes, Rng& rng) {
  MlpParameters p = MlpParameters::zeros(std::move(layer_sizes));
  for (auto& w : p.weights) {
    const double bound = std::sqrt(6.0 / static_cast<double>(w.cols()));
    std::uniform_real_distribution<double> dist(-bound, bound);
    // Fill row-major so the draw order matches the flat layout.
    for (Eigen::Index r = 0; r < w.rows(); ++r)
      for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = dist(rng);
  }
  return p;
}

Eigen::VectorXd forward(const MlpParameters& params,
                        std::span<const double> input) {
  check_input(params, input.size());
  Eigen::VectorXd a = Eigen::Map<const Eigen::VectorXd>(
      input.data(), static_cast<Eigen::Index>(input.size()));
  for (std::size_t l = 0; l < params.num_layers(); ++l) {
    Eigen::VectorXd z = params.weights[l] * a + params.biases[l];
    if (l + 1 < params.num_layers()) z = z.cwiseMax(0.0);
    a = std::move(z);
  }
  return a;
}

Eigen::MatrixXd forward_batch(const MlpParameters& params,
                              const Eigen::MatrixXd& inputs) {
  check_input(params, static_cast<std::size_t>(inputs.rows()));
  Eigen::MatrixXd a = inputs;
  for (std::size_t l = 0; l < params.num_layers(); ++l) {
    Eigen::MatrixXd z = params.weights[l] * a;
    z.colwise() += params.biases[l];
    if (l + 1 < params.num_layers()) z = z.cwiseMax(0.0);
    a = std::move(z);
  }
  return a;
}

const Eigen::MatrixXd& forward_batch(const MlpParameters& params,
                                     const Eigen::MatrixXd& inputs, MlpWorkspace& ws) {
  check_input(params, static_cast<std::size_t>(inputs.rows()));
  forward_trace(params, inputs, ws);
  return ws.activations.back();
}

double backward_batch(const MlpParameters& params, const Eigen::MatrixXd& inputs,
                      std::span<const int> actions, std::span<const double> targets,
                      MlpWorkspace& ws, GradientBuffer& grads) {
  check_input(params, static_cast<std::size_t>(inputs.rows()));
  const auto batch = static_cast<std::size_t>(inputs.cols());
  if (batch == 0 || actions.size() != batch || targets.size() != batch) {
    throw ContractViolation("backward_batch: batch dimensions disagree");
  }
  forward_trace(params, inputs, ws);
  const auto& acts = ws.activations;
  const Eigen::MatrixXd& q = acts.back();

  // d(mean loss)/d(output): only the selected head carries error.
  Eigen::MatrixXd& delta = ws.delta;
  delta.setZero(q.rows(), q.cols());
  double loss = 0.0;
  const double inv_batch = 1.0 / static_cast<double>(batch);
  for (std::size_t i = 0; i < batch; ++i) {
    const int a = actions[i];
    if (a < 0 || a >= q.rows()) throw ContractViolation("backward_batch: action out of range");
    const auto col = static_cast<Eigen::Index>(i);
    const double err = q(a, col) - targets[i];
    loss += err * err;
    delta(a, col) = 2.0 * err * inv_batch;
  }

  if (grads.weights.size() != params.num_layers()) grads = GradientBuffer::zeros_like(params);
  for (std::size_t l = params.num_layers(); l-- > 0;) {
    grads.weights[l].noalias() = delta * acts[l].transpose();
    grads.biases[l].noalias() = delta.rowwise().sum();
    if (l == 0) break;
    ws.upstream.noalias() = params.weights[l].transpose() * delta;
    // ReLU derivative, taken as 0 at the kink.
    delta = ws.upstream.cwiseProduct((acts[l].array() > 0.0).cast<double>().matrix());
  }
  return loss * inv_batch;
}

BackwardResult backward_batch(const MlpParameters& params,
                              const Eigen::MatrixXd& inputs,
                              std::span<const int> actions,
                              std::span<const double> targets) {
  MlpWorkspace ws;
  BackwardResult out;
  out.grads = GradientBuffer::zeros_like(params);
  out.loss = backward_batch(params, inputs, actions, targets, ws, out.grads);
  return out;
}

BackwardResult backward(const MlpParameters& params,
                        std::span<const double> input, int action,
                        double target) {
  check_input(params, input.size());
  const Eigen::MatrixXd column = Eigen::Map<const Eigen::MatrixXd>(
      input.data(), static_cast<Eigen::Index>(input.size()), 1);
  const int actions[1] = {action};
  const double targets[1] = {target};
  return backward_batch(params, column, actions, targets);
}

void sgd_step(MlpParameters& params, const GradientBuffer& grads,
              double learning_rate) {
  if (grads.weights.size() != params.weights.size()) {
    throw ContractViolation("sgd_step: gradient shape mismatch");
  }
  for (std::size_t l = 0; l < params.num_layers(); ++l) {
    params.weights[l] -= learning_rate * grads.weights[l];
    params.biases[l] -= learning_rate * grads.biases[l];
  }
}

void clone_into(const MlpParameters& src, MlpParameters& dst) {
  if (!src.same_shape(dst)) throw ContractViolation("clone_into: shape mismatch");
  for (std::size_t l = 0; l < src.num_layers(); ++l) {
    dst.weights[l] = src.weights[l];
    dst.biases[l] = src.biases[l];
  }
}

AdamOptimizer::AdamOptimizer(const MlpParameters& params, double beta1,
                             double beta2, double epsilon)
    : beta1_(beta1),
      beta2_(beta2),
      epsilon_(epsilon),
      first_(GradientBuffer::zeros_like(params)),
      second_(GradientBuffer::zeros_like(params)) {}

void AdamOptimizer::step(MlpParameters& params, const GradientBuffer& grads,
                         double learning_rate) {
  ++steps_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(steps_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(steps_));
  const double step_size = learning_rate * std::sqrt(c2) / c1;
  auto update = [&](auto& param, auto& m, auto& v, const auto& g) {
    m = beta1_ * m + (1.0 - beta1_) * g;
    v = beta2_ * v + (1.0 - beta2_) * g.cwiseProduct(g);
    param.array() -= step_size * m.array() / (v.array().sqrt() + epsilon_);
  };
  for (std::size_t l = 0; l < params.num_layers(); ++l) {
    update(params.weights[l], first_.weights[l], second_.weights[l], grads.weights[l]);
    update(params.biases[l], first_.biases[l], second_.biases[l], grads.biases[l]);
  }
}

void save_params(std::ostream& out, const MlpParameters& params) {
  out.write(kMagic.data(), kMagic.size());
  write_pod(out, kCheckpointVersion);
  write_pod(out, static_cast<std::uint32_t>(params.layer_sizes.size()));
  for (std::size_t s : params.layer_sizes) write_pod(out, static_cast<std::uint64_t>(s));
  for (double v : params.flatten()) write_pod(out, v);
  if (!out) throw std::runtime_error("failed to write network checkpoint");
}

MlpParameters load_params(std::istream& in,
                          std::span<const std::size_t> expected_sizes) {
  std::array<char, 8> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kMagic) throw ContractViolation("not a network checkpoint (bad magic)");
  const auto version = read_pod<std::uint32_t>(in);
  if (version != kCheckpointVersion) {
    throw ContractViolation("unsupported checkpoint version " + std::to_string(version));
  }
  const auto count = read_pod<std::uint32_t>(in);
  if (count < 2 || count > 64) throw ContractViolation("implausible layer count in checkpoint");
  std::vector<std::size_t> sizes;
  for (std::uint32_t i = 0; i < count; ++i) {
    sizes.push_back(static_cast<std::size_t>(read_pod<std::uint64_t>(in)));
  }
  if (!expected_sizes.empty() &&
      !std::equal(sizes.begin(), sizes.end(), expected_sizes.begin(), expected_sizes.end())) {
    throw ContractViolation("checkpoint layer sizes do not match the expected network");
  }
  MlpParameters params = MlpParameters::zeros(sizes);
  std::vector<double> theta(params.num_parameters());
  for (double& v : theta) v = read_pod<double>(in);
  params.assign_flat(theta);
  return params;
}

}  // namespace aoicache
