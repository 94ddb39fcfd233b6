#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "aoicache/rng.hpp"

namespace aoicache {

/// Weights and biases of a dense feed-forward network with rectified-linear
/// hidden layers and a linear output layer.
///
/// weights[l] maps layer l to layer l + 1 and has shape
/// (layer_sizes[l + 1], layer_sizes[l]).
struct MlpParameters {
  std::vector<std::size_t> layer_sizes;
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;

  // Zero-filled parameters of the given shape.
  static MlpParameters zeros(std::vector<std::size_t> layer_sizes);

  std::size_t num_layers() const { return weights.size(); }
  std::size_t input_size() const { return layer_sizes.front(); }
  std::size_t output_size() const { return layer_sizes.back(); }
  std::size_t num_parameters() const;

  // theta: per layer, row-major weights then biases.
  std::vector<double> flatten() const;
  void assign_flat(std::span<const double> theta);

  bool same_shape(const MlpParameters& other) const;
  bool all_finite() const;
};

/// Loss gradient with the same shapes as the parameters it belongs to.
struct GradientBuffer {
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;

  static GradientBuffer zeros_like(const MlpParameters& params);

  std::vector<double> flatten() const;
  double squared_norm() const;
  void scale(double factor);
  bool all_finite() const;
};

struct BackwardResult {
  double loss = 0.0;
  GradientBuffer grads;
};

// He-uniform weights in [-sqrt(6/fan_in), sqrt(6/fan_in)], zero biases.
MlpParameters init_params(std::vector<std::size_t> layer_sizes, Rng& rng);

// Q-values for one input. Throws ContractViolation on a length mismatch.
Eigen::VectorXd forward(const MlpParameters& params,
                        std::span<const double> input);

// Column-per-sample batch version of forward.
Eigen::MatrixXd forward_batch(const MlpParameters& params,
                              const Eigen::MatrixXd& inputs);

// Squared error (target - Q(input)[action])^2 and its exact gradient.
// Only the selected head carries error.
BackwardResult backward(const MlpParameters& params,
                        std::span<const double> input, int action,
                        double target);

// Mean over the columns of `inputs` of the per-sample squared error, and
// the gradient of that mean.
BackwardResult backward_batch(const MlpParameters& params,
                              const Eigen::MatrixXd& inputs,
                              std::span<const int> actions,
                              std::span<const double> targets);

/// Scratch matrices reused across calls so repeated training steps do not
/// reallocate.
struct MlpWorkspace {
  std::vector<Eigen::MatrixXd> activations;
  Eigen::MatrixXd delta;
  Eigen::MatrixXd upstream;
};

// Allocation-free forms of forward_batch and backward_batch once the
// workspace and gradient buffer have warmed up. The returned reference
// lives in `ws` until its next use.
const Eigen::MatrixXd& forward_batch(const MlpParameters& params,
                                     const Eigen::MatrixXd& inputs, MlpWorkspace& ws);
double backward_batch(const MlpParameters& params, const Eigen::MatrixXd& inputs,
                      std::span<const int> actions, std::span<const double> targets,
                      MlpWorkspace& ws, GradientBuffer& grads);

// theta <- theta - lr * grads
void sgd_step(MlpParameters& params, const GradientBuffer& grads,
              double learning_rate);

// Exact copy of src into dst; throws ContractViolation on a shape mismatch.
void clone_into(const MlpParameters& src, MlpParameters& dst);

class AdamOptimizer {
 public:
  explicit AdamOptimizer(const MlpParameters& params, double beta1 = 0.9,
                         double beta2 = 0.999, double epsilon = 1e-8);

  void step(MlpParameters& params, const GradientBuffer& grads,
            double learning_rate);

  long long steps() const { return steps_; }

 private:
  double beta1_;
  double beta2_;
  double epsilon_;
  long long steps_ = 0;
  GradientBuffer first_;
  GradientBuffer second_;
};

// Flat checkpoint: magic "AOIQNET1", uint32 version, uint32 layer count,
// uint64 layer sizes, then per layer row-major weights followed by biases,
// all little-endian float64.
inline constexpr std::uint32_t kCheckpointVersion = 1;

void save_params(std::ostream& out, const MlpParameters& params);
// Throws ContractViolation on bad magic, version, or (when `expected_sizes`
// is non-empty) mismatched layer sizes.
MlpParameters load_params(std::istream& in,
                          std::span<const std::size_t> expected_sizes = {});

}  // namespace aoicache
