#ifndef RISFD_NEURAL_HPP
#define RISFD_NEURAL_HPP

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "risfd/rng.hpp"

namespace risfd::nn {

using Vector = Eigen::VectorXd;

/// TanhScaledPi squashes to (-pi, pi) so actor outputs are valid phase
/// shifts without an explicit projection.
enum class Activation : std::int32_t {
  Linear = 0,
  ReLU = 1,
  Softmax = 2,
  TanhScaledPi = 3,
};

enum class LayerKind : std::int32_t { Conv1D = 0, Flatten = 1, Dense = 2 };

/// One layer of a network. Conv1D is a valid (no padding) stride-F_s
/// convolution of F_n width-F_z filters over a single-channel signal;
/// Flatten concatenates the filter outputs filter-major; Dense is fully
/// connected. Softmax acts over the whole layer output vector.
struct LayerSpec {
  LayerKind kind = LayerKind::Dense;
  Activation act = Activation::Linear;
  int filters = 0;  ///< Conv1D only (F_n)
  int width = 0;    ///< Conv1D only (F_z)
  int stride = 0;   ///< Conv1D only (F_s)
  int units = 0;    ///< Dense only

  static LayerSpec conv1d(int filters, int width, int stride, Activation act);
  static LayerSpec flatten();
  static LayerSpec dense(int units, Activation act);
};

/// Output length of a valid convolution: floor((input - width)/stride)+1.
/// Throws ConfigError when the result would be < 1.
int conv_output_length(int input_length, int width, int stride);

struct NetworkSpec {
  int input_size = 0;
  std::vector<LayerSpec> layers;

  /// Validates shapes end to end (ConfigError on an impossible stack).
  void validate() const;
  int output_size() const;
};

/// Total number of weights and biases, by direct enumeration of the
/// layer shapes.
std::int64_t parameter_count(const NetworkSpec& spec);

/// Flat parameter storage plus Adam optimizer state. Layout is layer by
/// layer, weights then biases; conv weights are filter-major taps,
/// dense weights are row-major (unit, input).
struct ParameterSet {
  Vector values;
  Vector m;  ///< Adam first moment
  Vector v;  ///< Adam second moment
  std::int64_t adam_step = 0;
};

/// Glorot-uniform weights (limit sqrt(6/(fan_in+fan_out))), zero
/// biases, zero Adam state. Same generator state gives identical
/// parameters.
ParameterSet init_parameters(const NetworkSpec& spec, Rng& rng);

/// Per-layer activations recorded by forward() for use in backward().
struct ForwardCache {
  const NetworkSpec* spec = nullptr;
  Vector input;
  std::vector<Vector> pre;   ///< pre-activation z per layer (empty for flatten)
  std::vector<Vector> post;  ///< post-activation output per layer
};

Vector forward(const NetworkSpec& spec, const ParameterSet& params,
               const Vector& input, ForwardCache* cache = nullptr);

struct Gradients {
  Vector params;
  Vector input;
};

/// Reverse-mode gradients of sum(output .* output_grad) with respect to
/// every parameter and the network input. The cache must come from a
/// forward() on the same spec.
Gradients backward(const NetworkSpec& spec, const ParameterSet& params,
                   const ForwardCache& cache, const Vector& output_grad);

/// One Adam descent step (params -= alpha * mhat / (sqrt(vhat) + eps))
/// with bias correction; increments the step counter. Pass a negated
/// gradient for ascent.
void adam_step(ParameterSet& params, const Vector& grads, double alpha,
               double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

/// target = tau * source + (1 - tau) * target, values only.
void soft_update(ParameterSet& target, const ParameterSet& source, double tau);

/// Architecture knobs shared by the actor and critic builders.
struct Hyper {
  int conv_filters = 8;  ///< F_n
  int conv_width = 4;    ///< F_z
  int conv_stride = 2;   ///< F_s
  int ff_units = 24;     ///< width of the hidden feed-forward layer
  Activation hidden_ff_activation = Activation::Softmax;  ///< ReLU for ablation
};

/// Actor: [N+1] -> Conv1D(ReLU) -> Flatten -> Dense(ff_units, softmax)
/// -> Dense(N, tanh scaled by pi).
NetworkSpec actor_spec(int n, const Hyper& hyper);
/// Critic: [2N+1] -> same hidden stack -> Dense(1, linear).
NetworkSpec critic_spec(int n, const Hyper& hyper);
/// Fully connected baselines with the same input/output contracts.
NetworkSpec dense_actor_spec(int n, const std::vector<int>& hidden_units);
NetworkSpec dense_critic_spec(int n, const std::vector<int>& hidden_units);

std::pair<NetworkSpec, ParameterSet> build_actor(int n, const Hyper& hyper,
                                                 Rng& rng);
std::pair<NetworkSpec, ParameterSet> build_critic(int n, const Hyper& hyper,
                                                  Rng& rng);

/// Checkpoint layout (little-endian throughout): 8-byte magic
/// "RISFDNN1", int32 input size, int32 layer count, then per layer
/// int32 kind, act, filters, width, stride, units; then int64 parameter
/// count and that many float64 values. Adam state is not persisted.
void save_checkpoint(const std::string& path, const NetworkSpec& spec,
                     const ParameterSet& params);
std::pair<NetworkSpec, ParameterSet> load_checkpoint(const std::string& path);

}  // namespace risfd::nn

#endif  // RISFD_NEURAL_HPP
