#include "risfd/neural.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>
#include <sstream>

#include "risfd/errors.hpp"

static_assert(std::endian::native == std::endian::little,
              "checkpoint io assumes a little-endian host");

namespace risfd::nn {

namespace {

constexpr double kPi = std::numbers::pi;

struct Shape {
  int channels = 1;
  int length = 0;
  int flat() const { return channels * length; }
};

struct LayerPlan {
  Shape in;
  Shape out;
  std::int64_t offset = 0;   // first parameter index
  std::int64_t weights = 0;  // weight count
  std::int64_t biases = 0;   // bias count
};

void check_positive(int value, const char* what) {
  if (value < 1) {
    std::ostringstream oss;
    oss << what << " must be >= 1, got " << value;
    throw ConfigError(oss.str());
  }
}

std::vector<LayerPlan> plan_layers(const NetworkSpec& spec) {
  check_positive(spec.input_size, "network input size");
  std::vector<LayerPlan> plans;
  plans.reserve(spec.layers.size());
  Shape shape{1, spec.input_size};
  std::int64_t offset = 0;
  for (const LayerSpec& layer : spec.layers) {
    LayerPlan plan;
    plan.in = shape;
    plan.offset = offset;
    switch (layer.kind) {
      case LayerKind::Conv1D: {
        check_positive(layer.filters, "conv filter count");
        check_positive(layer.width, "conv filter width");
        check_positive(layer.stride, "conv stride");
        if (shape.channels != 1) {
          throw ConfigError("conv layer requires a single-channel input");
        }
        const int out_len =
            conv_output_length(shape.length, layer.width, layer.stride);
        plan.out = Shape{layer.filters, out_len};
        plan.weights = std::int64_t{1} * layer.filters * layer.width;
        plan.biases = layer.filters;
        break;
      }
      case LayerKind::Flatten:
        plan.out = Shape{1, shape.flat()};
        break;
      case LayerKind::Dense: {
        check_positive(layer.units, "dense unit count");
        if (shape.channels != 1) {
          throw ConfigError(
              "dense layer requires a flat input; add a flatten layer first");
        }
        plan.out = Shape{1, layer.units};
        plan.weights = std::int64_t{1} * layer.units * shape.length;
        plan.biases = layer.units;
        break;
      }
    }
    offset += plan.weights + plan.biases;
    shape = plan.out;
    plans.push_back(plan);
  }
  if (shape.channels != 1) {
    throw ConfigError("network output must be flat; add a flatten layer");
  }
  return plans;
}

Vector activate(Activation act, const Vector& z) {
  switch (act) {
    case Activation::Linear:
      return z;
    case Activation::ReLU:
      return z.cwiseMax(0.0);
    case Activation::Softmax: {
      const double zmax = z.maxCoeff();
      Vector y = (z.array() - zmax).exp();
      return y / y.sum();
    }
    case Activation::TanhScaledPi:
      return kPi * z.array().tanh();
  }
  throw DomainError("unknown activation");
}

Vector activate_backward(Activation act, const Vector& z, const Vector& y,
                         const Vector& dy) {
  switch (act) {
    case Activation::Linear:
      return dy;
    case Activation::ReLU:
      return (z.array() > 0.0).select(dy, 0.0);
    case Activation::Softmax: {
      const double inner = y.dot(dy);
      return y.array() * (dy.array() - inner);
    }
    case Activation::TanhScaledPi:
      // dy/dz = pi (1 - tanh^2) = pi - y^2 / pi
      return dy.array() * (kPi - y.array().square() / kPi);
  }
  throw DomainError("unknown activation");
}

using RowMajor =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

void check_params(const NetworkSpec& spec, const ParameterSet& params) {
  if (params.values.size() != parameter_count(spec)) {
    throw ShapeError("parameter vector does not match the network layout");
  }
}

}  // namespace

LayerSpec LayerSpec::conv1d(int filters, int width, int stride,
                            Activation act) {
  LayerSpec s;
  s.kind = LayerKind::Conv1D;
  s.act = act;
  s.filters = filters;
  s.width = width;
  s.stride = stride;
  return s;
}

LayerSpec LayerSpec::flatten() {
  LayerSpec s;
  s.kind = LayerKind::Flatten;
  return s;
}

LayerSpec LayerSpec::dense(int units, Activation act) {
  LayerSpec s;
  s.kind = LayerKind::Dense;
  s.act = act;
  s.units = units;
  return s;
}

int conv_output_length(int input_length, int width, int stride) {
  check_positive(width, "conv filter width");
  check_positive(stride, "conv stride");
  const int out = (input_length - width) / stride + 1;
  if (input_length < width || out < 1) {
    std::ostringstream oss;
    oss << "conv output length floor((" << input_length << " - " << width
        << ")/" << stride << ") + 1 is below 1";
    throw ConfigError(oss.str());
  }
  return out;
}

void NetworkSpec::validate() const { plan_layers(*this); }

int NetworkSpec::output_size() const {
  const auto plans = plan_layers(*this);
  return plans.empty() ? input_size : plans.back().out.flat();
}

std::int64_t parameter_count(const NetworkSpec& spec) {
  const auto plans = plan_layers(spec);
  std::int64_t total = 0;
  for (const LayerPlan& plan : plans) total += plan.weights + plan.biases;
  return total;
}

ParameterSet init_parameters(const NetworkSpec& spec, Rng& rng) {
  const auto plans = plan_layers(spec);
  ParameterSet params;
  params.values = Vector::Zero(parameter_count(spec));
  params.m = Vector::Zero(params.values.size());
  params.v = Vector::Zero(params.values.size());
  for (std::size_t i = 0; i < plans.size(); ++i) {
    const LayerPlan& plan = plans[i];
    if (plan.weights == 0) continue;
    const LayerSpec& layer = spec.layers[i];
    double fan_in = 0;
    double fan_out = 0;
    if (layer.kind == LayerKind::Conv1D) {
      fan_in = layer.width;
      fan_out = static_cast<double>(layer.filters) * layer.width;
    } else {
      fan_in = plan.in.length;
      fan_out = layer.units;
    }
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    std::uniform_real_distribution<double> dist(-limit, limit);
    for (std::int64_t k = 0; k < plan.weights; ++k) {
      params.values[plan.offset + k] = dist(rng);
    }
    // biases stay zero
  }
  return params;
}

Vector forward(const NetworkSpec& spec, const ParameterSet& params,
               const Vector& input, ForwardCache* cache) {
  const auto plans = plan_layers(spec);
  check_params(spec, params);
  if (input.size() != spec.input_size) {
    throw ShapeError("input length does not match the network input size");
  }
  if (cache) {
    cache->spec = &spec;
    cache->input = input;
    cache->pre.assign(spec.layers.size(), Vector{});
    cache->post.assign(spec.layers.size(), Vector{});
  }
  Vector x = input;
  for (std::size_t i = 0; i < spec.layers.size(); ++i) {
    const LayerSpec& layer = spec.layers[i];
    const LayerPlan& plan = plans[i];
    Vector z;
    Vector y;
    switch (layer.kind) {
      case LayerKind::Conv1D: {
        const int out_len = plan.out.length;
        z = Vector::Zero(plan.out.flat());
        const double* w = params.values.data() + plan.offset;
        const double* b = w + plan.weights;
        for (int f = 0; f < layer.filters; ++f) {
          for (int p = 0; p < out_len; ++p) {
            double acc = b[f];
            const int base = p * layer.stride;
            for (int k = 0; k < layer.width; ++k) {
              acc += w[f * layer.width + k] * x[base + k];
            }
            z[f * out_len + p] = acc;
          }
        }
        y = activate(layer.act, z);
        break;
      }
      case LayerKind::Flatten:
        y = x;
        break;
      case LayerKind::Dense: {
        Eigen::Map<const RowMajor> w(params.values.data() + plan.offset,
                                     layer.units, plan.in.length);
        Eigen::Map<const Vector> b(
            params.values.data() + plan.offset + plan.weights, layer.units);
        z = w * x + b;
        y = activate(layer.act, z);
        break;
      }
    }
    if (cache) {
      cache->pre[i] = z;
      cache->post[i] = y;
    }
    x = std::move(y);
  }
  return x;
}

Gradients backward(const NetworkSpec& spec, const ParameterSet& params,
                   const ForwardCache& cache, const Vector& output_grad) {
  if (cache.spec != &spec || cache.post.size() != spec.layers.size()) {
    throw ShapeError("forward cache does not match this network");
  }
  const auto plans = plan_layers(spec);
  check_params(spec, params);
  const int out_size =
      plans.empty() ? spec.input_size : plans.back().out.flat();
  if (output_grad.size() != out_size) {
    throw ShapeError("output gradient length does not match the network");
  }

  Gradients grads;
  grads.params = Vector::Zero(params.values.size());
  Vector dy = output_grad;
  for (int i = static_cast<int>(spec.layers.size()) - 1; i >= 0; --i) {
    const LayerSpec& layer = spec.layers[i];
    const LayerPlan& plan = plans[i];
    const Vector& x =
        (i == 0) ? cache.input : cache.post[static_cast<std::size_t>(i) - 1];
    if (x.size() != plan.in.flat()) {
      throw ShapeError("forward cache is stale for this network");
    }
    Vector dx;
    switch (layer.kind) {
      case LayerKind::Conv1D: {
        const Vector dz =
            activate_backward(layer.act, cache.pre[i], cache.post[i], dy);
        const int out_len = plan.out.length;
        const double* w = params.values.data() + plan.offset;
        double* dw = grads.params.data() + plan.offset;
        double* db = dw + plan.weights;
        dx = Vector::Zero(plan.in.flat());
        for (int f = 0; f < layer.filters; ++f) {
          for (int p = 0; p < out_len; ++p) {
            const double g = dz[f * out_len + p];
            const int base = p * layer.stride;
            db[f] += g;
            for (int k = 0; k < layer.width; ++k) {
              dw[f * layer.width + k] += g * x[base + k];
              dx[base + k] += g * w[f * layer.width + k];
            }
          }
        }
        break;
      }
      case LayerKind::Flatten:
        dx = dy;
        break;
      case LayerKind::Dense: {
        const Vector dz =
            activate_backward(layer.act, cache.pre[i], cache.post[i], dy);
        Eigen::Map<const RowMajor> w(params.values.data() + plan.offset,
                                     layer.units, plan.in.length);
        Eigen::Map<RowMajor> dw(grads.params.data() + plan.offset, layer.units,
                                plan.in.length);
        Eigen::Map<Vector> db(grads.params.data() + plan.offset + plan.weights,
                              layer.units);
        dw.noalias() = dz * x.transpose();
        db = dz;
        dx.noalias() = w.transpose() * dz;
        break;
      }
    }
    dy = std::move(dx);
  }
  grads.input = std::move(dy);
  return grads;
}

void adam_step(ParameterSet& params, const Vector& grads, double alpha,
               double beta1, double beta2, double eps) {
  if (grads.size() != params.values.size() ||
      params.m.size() != params.values.size() ||
      params.v.size() != params.values.size()) {
    throw ShapeError("gradient or moment length does not match the parameters");
  }
  if (!grads.allFinite()) throw NumericError("nonfinite gradients in adam step");
  params.adam_step += 1;
  params.m = beta1 * params.m + (1.0 - beta1) * grads;
  params.v = beta2 * params.v.array() + (1.0 - beta2) * grads.array().square();
  const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(params.adam_step));
  const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(params.adam_step));
  params.values.array() -=
      alpha * (params.m.array() / bc1) / ((params.v.array() / bc2).sqrt() + eps);
}

void soft_update(ParameterSet& target, const ParameterSet& source, double tau) {
  if (target.values.size() != source.values.size()) {
    throw ShapeError("target and source parameter lengths differ");
  }
  if (!(tau >= 0.0 && tau <= 1.0)) throw DomainError("tau must lie in [0, 1]");
  target.values = tau * source.values + (1.0 - tau) * target.values;
}

NetworkSpec actor_spec(int n, const Hyper& hyper) {
  check_positive(n, "element count");
  NetworkSpec spec;
  spec.input_size = n + 1;
  spec.layers = {
      LayerSpec::conv1d(hyper.conv_filters, hyper.conv_width, hyper.conv_stride,
                        Activation::ReLU),
      LayerSpec::flatten(),
      LayerSpec::dense(hyper.ff_units, hyper.hidden_ff_activation),
      LayerSpec::dense(n, Activation::TanhScaledPi),
  };
  spec.validate();
  return spec;
}

NetworkSpec critic_spec(int n, const Hyper& hyper) {
  check_positive(n, "element count");
  NetworkSpec spec;
  spec.input_size = 2 * n + 1;
  spec.layers = {
      LayerSpec::conv1d(hyper.conv_filters, hyper.conv_width, hyper.conv_stride,
                        Activation::ReLU),
      LayerSpec::flatten(),
      LayerSpec::dense(hyper.ff_units, hyper.hidden_ff_activation),
      LayerSpec::dense(1, Activation::Linear),
  };
  spec.validate();
  return spec;
}

NetworkSpec dense_actor_spec(int n, const std::vector<int>& hidden_units) {
  check_positive(n, "element count");
  NetworkSpec spec;
  spec.input_size = n + 1;
  for (int units : hidden_units) {
    spec.layers.push_back(LayerSpec::dense(units, Activation::ReLU));
  }
  spec.layers.push_back(LayerSpec::dense(n, Activation::TanhScaledPi));
  spec.validate();
  return spec;
}

NetworkSpec dense_critic_spec(int n, const std::vector<int>& hidden_units) {
  check_positive(n, "element count");
  NetworkSpec spec;
  spec.input_size = 2 * n + 1;
  for (int units : hidden_units) {
    spec.layers.push_back(LayerSpec::dense(units, Activation::ReLU));
  }
  spec.layers.push_back(LayerSpec::dense(1, Activation::Linear));
  spec.validate();
  return spec;
}

std::pair<NetworkSpec, ParameterSet> build_actor(int n, const Hyper& hyper,
                                                 Rng& rng) {
  NetworkSpec spec = actor_spec(n, hyper);
  ParameterSet params = init_parameters(spec, rng);
  return {std::move(spec), std::move(params)};
}

std::pair<NetworkSpec, ParameterSet> build_critic(int n, const Hyper& hyper,
                                                  Rng& rng) {
  NetworkSpec spec = critic_spec(n, hyper);
  ParameterSet params = init_parameters(spec, rng);
  return {std::move(spec), std::move(params)};
}

namespace {

constexpr char kMagic[8] = {'R', 'I', 'S', 'F', 'D', 'N', 'N', '1'};

template <typename T>
void write_pod(std::ostream& out, const T& value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_pod(std::istream& in, const char* what) {
  T value{};
  if (!in.read(reinterpret_cast<char*>(&value), sizeof(T))) {
    throw IoError(std::string("checkpoint truncated while reading ") + what);
  }
  return value;
}

}  // namespace

void save_checkpoint(const std::string& path, const NetworkSpec& spec,
                     const ParameterSet& params) {
  check_params(spec, params);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open checkpoint for writing: " + path);
  out.write(kMagic, sizeof(kMagic));
  write_pod(out, static_cast<std::int32_t>(spec.input_size));
  write_pod(out, static_cast<std::int32_t>(spec.layers.size()));
  for (const LayerSpec& layer : spec.layers) {
    write_pod(out, static_cast<std::int32_t>(layer.kind));
    write_pod(out, static_cast<std::int32_t>(layer.act));
    write_pod(out, static_cast<std::int32_t>(layer.filters));
    write_pod(out, static_cast<std::int32_t>(layer.width));
    write_pod(out, static_cast<std::int32_t>(layer.stride));
    write_pod(out, static_cast<std::int32_t>(layer.units));
  }
  write_pod(out, static_cast<std::int64_t>(params.values.size()));
  out.write(reinterpret_cast<const char*>(params.values.data()),
            static_cast<std::streamsize>(params.values.size() * sizeof(double)));
  if (!out) throw IoError("failed writing checkpoint: " + path);
}

std::pair<NetworkSpec, ParameterSet> load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint for reading: " + path);
  char magic[8] = {};
  if (!in.read(magic, sizeof(magic)) ||
      std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw IoError("not a network checkpoint: " + path);
  }
  NetworkSpec spec;
  spec.input_size = read_pod<std::int32_t>(in, "input size");
  const auto layer_count = read_pod<std::int32_t>(in, "layer count");
  if (layer_count < 0 || layer_count > 1 << 16) {
    throw IoError("implausible layer count in checkpoint: " + path);
  }
  for (std::int32_t i = 0; i < layer_count; ++i) {
    LayerSpec layer;
    layer.kind = static_cast<LayerKind>(read_pod<std::int32_t>(in, "layer kind"));
    layer.act = static_cast<Activation>(read_pod<std::int32_t>(in, "activation"));
    layer.filters = read_pod<std::int32_t>(in, "filters");
    layer.width = read_pod<std::int32_t>(in, "width");
    layer.stride = read_pod<std::int32_t>(in, "stride");
    layer.units = read_pod<std::int32_t>(in, "units");
    spec.layers.push_back(layer);
  }
  spec.validate();
  const auto stored = read_pod<std::int64_t>(in, "parameter count");
  if (stored != parameter_count(spec)) {
    throw IoError("checkpoint parameter count does not match its topology");
  }
  ParameterSet params;
  params.values = Vector::Zero(stored);
  if (!in.read(reinterpret_cast<char*>(params.values.data()),
               static_cast<std::streamsize>(stored * sizeof(double)))) {
    throw IoError("checkpoint truncated while reading parameters");
  }
  params.m = Vector::Zero(stored);
  params.v = Vector::Zero(stored);
  return {std::move(spec), std::move(params)};
}

}  // namespace risfd::nn
