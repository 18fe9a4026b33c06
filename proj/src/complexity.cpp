#include "risfd/complexity.hpp"

#include <sstream>

#include "risfd/errors.hpp"

namespace risfd::complexity {

namespace {

std::int64_t pick(const ComplexityReport& r, CostKind chi) {
  switch (chi) {
    case CostKind::Parameters:
      return r.c_p;
    case CostKind::Multiplications:
      return r.c_m;
    case CostKind::Additions:
      return r.c_a;
  }
  throw DomainError("unknown cost kind");
}

}  // namespace

ComplexityReport conventional_complexity(
    const std::array<std::int64_t, 4>& eta) {
  for (std::int64_t e : eta) {
    if (e < 1) throw DomainError("layer neuron counts must be >= 1");
  }
  ComplexityReport r;
  for (int i = 0; i < 3; ++i) {
    r.c_p += (eta[i] + 1) * eta[i + 1];
    r.c_m += eta[i] * eta[i + 1];
    r.c_a += eta[i] * eta[i + 1] + eta[i + 1];
  }
  return r;
}

ComplexityReport proposed_complexity(std::int64_t eta1, std::int64_t eta3,
                                     std::int64_t eta4, std::int64_t fz,
                                     std::int64_t fn, std::int64_t fs) {
  if (eta1 < 1 || eta3 < 1 || eta4 < 1 || fz < 1 || fn < 1 || fs < 1) {
    throw DomainError("all sizes must be >= 1");
  }
  if (eta1 < fz) {
    std::ostringstream oss;
    oss << "conv window of width " << fz << " does not fit an input of length "
        << eta1;
    throw ConfigError(oss.str());
  }
  const std::int64_t eta_f = (eta1 - fz) / fs + 1;
  if (eta_f < 1) throw ConfigError("conv output length is below 1");
  ComplexityReport r;
  r.c_p = (eta_f * eta3 + fz + 1) * fn + (eta4 + 1) * eta3 + eta4;
  r.c_m = (fz + eta3) * eta_f * fn + eta3 * eta4;
  r.c_a = (fz + eta3 + 1) * eta_f * fn + (eta4 + 1) * eta3 + eta4;
  return r;
}

double reduction(const ComplexityReport& proposed_actor,
                 const ComplexityReport& proposed_critic,
                 const ComplexityReport& conventional_actor,
                 const ComplexityReport& conventional_critic, CostKind chi) {
  const std::int64_t num = pick(proposed_actor, chi) + pick(proposed_critic, chi);
  const std::int64_t den =
      pick(conventional_actor, chi) + pick(conventional_critic, chi);
  if (den <= 0) throw DomainError("conventional cost total must be positive");
  return 1.0 - static_cast<double>(num) / static_cast<double>(den);
}

std::int64_t count_parameters(const nn::NetworkSpec& spec) {
  spec.validate();
  std::int64_t total = 0;
  std::int64_t channels = 1;
  std::int64_t length = spec.input_size;
  for (const nn::LayerSpec& layer : spec.layers) {
    switch (layer.kind) {
      case nn::LayerKind::Conv1D:
        total += static_cast<std::int64_t>(layer.filters) * (layer.width + 1);
        length = (length - layer.width) / layer.stride + 1;
        channels = layer.filters;
        break;
      case nn::LayerKind::Flatten:
        length *= channels;
        channels = 1;
        break;
      case nn::LayerKind::Dense:
        total += static_cast<std::int64_t>(layer.units) * (length + 1);
        length = layer.units;
        break;
    }
  }
  return total;
}

double asymptotic_reduction_mults(int ff_units, int fz, int fn, int fs,
                                  int dense_h1, int dense_h2) {
  if (ff_units < 1 || fz < 1 || fn < 1 || fs < 1 || dense_h1 < 1 ||
      dense_h2 < 1) {
    throw DomainError("all sizes must be >= 1");
  }
  // Leading N coefficients of the summed actor + critic multiplication
  // counts: the conv terms grow with eta_F ~ eta_1/fs (eta_1 is N+1 for
  // the actor and 2N+1 for the critic) and the actor output adds
  // eta_3 * N; the conventional baseline grows through eta_1 * h1 and
  // the actor's h2 * N output block.
  const double proposed =
      3.0 * static_cast<double>(fz + ff_units) * fn / fs + ff_units;
  const double conventional = 3.0 * dense_h1 + dense_h2;
  return 1.0 - proposed / conventional;
}

}  // namespace risfd::complexity
