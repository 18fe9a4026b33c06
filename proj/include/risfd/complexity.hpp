#ifndef RISFD_COMPLEXITY_HPP
#define RISFD_COMPLEXITY_HPP

#include <array>
#include <cstdint>

#include "risfd/neural.hpp"

namespace risfd::complexity {

/// Stored-parameter, real-multiplication, and real-addition counts for
/// one network. Each activation is costed as one real addition.
struct ComplexityReport {
  std::int64_t c_p = 0;
  std::int64_t c_m = 0;
  std::int64_t c_a = 0;
};

enum class CostKind { Parameters, Multiplications, Additions };

/// Three-weight-layer fully connected network with neuron counts
/// eta = [input, hidden1, hidden2, output]:
///   C_P = sum (eta_i + 1) eta_{i+1}
///   C_M = sum eta_i eta_{i+1}
///   C_A = C_M + sum eta_{i+1}
ComplexityReport conventional_complexity(const std::array<std::int64_t, 4>& eta);

/// Conv-front network: Conv1D(fn filters, width fz, stride fs) over an
/// eta1-long input, feed-forward layer of eta3 units, output of eta4.
/// With eta_f = floor((eta1 - fz)/fs) + 1:
///   C_P = (eta_f eta3 + fz + 1) fn + (eta4 + 1) eta3 + eta4
///   C_M = (fz + eta3) eta_f fn + eta3 eta4
///   C_A = (fz + eta3 + 1) eta_f fn + (eta4 + 1) eta3 + eta4
ComplexityReport proposed_complexity(std::int64_t eta1, std::int64_t eta3,
                                     std::int64_t eta4, std::int64_t fz,
                                     std::int64_t fn, std::int64_t fs);

/// 1 - (proposed actor + critic cost) / (conventional actor + critic
/// cost) for the chosen cost kind. Domain error on a zero denominator.
double reduction(const ComplexityReport& proposed_actor,
                 const ComplexityReport& proposed_critic,
                 const ComplexityReport& conventional_actor,
                 const ComplexityReport& conventional_critic, CostKind chi);

/// Weights + biases of an arbitrary layer stack by direct enumeration;
/// the cross-check oracle for the closed forms above.
std::int64_t count_parameters(const nn::NetworkSpec& spec);

/// Limit of the multiplication-count reduction as N grows with the
/// layer hyperparameters fixed (actor input N+1, critic input 2N+1,
/// actor output N, critic output 1, shared hidden widths dense_h1 and
/// dense_h2 for the conventional baseline).
double asymptotic_reduction_mults(int ff_units, int fz, int fn, int fs,
                                  int dense_h1, int dense_h2);

}  // namespace risfd::complexity

#endif  // RISFD_COMPLEXITY_HPP
