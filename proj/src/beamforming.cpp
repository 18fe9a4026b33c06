#include "risfd/beamforming.hpp"

#include <cmath>
#include <complex>
#include <limits>
#include <sstream>
#include <utility>

#include "risfd/errors.hpp"

namespace risfd {

namespace {

using Complex = std::complex<double>;

void check_pmax(double pmax_mw) {
  if (!(pmax_mw > 0.0) || !std::isfinite(pmax_mw)) {
    throw DomainError("pmax must be positive and finite");
  }
}

// Scales w back onto the power sphere when round-off pushed it past the
// budget, so the Beamformer invariant holds with the solver's looser
// bisection tolerance.
Beamformer make_feasible(CVector w, double pmax_mw) {
  const double p = w.squaredNorm();
  if (!std::isfinite(p)) throw NumericError("beamformer power is not finite");
  if (p > pmax_mw) w *= std::sqrt(pmax_mw / p);
  return Beamformer(std::move(w), pmax_mw);
}

const CVector& si_channel(const ChannelSet& ch, int node) {
  return (node == 1) ? ch.si_bs : ch.si_ue;
}

}  // namespace

Beamformer mrt_beamformer(const CVector& effective_row, double pmax_mw) {
  check_pmax(pmax_mw);
  const double nsq = effective_row.squaredNorm();
  if (!std::isfinite(nsq)) throw NumericError("effective channel is not finite");
  if (nsq <= std::numeric_limits<double>::min()) {
    throw DegenerateChannelError("effective channel is numerically zero");
  }
  CVector w = std::sqrt(pmax_mw / nsq) * effective_row.conjugate();
  return Beamformer(std::move(w), pmax_mw);
}

CVector solve_fd_system(const CVector& h_si, double delta, double v,
                        const CVector& rhs, FdSolveRoute route) {
  if (delta < 0.0 || v < 0.0) {
    throw DomainError("delta and v must be nonnegative");
  }
  if (h_si.size() != rhs.size()) {
    throw ShapeError("self-interference channel and rhs sizes differ");
  }
  if (delta == 0.0 && v == 0.0) return rhs;  // identity-system convention

  if (v == 0.0) {
    // Rank-one system: consistent only when rhs lies along h_si, in
    // which case the least-norm solution is a multiple of h_si.
    const double hsq = h_si.squaredNorm();
    if (hsq <= std::numeric_limits<double>::min()) {
      if (rhs.norm() <= 1e-12) return CVector::Zero(rhs.size());
      throw NumericError("singular system: zero matrix with nonzero rhs");
    }
    const Complex coeff = h_si.dot(rhs) / hsq;  // h^H rhs / ||h||^2
    if ((rhs - coeff * h_si).norm() > 1e-9 * (1.0 + rhs.norm())) {
      throw NumericError("singular system at v = 0: rhs not in range");
    }
    return (coeff / (delta * hsq)) * h_si;
  }

  if (route == FdSolveRoute::ShermanMorrison) {
    // (v I + delta h h^H)^{-1} rhs in closed form.
    CVector w = rhs / v;
    if (delta > 0.0) {
      const Complex hr = h_si.dot(rhs);
      w -= h_si * (delta * hr / (v * (v + delta * h_si.squaredNorm())));
    }
    return w;
  }

  CMatrix a = v * CMatrix::Identity(rhs.size(), rhs.size());
  if (delta > 0.0) a.noalias() += delta * h_si * h_si.adjoint();
  return a.ldlt().solve(rhs);
}

double bisection_dual(const CVector& b_vec, const CVector& h_si, double delta,
                      double pmax_mw, double tol) {
  check_pmax(pmax_mw);
  if (!(tol > 0.0)) throw DomainError("bisection tolerance must be positive");

  const auto power_at = [&](double v) {
    return solve_fd_system(h_si, delta, v, b_vec).squaredNorm();
  };

  // Inactive constraint: the unconstrained solution may already fit the
  // budget. An inconsistent v = 0 system means ||w(v)|| blows up as
  // v -> 0+, i.e. the constraint is active.
  bool active = false;
  try {
    if (power_at(0.0) <= pmax_mw) return 0.0;
  } catch (const NumericError&) {
    active = true;
  }
  (void)active;

  double hi = b_vec.norm() / std::sqrt(pmax_mw);
  if (hi <= 0.0) {
    throw NumericError("bisection bracket collapsed: zero rhs with active constraint");
  }
  double p_hi = power_at(hi);
  int widen = 0;
  while (p_hi > pmax_mw && widen < 64) {
    hi *= 2.0;
    p_hi = power_at(hi);
    ++widen;
  }
  if (p_hi > pmax_mw) {
    std::ostringstream oss;
    oss << "bisection bracket failure: ||w(" << hi << ")||^2 = " << p_hi
        << " still exceeds pmax = " << pmax_mw;
    throw NumericError(oss.str());
  }
  if (std::abs(p_hi - pmax_mw) <= tol * pmax_mw) return hi;

  double lo = 0.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double p_mid = power_at(mid);
    if (std::abs(p_mid - pmax_mw) <= tol * pmax_mw) return mid;
    if (p_mid > pmax_mw) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  std::ostringstream oss;
  oss << "bisection failed to reach |power - pmax| <= " << tol * pmax_mw
      << " within 200 iterations (bracket [" << lo << ", " << hi << "])";
  throw NumericError(oss.str());
}

Beamformer fd_beamformer_update(const ChannelSet& ch,
                                const PhaseShiftVector& phi, int transmit_node,
                                const Beamformer& opposing,
                                const Beamformer& feasible, double pmax_mw,
                                double sigma2_mw, double bisection_tol) {
  check_pmax(pmax_mw);
  if (!(sigma2_mw > 0.0)) throw DomainError("sigma2 must be positive");
  if (transmit_node != 1 && transmit_node != 2) {
    throw DomainError("transmit node must be 1 or 2");
  }
  const int other = 3 - transmit_node;

  // Link received at `other` is the one this beamformer serves; the
  // link received at `transmit_node` is served by the opposing one.
  const CVector row_served = effective_channel(ch, phi, other);
  const CVector row_opposing = effective_channel(ch, phi, transmit_node);
  const CVector h_served = row_served.conjugate();
  const CVector& si_own = si_channel(ch, transmit_node);
  const CVector& si_other = si_channel(ch, other);

  const double b = std::norm(unconjugated_dot(row_opposing, opposing.w));
  const double b_tilde = std::norm(si_other.dot(opposing.w)) + sigma2_mw;
  const double si_feas = std::norm(si_own.dot(feasible.w)) + sigma2_mw;
  const Complex h_dot_feas = h_served.dot(feasible.w);  // h^H w-tilde

  const double scale = (1.0 + b / si_feas) / b_tilde;
  const CVector b_vec = (scale * h_dot_feas) * h_served;
  const double delta =
      b * (std::norm(h_dot_feas) + b_tilde) / (b_tilde * si_feas * si_feas);
  if (!std::isfinite(delta) || !b_vec.allFinite()) {
    throw NumericError("nonfinite intermediates in the FD beamformer update");
  }

  const double v = bisection_dual(b_vec, si_own, delta, pmax_mw, bisection_tol);
  CVector w = solve_fd_system(si_own, delta, v, b_vec);
  return make_feasible(std::move(w), pmax_mw);
}

std::pair<Beamformer, Beamformer> fd_alternating_solve(
    const ChannelSet& ch, const PhaseShiftVector& phi, double pmax_mw,
    double sigma2_mw, const FdSolverOptions& options) {
  check_pmax(pmax_mw);
  if (!(sigma2_mw > 0.0)) throw DomainError("sigma2 must be positive");
  if (options.max_iterations < 1) throw DomainError("max_iterations must be >= 1");
  if (!(options.tol > 0.0)) throw DomainError("tol must be positive");

  const auto mrt_or_zero = [&](int node) {
    const CVector row = effective_channel(ch, phi, 3 - node);
    try {
      return mrt_beamformer(row, pmax_mw);
    } catch (const DegenerateChannelError&) {
      return Beamformer::zero(ch.m_antennas, pmax_mw);
    }
  };
  Beamformer w1 = mrt_or_zero(1);
  Beamformer w2 = mrt_or_zero(2);

  double best_rate = sum_rate_fd(ch, phi, w1, w2, sigma2_mw);
  std::pair<Beamformer, Beamformer> best{w1, w2};
  double last_rate = best_rate;

  for (int it = 0; it < options.max_iterations; ++it) {
    w1 = fd_beamformer_update(ch, phi, 1, w2, w1, pmax_mw, sigma2_mw,
                              options.bisection_tol);
    double rate = sum_rate_fd(ch, phi, w1, w2, sigma2_mw);
    if (rate > best_rate) {
      best_rate = rate;
      best = {w1, w2};
    }

    w2 = fd_beamformer_update(ch, phi, 2, w1, w2, pmax_mw, sigma2_mw,
                              options.bisection_tol);
    rate = sum_rate_fd(ch, phi, w1, w2, sigma2_mw);
    if (rate > best_rate) {
      best_rate = rate;
      best = {w1, w2};
    }

    if (std::abs(rate - last_rate) <= options.tol) break;
    last_rate = rate;
  }
  return best;
}

}  // namespace risfd
