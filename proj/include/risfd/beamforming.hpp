#ifndef RISFD_BEAMFORMING_HPP
#define RISFD_BEAMFORMING_HPP

#include <utility>

#include "risfd/sigmodel.hpp"

namespace risfd {

/// Options for the FD beamforming solver.
struct FdSolverOptions {
  double tol = 1e-6;          ///< stop when |delta sum-rate| falls below this
  int max_iterations = 50;    ///< alternating w1/w2 sweeps
  double bisection_tol = 1e-8;  ///< relative power tolerance for the dual search
};

/// Closed-form HD optimum: w = sqrt(pmax) * conj(row) / ||row||, which
/// maximizes |row . w| under ||w||^2 <= pmax. Throws
/// DegenerateChannelError when the effective channel is numerically
/// zero; callers fall back to a zero beamformer.
Beamformer mrt_beamformer(const CVector& effective_row, double pmax_mw);

/// Linear-system route for w = (delta * h_si h_si^H + v I)^{-1} B.
/// Direct is an M x M Hermitian solve; ShermanMorrison exploits the
/// rank-one-plus-scaled-identity structure. Both agree to 1e-10 and a
/// regression test keeps it that way.
enum class FdSolveRoute { Direct, ShermanMorrison };

/// Solves (delta * h_si h_si^H + v I) w = rhs. At v = 0 the matrix is
/// singular; the least-squares least-norm solution is returned when the
/// system is consistent and NumericError is thrown otherwise. The fully
/// degenerate delta = 0, v = 0 case returns rhs itself (identity
/// convention used by the dual search).
CVector solve_fd_system(const CVector& h_si, double delta, double v,
                        const CVector& rhs,
                        FdSolveRoute route = FdSolveRoute::Direct);

/// Finds the dual variable v >= 0 of the transmit-power constraint.
/// Returns 0 when the unconstrained solution is already feasible;
/// otherwise bisects the monotone map v -> ||w(v)||^2 over
/// [0, ||B|| / sqrt(pmax)] until |  ||w(v)||^2 - pmax | <= tol * pmax.
double bisection_dual(const CVector& b_vec, const CVector& h_si, double delta,
                      double pmax_mw, double tol);

/// One semi-closed FD update of the beamformer transmitted by
/// `transmit_node` (1 = BS, i.e. w1; 2 = UE, i.e. w2), which serves the
/// link received at the other node. `opposing` is the other node's
/// beamformer, held fixed; `feasible` is the current iterate of the
/// beamformer being updated (the linearization point). Returns a
/// power-feasible beamformer.
Beamformer fd_beamformer_update(const ChannelSet& ch,
                                const PhaseShiftVector& phi, int transmit_node,
                                const Beamformer& opposing,
                                const Beamformer& feasible, double pmax_mw,
                                double sigma2_mw,
                                double bisection_tol = 1e-8);

/// Alternating FD solver for fixed phases: starts from MRT on each
/// link's own effective channel, sweeps w1 then w2 with
/// fd_beamformer_update until the sum-rate change drops below tol or
/// max_iterations is hit, and returns the best iterate seen (per-sweep
/// monotonicity is not assumed).
std::pair<Beamformer, Beamformer> fd_alternating_solve(
    const ChannelSet& ch, const PhaseShiftVector& phi, double pmax_mw,
    double sigma2_mw, const FdSolverOptions& options = {});

}  // namespace risfd

#endif  // RISFD_BEAMFORMING_HPP
