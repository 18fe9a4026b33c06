#ifndef RISFD_SIGMODEL_HPP
#define RISFD_SIGMODEL_HPP

#include <complex>

#include <Eigen/Dense>

#include "risfd/channel.hpp"
#include "risfd/errors.hpp"

namespace risfd {

enum class OperatingMode { HD, FD };

/// row . w without conjugation (Eigen's dot() conjugates its first
/// argument; effective-channel rows are stored pre-conjugated).
inline std::complex<double> unconjugated_dot(const CVector& row,
                                             const CVector& w) {
  if (row.size() != w.size()) {
    throw ShapeError("effective channel and beamformer sizes differ");
  }
  return row.cwiseProduct(w).sum();
}

/// Wraps an angle into [-pi, pi). Idempotent.
double wrap_phase(double phi);
RVector wrap_phases(const RVector& phi);

/// The RIS configuration: N phase shifts phi_n in [-pi, pi). The
/// diagonal reflection matrix diag(e^{j phi_1}, ..., e^{j phi_N}) is
/// never materialized; consumers multiply element-wise by unit_phasors().
class PhaseShiftVector {
 public:
  PhaseShiftVector() = default;
  explicit PhaseShiftVector(const RVector& raw) : phi_(wrap_phases(raw)) {}

  int size() const { return static_cast<int>(phi_.size()); }
  const RVector& angles() const { return phi_; }
  CVector unit_phasors() const;

 private:
  RVector phi_;
};

/// Transmit beamformer with its power budget; construction enforces
/// ||w||^2 <= pmax (tiny relative slack for solver round-off).
struct Beamformer {
  CVector w;
  double pmax_mw = 0.0;

  Beamformer() = default;
  Beamformer(CVector w_in, double pmax);

  double power() const { return w.squaredNorm(); }
  static Beamformer zero(int m_antennas, double pmax);
};

/// The composite 1 x M row h_{RS_i}^H Theta H_{S-bar_i,R} + h_direct^H
/// seen by the beamformer serving link i (the node S_i receives;
/// i = 1 is the BS side, i = 2 the UE side). Returned as a length-M
/// vector of the row entries: the received amplitude is the
/// unconjugated dot product row . w.
CVector effective_channel(const ChannelSet& ch, const PhaseShiftVector& phi,
                          int link);

/// Downlink HD rate log2(1 + |row . w|^2 / sigma2) in bps/Hz, where row
/// is the link-2 effective channel and w the BS beamformer.
double rate_hd(const ChannelSet& ch, const PhaseShiftVector& phi,
               const Beamformer& bs_beamformer, double sigma2_mw);

/// FD sum-rate: for each link i the served signal |row_i . w_{other}|^2
/// competes against residual self-interference |h_{SI,i}^H w_i|^2 plus
/// noise. w1 transmits from the BS, w2 from the UE.
double sum_rate_fd(const ChannelSet& ch, const PhaseShiftVector& phi,
                   const Beamformer& w1, const Beamformer& w2,
                   double sigma2_mw);

}  // namespace risfd

#endif  // RISFD_SIGMODEL_HPP
