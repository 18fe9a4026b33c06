#include "risfd/sigmodel.hpp"

#include <cmath>
#include <numbers>

#include "risfd/errors.hpp"

namespace risfd {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

double log2_1p(double x) { return std::log2(1.0 + x); }

void check_sigma2(double sigma2_mw) {
  if (!(sigma2_mw > 0.0)) {
    throw DomainError("noise power sigma2 must be positive");
  }
}

}  // namespace

double wrap_phase(double phi) {
  return phi - kTwoPi * std::floor((phi + kPi) / kTwoPi);
}

RVector wrap_phases(const RVector& phi) {
  RVector out(phi.size());
  for (Eigen::Index i = 0; i < phi.size(); ++i) out(i) = wrap_phase(phi(i));
  return out;
}

CVector PhaseShiftVector::unit_phasors() const {
  CVector u(phi_.size());
  for (Eigen::Index i = 0; i < phi_.size(); ++i) u(i) = std::polar(1.0, phi_(i));
  return u;
}

Beamformer::Beamformer(CVector w_in, double pmax) : w(std::move(w_in)), pmax_mw(pmax) {
  if (!(pmax >= 0.0)) throw DomainError("beamformer: pmax must be >= 0");
  if (w.squaredNorm() > pmax * (1.0 + 1e-9)) {
    throw DomainError("beamformer: ||w||^2 exceeds the power budget");
  }
}

Beamformer Beamformer::zero(int m_antennas, double pmax) {
  return Beamformer(CVector::Zero(m_antennas), pmax);
}

CVector effective_channel(const ChannelSet& ch, const PhaseShiftVector& phi,
                          int link) {
  if (link != 1 && link != 2) throw DomainError("link index must be 1 or 2");
  if (phi.size() != ch.n_elements) {
    throw ShapeError("phase vector length differs from the element count");
  }
  const CMatrix& through_ris = (link == 1) ? ch.ue_to_ris : ch.bs_to_ris;
  const CVector& ris_to_node = (link == 1) ? ch.ris_to_bs : ch.ris_to_ue;
  const CVector& direct = (link == 1) ? ch.ue_to_bs : ch.bs_to_ue;

  // h^H Theta collapses to an element-wise product with e^{j phi_n}.
  const CVector weights = ris_to_node.conjugate().cwiseProduct(phi.unit_phasors());
  CVector row = through_ris.transpose() * weights;
  row += direct.conjugate();
  return row;
}

double rate_hd(const ChannelSet& ch, const PhaseShiftVector& phi,
               const Beamformer& bs_beamformer, double sigma2_mw) {
  check_sigma2(sigma2_mw);
  const CVector row = effective_channel(ch, phi, 2);
  const double signal = std::norm(unconjugated_dot(row, bs_beamformer.w));
  return log2_1p(signal / sigma2_mw);
}

double sum_rate_fd(const ChannelSet& ch, const PhaseShiftVector& phi,
                   const Beamformer& w1, const Beamformer& w2,
                   double sigma2_mw) {
  check_sigma2(sigma2_mw);
  double sum = 0.0;
  for (int link = 1; link <= 2; ++link) {
    const Beamformer& serving = (link == 1) ? w2 : w1;
    const Beamformer& own = (link == 1) ? w1 : w2;
    const CVector& si = (link == 1) ? ch.si_bs : ch.si_ue;
    const CVector row = effective_channel(ch, phi, link);
    const double signal = std::norm(unconjugated_dot(row, serving.w));
    const double residual_si = std::norm(si.dot(own.w));  // |h_SI^H w|^2
    sum += log2_1p(signal / (residual_si + sigma2_mw));
  }
  return sum;
}

}  // namespace risfd
