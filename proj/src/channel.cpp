#include "risfd/channel.hpp"

#include <cmath>
#include <numbers>

#include "risfd/errors.hpp"

namespace risfd {

namespace {

constexpr double kPi = std::numbers::pi;

/// Half-wavelength ULA steering vector, a_k = exp(j pi k cos(theta)).
CVector steering_vector(int length, double theta) {
  CVector a(length);
  const double spatial = kPi * std::cos(theta);
  for (int k = 0; k < length; ++k) {
    a(k) = std::polar(1.0, spatial * static_cast<double>(k));
  }
  return a;
}

void check_shape_args(int rows, int cols) {
  if (rows < 1 || cols < 1) {
    throw ShapeError("channel sample dimensions must be positive");
  }
}

}  // namespace

double Geometry::bs_ris_distance() const {
  return std::hypot(d0_m, dv_m);
}

double Geometry::ris_ue_distance() const {
  return std::hypot(d1_m - d0_m, dv_m);
}

void Geometry::validate() const {
  if (!(d1_m > 0.0) || !(dv_m > 0.0)) {
    throw DomainError("geometry: d1 and dv must be positive");
  }
  if (d0_m < 0.0 || d0_m > d1_m) {
    throw DomainError("geometry: d0 must lie in [0, d1]");
  }
}

double LinkBudget::noise_power_mw() const { return dbm_to_milliwatts(sigma2_dbm); }

double LinkBudget::max_power_mw() const { return dbm_to_milliwatts(pmax_dbm); }

void LinkBudget::validate() const {
  if (rician_k < 0.0) throw DomainError("link budget: rician_k must be >= 0");
  if (!(ref_distance_m > 0.0)) {
    throw DomainError("link budget: reference distance must be positive");
  }
  if (!(noise_power_mw() > 0.0) || !(max_power_mw() > 0.0)) {
    throw DomainError("link budget: linearized powers must be positive");
  }
}

void ChannelSet::validate() const {
  const auto n = static_cast<Eigen::Index>(n_elements);
  const auto m = static_cast<Eigen::Index>(m_antennas);
  const bool shapes_ok =
      bs_to_ris.rows() == n && bs_to_ris.cols() == m && ue_to_ris.rows() == n &&
      ue_to_ris.cols() == m && ris_to_bs.size() == n && ris_to_ue.size() == n &&
      bs_to_ue.size() == m && ue_to_bs.size() == m && si_bs.size() == m &&
      si_ue.size() == m;
  if (!shapes_ok) throw ShapeError("channel set: inconsistent dimensions");
  const bool finite = bs_to_ris.allFinite() && ue_to_ris.allFinite() &&
                      ris_to_bs.allFinite() && ris_to_ue.allFinite() &&
                      bs_to_ue.allFinite() && ue_to_bs.allFinite() &&
                      si_bs.allFinite() && si_ue.allFinite();
  if (!finite) throw NumericError("channel set: non-finite entries");
}

ChannelSet ChannelSet::without_ris() const {
  ChannelSet out = *this;
  out.bs_to_ris.setZero();
  out.ue_to_ris.setZero();
  out.ris_to_bs.setZero();
  out.ris_to_ue.setZero();
  return out;
}

double path_loss_db(double distance_m, double zeta, const LinkBudget& budget) {
  if (!(distance_m > 0.0)) {
    throw DomainError("path_loss_db: distance must be positive");
  }
  return budget.pl0_db - 10.0 * zeta * std::log10(distance_m / budget.ref_distance_m);
}

double db_to_linear(double x_db) { return std::pow(10.0, x_db / 10.0); }

double dbm_to_milliwatts(double x_dbm) { return std::pow(10.0, x_dbm / 10.0); }

CMatrix sample_rayleigh(int rows, int cols, double pl_linear, Rng& rng) {
  check_shape_args(rows, cols);
  if (pl_linear < 0.0) {
    throw DomainError("sample_rayleigh: pl_linear must be >= 0");
  }
  CMatrix h(rows, cols);
  // Per-entry variance pl_linear, split evenly over the two quadratures.
  const double comp_std = std::sqrt(pl_linear / 2.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const double re = gauss(rng);
      const double im = gauss(rng);
      h(r, c) = std::complex<double>(comp_std * re, comp_std * im);
    }
  }
  return h;
}

CMatrix sample_rician(int rows, int cols, double pl_linear, double k_factor,
                      Rng& rng) {
  check_shape_args(rows, cols);
  if (k_factor < 0.0) {
    throw DomainError("sample_rician: k_factor must be >= 0");
  }
  std::uniform_real_distribution<double> angle(0.0, kPi);
  const double theta_rx = angle(rng);
  const double theta_tx = angle(rng);
  const CVector a_rx = steering_vector(rows, theta_rx);
  const CVector a_tx = steering_vector(cols, theta_tx);

  const double los_weight = std::sqrt(k_factor / (k_factor + 1.0));
  const double nlos_weight = std::sqrt(1.0 / (k_factor + 1.0));
  CMatrix h = nlos_weight * sample_rayleigh(rows, cols, 1.0, rng);
  h.noalias() += los_weight * (a_rx * a_tx.adjoint());
  return std::sqrt(pl_linear) * h;
}

ChannelSet generate_channel_set(const Geometry& geometry,
                                const LinkBudget& budget, int n_elements,
                                int m_antennas, Rng& rng) {
  geometry.validate();
  budget.validate();
  if (n_elements < 1 || m_antennas < 1) {
    throw DomainError("generate_channel_set: need n >= 1 and m >= 1");
  }

  const double d2 = geometry.bs_ris_distance();
  const double d3 = geometry.ris_ue_distance();

  const double direct_db = path_loss_db(geometry.d1_m, budget.zeta_bu, budget) +
                           budget.bs_gain_dbi + budget.ue_gain_dbi -
                           budget.penetration_db;
  const double bs_ris_db = path_loss_db(d2, budget.zeta_br, budget) +
                           budget.bs_gain_dbi + budget.ris_gain_dbi;
  const double ris_ue_db = path_loss_db(d3, budget.zeta_ur, budget) +
                           budget.ris_gain_dbi + budget.ue_gain_dbi -
                           budget.penetration_db;

  const double direct_lin = db_to_linear(direct_db);
  const double bs_ris_lin = db_to_linear(bs_ris_db);
  const double ris_ue_lin = db_to_linear(ris_ue_db);
  const double si_lin = db_to_linear(budget.si_pl_db);
  const double k = budget.rician_k;

  ChannelSet ch;
  ch.n_elements = n_elements;
  ch.m_antennas = m_antennas;
  // Draw order is part of the reproducibility contract; keep it fixed.
  ch.bs_to_ris = sample_rician(n_elements, m_antennas, bs_ris_lin, k, rng);
  ch.ue_to_ris = sample_rician(n_elements, m_antennas, ris_ue_lin, k, rng);
  ch.ris_to_bs = sample_rician(n_elements, 1, bs_ris_lin, k, rng).col(0);
  ch.ris_to_ue = sample_rician(n_elements, 1, ris_ue_lin, k, rng).col(0);
  ch.bs_to_ue = sample_rayleigh(m_antennas, 1, direct_lin, rng).col(0);
  ch.ue_to_bs = sample_rayleigh(m_antennas, 1, direct_lin, rng).col(0);
  ch.si_bs = sample_rician(m_antennas, 1, si_lin, k, rng).col(0);
  ch.si_ue = sample_rician(m_antennas, 1, si_lin, k, rng).col(0);
  ch.validate();
  return ch;
}

}  // namespace risfd
