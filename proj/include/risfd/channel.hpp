#ifndef RISFD_CHANNEL_HPP
#define RISFD_CHANNEL_HPP

#include <Eigen/Dense>
#include <complex>

#include "risfd/rng.hpp"

namespace risfd {

using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

/// Node placement on the standard two-dimensional layout: the BS and UE
/// sit on a line d1 apart, the RIS is offset d0 along that line and dv
/// above it. The slant distances d2 (BS-RIS) and d3 (RIS-UE) are always
/// recomputed from the stored fields.
struct Geometry {
  double d0_m = 1.0;   ///< BS-to-RIS horizontal offset
  double d1_m = 50.0;  ///< BS-UE distance
  double dv_m = 2.0;   ///< RIS vertical offset

  double bs_ris_distance() const;  ///< d2 = sqrt(d0^2 + dv^2)
  double ris_ue_distance() const;  ///< d3 = sqrt((d1-d0)^2 + dv^2)

  /// Throws DomainError unless 0 <= d0 <= d1, d1 > 0, dv > 0.
  void validate() const;
};

/// Link-budget parameters. All powers follow one convention: dB values
/// are power ratios, dBm values are absolute powers converted to
/// milliwatts by dbm_to_milliwatts(). Only power ratios enter the rate
/// expressions, so the absolute unit cancels; sticking to milliwatts
/// everywhere avoids mixed-unit bugs.
struct LinkBudget {
  double pl0_db = -30.0;        ///< path loss at the reference distance
  double ref_distance_m = 1.0;  ///< reference distance D_r
  double zeta_bu = 3.0;         ///< BS-UE path-loss exponent
  double zeta_br = 2.0;         ///< BS-RIS path-loss exponent
  double zeta_ur = 2.0;         ///< RIS-UE path-loss exponent
  double rician_k = 10.0;       ///< Rician factor for all non-Rayleigh links
  double si_pl_db = -95.0;      ///< total self-interference channel gain
  double bs_gain_dbi = 0.0;
  double ue_gain_dbi = 0.0;
  double ris_gain_dbi = 5.0;    ///< applied once per RIS-adjacent link
  double penetration_db = 10.0; ///< loss on the BS-UE and RIS-UE links
  double sigma2_dbm = -80.0;    ///< noise power
  double pmax_dbm = 5.0;        ///< transmit power budget

  double noise_power_mw() const;
  double max_power_mw() const;
  void validate() const;
};

/// One realization of every channel in the two-node RIS link. Matrices
/// are node-to-RIS (N x M); vectors are RIS-to-node (length N) or
/// node-to-node (length M). Path loss, antenna gains and penetration
/// loss are already folded into the entries, so consumers never touch
/// the link budget again.
struct ChannelSet {
  CMatrix bs_to_ris;   ///< N x M
  CMatrix ue_to_ris;   ///< N x M
  CVector ris_to_bs;   ///< N
  CVector ris_to_ue;   ///< N
  CVector bs_to_ue;    ///< M (direct)
  CVector ue_to_bs;    ///< M (direct)
  CVector si_bs;       ///< M (BS self-interference)
  CVector si_ue;       ///< M (UE self-interference)
  int n_elements = 0;
  int m_antennas = 0;

  /// Throws ShapeError if any dimension disagrees with n_elements /
  /// m_antennas, NumericError if any entry is non-finite.
  void validate() const;

  /// Copy with the four RIS-adjacent blocks zeroed (direct and SI paths
  /// only). Used by the without-RIS baseline.
  ChannelSet without_ris() const;
};

/// PL = PL0 - 10 * zeta * log10(d / Dr), in dB. Throws DomainError for
/// non-positive d.
double path_loss_db(double distance_m, double zeta, const LinkBudget& budget);

/// 10^(x/10). Converts a dB power ratio to linear scale.
double db_to_linear(double x_db);

/// 10^(x/10), result in milliwatts.
double dbm_to_milliwatts(double x_dbm);

/// Matrix of i.i.d. circularly-symmetric complex Gaussian entries with
/// zero mean and per-entry variance pl_linear.
CMatrix sample_rayleigh(int rows, int cols, double pl_linear, Rng& rng);

/// Rician fading with per-entry second moment pl_linear:
///   sqrt(pl) * ( sqrt(K/(K+1)) * H_los + sqrt(1/(K+1)) * H_nlos )
/// H_nlos is unit-variance Rayleigh. H_los is the rank-one outer product
/// of half-wavelength ULA steering vectors a(theta_r) a(theta_t)^H with
/// both angles drawn once from Uniform[0, pi), so |H_los| = 1 entrywise.
CMatrix sample_rician(int rows, int cols, double pl_linear, double k_factor,
                      Rng& rng);

/// Draws a full ChannelSet for the given geometry and budget:
///  - direct BS-UE links: Rayleigh over d1 (exponent zeta_bu),
///    BS + UE gains, minus penetration loss;
///  - BS-RIS links: Rician over d2 (zeta_br), BS + RIS gains;
///  - RIS-UE links: Rician over d3 (zeta_ur), RIS + UE gains, minus
///    penetration loss;
///  - SI links: Rician at the fixed si_pl_db total gain.
/// Gains compose in dB; the linear power gain becomes the per-entry
/// second moment of the sampled entries.
ChannelSet generate_channel_set(const Geometry& geometry,
                                const LinkBudget& budget, int n_elements,
                                int m_antennas, Rng& rng);

}  // namespace risfd

#endif  // RISFD_CHANNEL_HPP
