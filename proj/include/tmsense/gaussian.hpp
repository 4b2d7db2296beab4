#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>

namespace tmsense {

using Complex = std::complex<double>;
using RVector = Eigen::VectorXd;
using RMatrix = Eigen::MatrixXd;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;

/// Flat layout of R_t temporal x M spatial modes. Flat index l = j + t*M
/// (0-based), so spatial index varies fastest.
struct ModeLayout {
  int temporal = 1;
  int spatial = 1;

  int n_modes() const { return temporal * spatial; }
  int flat(int t, int j) const {
    if (t < 0 || t >= temporal || j < 0 || j >= spatial)
      throw std::out_of_range("ModeLayout: mode index out of range");
    return j + t * spatial;
  }
  int temporal_of(int l) const { return l / spatial; }
  int spatial_of(int l) const { return l % spatial; }
};

/// Multimode Gaussian state in the covariance-matrix picture.
/// Quadratures are interleaved (x1,p1,x2,p2,...) with hbar = 1 and
/// vacuum variance 1/2 per quadrature, a = (x + i p)/sqrt(2).
struct GaussianState {
  int n_modes = 0;
  RVector mean;  // length 2*n_modes
  RMatrix cov;   // 2*n_modes x 2*n_modes, symmetric

  static GaussianState vacuum(int n_modes);

  /// Re-symmetrize the covariance after an update.
  void symmetrize() { cov = ((cov + cov.transpose()) / 2.0).eval(); }

  /// det(2*cov) == 1 for pure states.
  bool is_pure(double tol = 1e-8) const;

  /// Smallest eigenvalue of cov + (i/2)*Omega; >= -tol for physical states.
  double uncertainty_margin() const;
};

/// Bogoliubov map a -> U a + V a^dag + alpha.
struct BogoliubovMap {
  CMatrix u;
  CMatrix v;
  CVector alpha;

  int n_modes() const { return static_cast<int>(u.rows()); }

  /// Throws if U U^dag - V V^dag != I or U V^T is not symmetric.
  void validate(double tol = 1e-10) const;
};

/// U = W diag(cosh r), V = W diag(sinh r). W must be unitary.
BogoliubovMap bogoliubov_from_factors(const CMatrix& w, const RVector& r,
                                      const CVector& alpha);

GaussianState apply_bogoliubov(const GaussianState& state,
                               const BogoliubovMap& map);

/// Rotates mode (t,j) by phases[j] for every temporal index t.
/// Convention: the per-mode block on (x,p) is [[cos, sin], [-sin, cos]].
GaussianState phase_encode(const GaussianState& state, const RVector& phases,
                           const ModeLayout& layout);

/// Uniform pure-loss channel: mean -> sqrt(eta) mean,
/// cov -> eta cov + (1-eta)/2 I.
GaussianState loss_channel(const GaussianState& state, double eta);

double mean_photon(const GaussianState& state, int l);

/// Mean and covariance of simultaneously measuring
/// x cos(theta_l) + p sin(theta_l) on every mode.
struct QuadratureMarginal {
  RVector mean;
  RMatrix cov;
};
QuadratureMarginal quadrature_marginal(const GaussianState& state,
                                       const RVector& lo_phases);

}  // namespace tmsense
