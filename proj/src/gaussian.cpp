#include "tmsense/gaussian.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

namespace tmsense {

GaussianState GaussianState::vacuum(int n_modes) {
  if (n_modes < 1) throw std::invalid_argument("vacuum: n_modes must be >= 1");
  GaussianState s;
  s.n_modes = n_modes;
  s.mean = RVector::Zero(2 * n_modes);
  s.cov = 0.5 * RMatrix::Identity(2 * n_modes, 2 * n_modes);
  return s;
}

bool GaussianState::is_pure(double tol) const {
  double d = (2.0 * cov).determinant();
  return std::abs(d - 1.0) < tol;
}

double GaussianState::uncertainty_margin() const {
  const int n = n_modes;
  CMatrix m = cov.cast<Complex>();
  // Omega for interleaved ordering: per-mode blocks [[0,1],[-1,0]].
  for (int k = 0; k < n; ++k) {
    m(2 * k, 2 * k + 1) += Complex(0, 0.5);
    m(2 * k + 1, 2 * k) -= Complex(0, 0.5);
  }
  Eigen::SelfAdjointEigenSolver<CMatrix> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

void BogoliubovMap::validate(double tol) const {
  const int n = n_modes();
  if (v.rows() != n || v.cols() != n || u.cols() != n ||
      alpha.size() != n)
    throw std::invalid_argument("BogoliubovMap: dimension mismatch");
  CMatrix comm = u * u.adjoint() - v * v.adjoint() -
                 CMatrix::Identity(n, n);
  if (comm.cwiseAbs().maxCoeff() > tol)
    throw std::invalid_argument("BogoliubovMap: U U^dag - V V^dag != I");
  CMatrix uvt = u * v.transpose();
  if ((uvt - uvt.transpose()).cwiseAbs().maxCoeff() > tol)
    throw std::invalid_argument("BogoliubovMap: U V^T not symmetric");
}

BogoliubovMap bogoliubov_from_factors(const CMatrix& w, const RVector& r,
                                      const CVector& alpha) {
  const int n = static_cast<int>(w.rows());
  if (w.cols() != n || r.size() != n || alpha.size() != n)
    throw std::invalid_argument("bogoliubov_from_factors: dimension mismatch");
  CMatrix wt = w * w.adjoint();
  if ((wt - CMatrix::Identity(n, n)).cwiseAbs().maxCoeff() > 1e-10)
    throw std::invalid_argument("bogoliubov_from_factors: W not unitary");
  BogoliubovMap map;
  map.u = w * r.array().cosh().matrix().cast<Complex>().asDiagonal();
  map.v = w * r.array().sinh().matrix().cast<Complex>().asDiagonal();
  map.alpha = alpha;
  map.validate();
  return map;
}

GaussianState apply_bogoliubov(const GaussianState& state,
                               const BogoliubovMap& map) {
  const int n = state.n_modes;
  if (map.n_modes() != n)
    throw std::invalid_argument("apply_bogoliubov: dimension mismatch");

  // Real symplectic equivalent in the interleaved ordering, fixed so that
  // a squeezer with V = sinh(r) > 0 squeezes x and a phase map U = e^{i phi}
  // acts as [[cos, sin], [-sin, cos]] on (x, p).
  RMatrix s(2 * n, 2 * n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      Complex um = map.u(i, j), vm = map.v(i, j);
      s(2 * i, 2 * j) = std::real(um - vm);
      s(2 * i, 2 * j + 1) = std::imag(um + vm);
      s(2 * i + 1, 2 * j) = -std::imag(um - vm);
      s(2 * i + 1, 2 * j + 1) = std::real(um + vm);
    }
  }

  GaussianState out;
  out.n_modes = n;
  out.mean = s * state.mean;
  for (int i = 0; i < n; ++i) {
    out.mean(2 * i) += std::sqrt(2.0) * std::real(map.alpha(i));
    out.mean(2 * i + 1) += std::sqrt(2.0) * std::imag(map.alpha(i));
  }
  out.cov = s * state.cov * s.transpose();
  out.symmetrize();
  return out;
}

GaussianState phase_encode(const GaussianState& state, const RVector& phases,
                           const ModeLayout& layout) {
  if (layout.n_modes() != state.n_modes)
    throw std::invalid_argument("phase_encode: layout/state mismatch");
  if (phases.size() != layout.spatial)
    throw std::invalid_argument("phase_encode: phase vector length != M");

  RMatrix rot = RMatrix::Zero(2 * state.n_modes, 2 * state.n_modes);
  for (int l = 0; l < state.n_modes; ++l) {
    double phi = phases(layout.spatial_of(l));
    double c = std::cos(phi), sn = std::sin(phi);
    rot(2 * l, 2 * l) = c;
    rot(2 * l, 2 * l + 1) = sn;
    rot(2 * l + 1, 2 * l) = -sn;
    rot(2 * l + 1, 2 * l + 1) = c;
  }
  GaussianState out;
  out.n_modes = state.n_modes;
  out.mean = rot * state.mean;
  out.cov = rot * state.cov * rot.transpose();
  out.symmetrize();
  return out;
}

GaussianState loss_channel(const GaussianState& state, double eta) {
  if (!(eta > 0.0) || eta > 1.0)
    throw std::invalid_argument("loss_channel: eta must be in (0, 1]");
  GaussianState out;
  out.n_modes = state.n_modes;
  out.mean = std::sqrt(eta) * state.mean;
  out.cov = eta * state.cov;
  out.cov.diagonal().array() += (1.0 - eta) / 2.0;
  out.symmetrize();
  return out;
}

double mean_photon(const GaussianState& state, int l) {
  if (l < 0 || l >= state.n_modes)
    throw std::out_of_range("mean_photon: mode index out of range");
  double vx = state.cov(2 * l, 2 * l);
  double vp = state.cov(2 * l + 1, 2 * l + 1);
  double mx = state.mean(2 * l), mp = state.mean(2 * l + 1);
  return (vx + vp - 1.0) / 2.0 + (mx * mx + mp * mp) / 2.0;
}

QuadratureMarginal quadrature_marginal(const GaussianState& state,
                                       const RVector& lo_phases) {
  const int n = state.n_modes;
  if (lo_phases.size() != n)
    throw std::invalid_argument("quadrature_marginal: one LO phase per mode");
  RMatrix p = RMatrix::Zero(n, 2 * n);
  for (int l = 0; l < n; ++l) {
    p(l, 2 * l) = std::cos(lo_phases(l));
    p(l, 2 * l + 1) = std::sin(lo_phases(l));
  }
  QuadratureMarginal out;
  out.mean = p * state.mean;
  out.cov = p * state.cov * p.transpose();
  out.cov = ((out.cov + out.cov.transpose()) / 2.0).eval();
  return out;
}

}  // namespace tmsense
