#include "tmsense/fock.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

namespace tmsense::fock {

namespace {

CMatrix annihilation(int dim) {
  CMatrix a = CMatrix::Zero(dim, dim);
  for (int n = 1; n < dim; ++n) a(n - 1, n) = std::sqrt(double(n));
  return a;
}

}  // namespace

double FockState::truncation_leak() const {
  const int dim = cutoff + 1;
  double leak = std::real(rho(dim - 1, dim - 1));
  if (dim >= 2) leak += std::real(rho(dim - 2, dim - 2));
  return leak;
}

FockState squeezed_vacuum_fock(double r, int cutoff) {
  const int dim = cutoff + 1;
  CVector psi = CVector::Zero(dim);
  double c = 1.0 / std::sqrt(std::cosh(r));
  for (int k = 0; 2 * k < dim; ++k) {
    psi(2 * k) = c;
    c *= -std::tanh(r) * std::sqrt(double(2 * k + 1) * double(2 * k + 2)) /
         (2.0 * double(k + 1));
  }
  FockState s;
  s.cutoff = cutoff;
  s.rho = psi * psi.adjoint();
  s.rho /= s.rho.trace().real();
  if (s.truncation_leak() > 1e-8)
    throw std::invalid_argument("squeezed_vacuum_fock: truncation leak too large");
  return s;
}

FockState coherent_fock(double alpha, int cutoff) {
  const int dim = cutoff + 1;
  CVector psi = CVector::Zero(dim);
  double c = std::exp(-alpha * alpha / 2.0);
  for (int n = 0; n < dim; ++n) {
    psi(n) = c;
    c *= alpha / std::sqrt(double(n + 1));
  }
  FockState s;
  s.cutoff = cutoff;
  s.rho = psi * psi.adjoint();
  s.rho /= s.rho.trace().real();
  if (s.truncation_leak() > 1e-8)
    throw std::invalid_argument("coherent_fock: truncation leak too large");
  return s;
}

FockState apply_loss_fock(const FockState& state, double eta) {
  if (!(eta > 0.0) || eta > 1.0)
    throw std::invalid_argument("apply_loss_fock: eta must be in (0, 1]");
  const int dim = state.cutoff + 1;
  FockState out;
  out.cutoff = state.cutoff;
  out.rho = CMatrix::Zero(dim, dim);
  // Kraus K_k with (K_k)_{n-k,n} = sqrt(binom(n,k) eta^{n-k} (1-eta)^k).
  for (int k = 0; k < dim; ++k) {
    CMatrix kr = CMatrix::Zero(dim, dim);
    for (int n = k; n < dim; ++n) {
      double logc = std::lgamma(n + 1.0) - std::lgamma(k + 1.0) -
                    std::lgamma(n - k + 1.0);
      double amp = std::exp(0.5 * (logc + (n - k) * std::log(eta) +
                                   (k > 0 ? k * std::log1p(-eta) : 0.0)));
      kr(n - k, n) = amp;
    }
    out.rho += kr * state.rho * kr.adjoint();
    if (eta == 1.0) break;
  }
  double tr = out.rho.trace().real();
  if (std::abs(tr - 1.0) > 1e-10)
    throw std::runtime_error("apply_loss_fock: trace not preserved");
  out.rho = ((out.rho + out.rho.adjoint()) / 2.0).eval();
  return out;
}

FockState phase_rotate_fock(const FockState& state, double phi) {
  const int dim = state.cutoff + 1;
  CVector d(dim);
  for (int n = 0; n < dim; ++n) d(n) = std::exp(Complex(0, -phi * n));
  FockState out;
  out.cutoff = state.cutoff;
  out.rho = d.asDiagonal() * state.rho * d.conjugate().asDiagonal();
  return out;
}

double mean_photon_fock(const FockState& state) {
  double acc = 0.0;
  for (int n = 0; n <= state.cutoff; ++n)
    acc += n * std::real(state.rho(n, n));
  return acc;
}

double quadrature_variance_fock(const FockState& state, double theta) {
  const int dim = state.cutoff + 1;
  CMatrix a = annihilation(dim);
  CMatrix x = (std::exp(Complex(0, -theta)) * a +
               std::exp(Complex(0, theta)) * a.adjoint()) /
              std::sqrt(2.0);
  double m1 = (state.rho * x).trace().real();
  double m2 = (state.rho * x * x).trace().real();
  return m2 - m1 * m1;
}

double number_cov_fock(const FockState& state) {
  double m1 = 0.0, m2 = 0.0;
  for (int n = 0; n <= state.cutoff; ++n) {
    double p = std::real(state.rho(n, n));
    m1 += n * p;
    m2 += double(n) * n * p;
  }
  return m2 - m1 * m1;
}

namespace {

double qfi_from_derivative(const CMatrix& rho, const CMatrix& drho) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(rho);
  RVector lam = es.eigenvalues();
  CMatrix d = es.eigenvectors().adjoint() * drho * es.eigenvectors();
  const int dim = static_cast<int>(lam.size());
  double qfi = 0.0;
  for (int m = 0; m < dim; ++m) {
    double lm = lam(m) < 1e-12 ? 0.0 : lam(m);
    for (int n = 0; n < dim; ++n) {
      double ln = lam(n) < 1e-12 ? 0.0 : lam(n);
      if (lm + ln <= 0.0) continue;
      qfi += 2.0 * std::norm(d(m, n)) / (lm + ln);
    }
  }
  return qfi;
}

}  // namespace

double qfi_fock(const std::function<CMatrix(double)>& rho_of_phi, double phi0) {
  const double h = 1e-5;
  CMatrix rho = rho_of_phi(phi0);
  auto fd = [&](double step) {
    return ((rho_of_phi(phi0 + step) - rho_of_phi(phi0 - step)) / (2.0 * step))
        .eval();
  };
  CMatrix d_h = fd(h);
  CMatrix d_h2 = fd(h / 2.0);
  CMatrix d_rich = (4.0 * d_h2 - d_h) / 3.0;
  double q = qfi_from_derivative(rho, d_rich);
  double q_h2 = qfi_from_derivative(rho, d_h2);
  if (std::abs(q - q_h2) > 1e-3 * std::max(std::abs(q), 1e-12))
    throw std::runtime_error("qfi_fock: finite-difference derivative ill-conditioned");
  return q;
}

CVector split_squeezed_two_mode(double r, double tau, int cutoff) {
  if (!(tau >= 0.0) || tau > 1.0)
    throw std::invalid_argument("split_squeezed_two_mode: tau must be in [0, 1]");
  const int dim = cutoff + 1;
  CVector psi = CVector::Zero(dim * dim);
  double a_k = 1.0 / std::sqrt(std::cosh(r));
  for (int k = 0; 2 * k <= 2 * cutoff; ++k) {
    int total = 2 * k;
    for (int m = std::max(0, total - cutoff); m <= std::min(total, cutoff); ++m) {
      if ((tau == 0.0 && m != 0) || (tau == 1.0 && m != total)) continue;
      double logc = 0.5 * (std::lgamma(total + 1.0) - std::lgamma(m + 1.0) -
                           std::lgamma(total - m + 1.0));
      double logt = (m > 0 ? 0.5 * m * std::log(tau) : 0.0) +
                    (total - m > 0 ? 0.5 * (total - m) * std::log1p(-tau) : 0.0);
      psi(m * dim + (total - m)) += a_k * std::exp(logc + logt);
    }
    a_k *= -std::tanh(r) * std::sqrt(double(2 * k + 1) * double(2 * k + 2)) /
           (2.0 * double(k + 1));
  }
  double norm = psi.norm();
  if (std::abs(norm - 1.0) > 1e-8)
    throw std::invalid_argument("split_squeezed_two_mode: truncation leak too large");
  return psi / norm;
}

double number_cov_fock2(const CVector& psi, int cutoff, int i, int j) {
  if (i < 0 || i > 1 || j < 0 || j > 1)
    throw std::out_of_range("number_cov_fock2: index must be 0 or 1");
  const int dim = cutoff + 1;
  double mi = 0.0, mj = 0.0, mij = 0.0;
  for (int n1 = 0; n1 < dim; ++n1) {
    for (int n2 = 0; n2 < dim; ++n2) {
      double p = std::norm(psi(n1 * dim + n2));
      double ni = (i == 0) ? n1 : n2;
      double nj = (j == 0) ? n1 : n2;
      mi += ni * p;
      mj += nj * p;
      mij += ni * nj * p;
    }
  }
  return mij - mi * mj;
}

}  // namespace tmsense::fock
