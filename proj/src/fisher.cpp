#include "tmsense/fisher.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

namespace tmsense {

ClosedFormScale ClosedFormScale::perturbed(const std::string& formula_id,
                                           double factor) {
  ClosedFormScale s;
  if (formula_id == "qfim-lossless") s.qfim_lossless = factor;
  else if (formula_id == "bound-ts") s.bound_ts = factor;
  else if (formula_id == "bound-tm") s.bound_tm = factor;
  else if (formula_id == "qfim-lossy") s.qfim_lossy = factor;
  else if (formula_id == "bound-ts-lossy") s.bound_ts_lossy = factor;
  else if (formula_id == "bound-tm-lossy") s.bound_tm_lossy = factor;
  else throw std::invalid_argument("unknown formula id: " + formula_id);
  return s;
}

double number_cov(const BogoliubovMap& map, int i, int j) {
  const int n = map.n_modes();
  if (i < 0 || i >= n || j < 0 || j >= n)
    throw std::out_of_range("number_cov: index out of range");
  Complex uvt = (map.u.row(i) * map.v.row(j).transpose())(0, 0);
  Complex vvd = (map.v.row(i) * map.v.row(j).conjugate().transpose())(0, 0);
  Complex uud = (map.u.row(i) * map.u.row(j).conjugate().transpose())(0, 0);
  Complex vdv = (map.v.col(i).adjoint() * map.v.col(j))(0, 0);
  Complex ai = map.alpha(i), aj = map.alpha(j);

  Complex val = std::norm(uvt) + std::norm(vvd);
  if (i == j) val += vvd;
  val += ai * std::conj(aj) * vdv + std::conj(ai) * aj * uud;
  val += std::conj(ai) * std::conj(aj) * uvt + ai * aj * std::conj(uvt);
  return std::real(val);
}

Qfim qfim_generic(const BogoliubovMap& map, int m, int r_t) {
  if (map.n_modes() != m * r_t)
    throw std::invalid_argument("qfim_generic: map does not span R_t * M modes");
  // Precompute the matrix products once; entries are then O(1) lookups.
  CMatrix uvt = map.u * map.v.transpose();
  CMatrix vvd = map.v * map.v.adjoint();
  CMatrix uud = map.u * map.u.adjoint();
  CMatrix vdv = map.v.adjoint() * map.v;
  auto cov = [&](int i, int j) {
    Complex ai = map.alpha(i), aj = map.alpha(j);
    Complex val = std::norm(uvt(i, j)) + std::norm(vvd(i, j));
    if (i == j) val += vvd(j, i);
    val += ai * std::conj(aj) * vdv(i, j) + std::conj(ai) * aj * uud(i, j);
    val += std::conj(ai) * std::conj(aj) * uvt(i, j) +
           ai * aj * std::conj(uvt(i, j));
    return std::real(val);
  };

  Qfim out;
  out.h = RMatrix::Zero(m, m);
  for (int i = 0; i < m; ++i) {
    for (int j = i; j < m; ++j) {
      double acc = 0.0;
      for (int t = 0; t < r_t; ++t)
        for (int tp = 0; tp < r_t; ++tp)
          acc += cov(i + t * m, j + tp * m);
      out.h(i, j) = 4.0 * acc;
      out.h(j, i) = out.h(i, j);
    }
  }
  return out;
}

namespace {

RVector first_column_weights(const CMatrix& u_spatial) {
  return u_spatial.col(0).cwiseAbs2();
}

Qfim rank_one_plus_diag(double coeff_outer, double coeff_diag,
                        const RVector& u) {
  Qfim out;
  out.h = coeff_outer * (u * u.transpose());
  out.h += (coeff_diag * u).asDiagonal();
  return out;
}

}  // namespace

Qfim qfim_closed_lossless(double n_total, const CMatrix& u_spatial,
                          double scale) {
  if (n_total < 0.0)
    throw std::invalid_argument("qfim_closed_lossless: Nbar must be >= 0");
  RVector u = first_column_weights(u_spatial);
  return rank_one_plus_diag(scale * 4.0 * n_total * (2.0 * n_total + 1.0),
                            4.0 * n_total, u);
}

Qfim qfim_closed_lossy(double n_total, double eta, const CMatrix& u_spatial,
                       double scale) {
  if (n_total < 0.0)
    throw std::invalid_argument("qfim_closed_lossy: Nbar must be >= 0");
  if (!(eta > 0.0) || eta > 1.0)
    throw std::invalid_argument("qfim_closed_lossy: eta must be in (0, 1]");
  RVector u = first_column_weights(u_spatial);
  double outer = scale * 4.0 * eta * n_total *
                 (2.0 * eta * eta * n_total + 2.0 * eta - 1.0) /
                 (1.0 + 2.0 * eta * (1.0 - eta) * n_total);
  return rank_one_plus_diag(outer, 4.0 * eta * n_total, u);
}

double qcrb(const RVector& weights, const Qfim& qfim) {
  const int m = static_cast<int>(qfim.h.rows());
  if (weights.size() != m)
    throw std::invalid_argument("qcrb: weight vector length != M");
  if ((qfim.h - qfim.h.transpose()).cwiseAbs().maxCoeff() > 1e-10)
    throw std::invalid_argument("qcrb: QFIM not symmetric");

  Eigen::SelfAdjointEigenSolver<RMatrix> es(qfim.h);
  RVector ev = es.eigenvalues();
  double cutoff = qfim.support_tol * std::max(ev.maxCoeff(), 0.0);

  RVector proj = es.eigenvectors().transpose() * weights;
  double outside2 = 0.0, value = 0.0;
  for (int k = 0; k < m; ++k) {
    if (ev(k) > cutoff) {
      value += proj(k) * proj(k) / ev(k);
    } else {
      outside2 += proj(k) * proj(k);
    }
  }
  if (std::sqrt(outside2) > 1e-8 * weights.norm())
    throw std::domain_error("qcrb: weight outside QFIM support");
  return value;
}

BoundReport bound_ts(long r, int m, double nbar, double scale) {
  double mn = m * nbar;
  BoundReport b;
  b.qcrb = 1.0 / (scale * 8.0 * (double(r) * mn * mn + double(r) * mn));
  b.scheme = Scheme::TS;
  b.repetitions = r;
  b.spatial_modes = m;
  b.nbar = nbar;
  b.formula_id = "bound-ts";
  return b;
}

BoundReport bound_tm(long r, int m, double nbar, double scale) {
  double rmn = double(r) * m * nbar;
  BoundReport b;
  b.qcrb = 1.0 / (scale * 8.0 * (rmn * rmn + rmn));
  b.scheme = Scheme::TM;
  b.repetitions = r;
  b.spatial_modes = m;
  b.nbar = nbar;
  b.formula_id = "bound-tm";
  return b;
}

BoundReport bound_sql(double eta, long r, int m, double nbar) {
  if (!(eta > 0.0) || eta > 1.0)
    throw std::invalid_argument("bound_sql: eta must be in (0, 1]");
  BoundReport b;
  b.qcrb = 1.0 / (4.0 * eta * double(r) * m * nbar);
  b.scheme = Scheme::SQL;
  b.repetitions = r;
  b.spatial_modes = m;
  b.nbar = nbar;
  b.eta = eta;
  b.formula_id = "bound-sql";
  return b;
}

BoundReport bound_ts_lossy(double eta, long r, int m, double nbar,
                           double scale) {
  if (!(eta > 0.0) || eta > 1.0)
    throw std::invalid_argument("bound_ts_lossy: eta must be in (0, 1]");
  double mn = m * nbar;
  BoundReport b;
  b.qcrb = (1.0 + scale * 2.0 * eta * (1.0 - eta) * mn) /
           (8.0 * eta * eta * double(r) * mn * (mn + 1.0));
  b.scheme = Scheme::TS;
  b.repetitions = r;
  b.spatial_modes = m;
  b.nbar = nbar;
  b.eta = eta;
  b.formula_id = "bound-ts-lossy";
  return b;
}

BoundReport bound_tm_lossy(double eta, long r, int m, double nbar,
                           double scale) {
  if (!(eta > 0.0) || eta > 1.0)
    throw std::invalid_argument("bound_tm_lossy: eta must be in (0, 1]");
  double rmn = double(r) * m * nbar;
  BoundReport b;
  b.qcrb = (1.0 + scale * 2.0 * eta * (1.0 - eta) * rmn) /
           (8.0 * eta * eta * rmn * (rmn + 1.0));
  b.scheme = Scheme::TM;
  b.repetitions = r;
  b.spatial_modes = m;
  b.nbar = nbar;
  b.eta = eta;
  b.formula_id = "bound-tm-lossy";
  return b;
}

bool sql_crossover(double eta, long r, int m, double nbar) {
  return bound_tm_lossy(eta, r, m, nbar).qcrb < bound_sql(eta, r, m, nbar).qcrb;
}

}  // namespace tmsense
