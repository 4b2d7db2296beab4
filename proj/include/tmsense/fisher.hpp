#pragma once

#include "tmsense/probes.hpp"

#include <string>

namespace tmsense {

/// Quantum Fisher information matrix over the M spatial phases.
struct Qfim {
  RMatrix h;                   // M x M, symmetric PSD
  double support_tol = 1e-12;  // relative eigenvalue cutoff for pseudo-inverse
};

/// Multiplicative perturbations of the closed-form constants, used by the
/// verification suite's mutation checks. All 1.0 in normal operation.
struct ClosedFormScale {
  double qfim_lossless = 1.0;
  double bound_ts = 1.0;
  double bound_tm = 1.0;
  double qfim_lossy = 1.0;
  double bound_ts_lossy = 1.0;
  double bound_tm_lossy = 1.0;

  static ClosedFormScale perturbed(const std::string& formula_id, double factor);
};

/// Photon-number covariance Cov(n_i, n_j) of the state map applied to vacuum.
double number_cov(const BogoliubovMap& map, int i, int j);

/// H_ij = 4 sum_{t,t'} Cov(n_{i+tM}, n_{j+t'M}).
Qfim qfim_generic(const BogoliubovMap& map, int m, int r_t);

/// H_ij = c [ 4 Nbar (2 Nbar + 1) u_i u_j + 4 Nbar delta_ij u_i ],
/// u_j = |(U_S)_{j1}|^2.
Qfim qfim_closed_lossless(double n_total, const CMatrix& u_spatial,
                          double scale = 1.0);

/// Lossy closed form with coefficients
/// 4 eta Nbar (2 eta^2 Nbar + 2 eta - 1) / (1 + 2 eta (1-eta) Nbar) and
/// 4 eta Nbar.
Qfim qfim_closed_lossy(double n_total, double eta, const CMatrix& u_spatial,
                       double scale = 1.0);

/// w^T H^+ w via eigendecomposition. Throws if w has weight outside the
/// support of H.
double qcrb(const RVector& weights, const Qfim& h);

struct BoundReport {
  double qcrb = 0.0;  // rad^2
  Scheme scheme = Scheme::TM;
  long repetitions = 1;  // R = R_r * R_t
  int spatial_modes = 1;
  double nbar = 0.0;
  double eta = 1.0;
  std::string formula_id;
};

BoundReport bound_ts(long r, int m, double nbar, double scale = 1.0);
BoundReport bound_tm(long r, int m, double nbar, double scale = 1.0);
BoundReport bound_sql(double eta, long r, int m, double nbar);
BoundReport bound_ts_lossy(double eta, long r, int m, double nbar,
                           double scale = 1.0);
BoundReport bound_tm_lossy(double eta, long r, int m, double nbar,
                           double scale = 1.0);

/// True iff the lossy TM bound beats the SQL bound.
bool sql_crossover(double eta, long r, int m, double nbar);

}  // namespace tmsense
