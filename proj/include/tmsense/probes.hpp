#pragma once

#include "tmsense/gaussian.hpp"

namespace tmsense {

enum class Scheme { TS, TM, SQL };

const char* scheme_name(Scheme s);
Scheme scheme_from_name(const std::string& name);

/// Resource budget for one experiment. A probe bundle describes a single
/// run; the number of independent runs R_r is handled by the measurement
/// loop and by the bound formulas (R = R_r * R_t).
struct ProbeSpec {
  Scheme scheme = Scheme::TM;
  int spatial_modes = 2;         // M
  int temporal_modes = 1;        // R_t
  long runs = 1;                 // R_r
  double nbar = 2.0;             // mean photons per spatiotemporal mode
  RVector weights;               // length M, all > 0
  double eta = 1.0;

  long total_repetitions() const { return runs * temporal_modes; }
  void validate() const;
};

/// Deterministic completion of a unitary whose first column is prescribed:
/// Householder reflection mapping e_1 onto the column.
CMatrix unitary_with_first_column(const CVector& col);

/// Unitary with |first column|_j^2 = w_j / sum(w), entries real nonnegative.
CMatrix spatial_interferometer(const RVector& weights);

/// Unitary with |first column|_t^2 = 1 / R_t.
CMatrix temporal_interferometer(int r_t);

/// TS: asinh sqrt(M nbar); TM: asinh sqrt(R_t M nbar); SQL: 0.
double squeeze_for_budget(Scheme scheme, int m, int r_t, double nbar);

struct ProbeBundle {
  GaussianState state;  // one run, R_t * M modes, loss not yet applied
  BogoliubovMap map;
  CMatrix u_spatial;
  CMatrix u_temporal;
  double squeeze = 0.0;
};

/// Builds the single-run probe state and the Bogoliubov map generating it.
/// TM: W = kron(U_T, U_S), squeezing in flat mode 0.
/// TS: requires R_t = 1; W = U_S, squeezing in mode 0.
/// SQL: W = I, alpha_l = sqrt(nbar).
ProbeBundle build_probe(const ProbeSpec& spec);

}  // namespace tmsense
