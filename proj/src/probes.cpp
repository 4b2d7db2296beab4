#include "tmsense/probes.hpp"

#include <cmath>
#include <string>

namespace tmsense {

const char* scheme_name(Scheme s) {
  switch (s) {
    case Scheme::TS: return "TS";
    case Scheme::TM: return "TM";
    case Scheme::SQL: return "SQL";
  }
  return "?";
}

Scheme scheme_from_name(const std::string& name) {
  if (name == "TS" || name == "ts") return Scheme::TS;
  if (name == "TM" || name == "tm") return Scheme::TM;
  if (name == "SQL" || name == "sql") return Scheme::SQL;
  throw std::invalid_argument("unknown scheme: " + name);
}

void ProbeSpec::validate() const {
  if (spatial_modes < 1) throw std::invalid_argument("ProbeSpec: M must be >= 1");
  if (temporal_modes < 1) throw std::invalid_argument("ProbeSpec: R_t must be >= 1");
  if (runs < 1) throw std::invalid_argument("ProbeSpec: R_r must be >= 1");
  if (!(nbar > 0.0)) throw std::invalid_argument("ProbeSpec: nbar must be > 0");
  if (!(eta > 0.0) || eta > 1.0)
    throw std::invalid_argument("ProbeSpec: eta must be in (0, 1]");
  if (scheme == Scheme::TS && temporal_modes != 1)
    throw std::invalid_argument("ProbeSpec: TS scheme requires R_t = 1");
  if (weights.size() != spatial_modes)
    throw std::invalid_argument("ProbeSpec: weights length != M");
  if ((weights.array() <= 0.0).any())
    throw std::invalid_argument("ProbeSpec: weights must all be > 0");
}

CMatrix unitary_with_first_column(const CVector& col) {
  const int n = static_cast<int>(col.size());
  if (n < 1) throw std::invalid_argument("unitary_with_first_column: empty column");
  if (std::abs(col.norm() - 1.0) > 1e-10)
    throw std::invalid_argument("unitary_with_first_column: column not normalized");
  // Reduce to a column with real first entry, reflect, restore the phase.
  Complex phase = 1.0;
  if (std::abs(col(0)) > 1e-14) phase = col(0) / std::abs(col(0));
  CVector v = std::conj(phase) * col;
  v(0) -= 1.0;
  double vn2 = v.squaredNorm();
  CMatrix w = CMatrix::Identity(n, n);
  if (vn2 > 1e-24) w -= (2.0 / vn2) * (v * v.adjoint());
  // Reflections have det -1; flip the last column so the first stays exact.
  if (n > 1) w.col(n - 1) *= -1.0;
  return phase * w;
}

CMatrix spatial_interferometer(const RVector& weights) {
  const int m = static_cast<int>(weights.size());
  if (m < 1) throw std::invalid_argument("spatial_interferometer: empty weights");
  if ((weights.array() <= 0.0).any())
    throw std::invalid_argument("spatial_interferometer: weights must be > 0");
  double total = weights.sum();
  CVector col(m);
  for (int j = 0; j < m; ++j) col(j) = std::sqrt(weights(j) / total);
  return unitary_with_first_column(col);
}

CMatrix temporal_interferometer(int r_t) {
  if (r_t < 1) throw std::invalid_argument("temporal_interferometer: R_t must be >= 1");
  CVector col = CVector::Constant(r_t, 1.0 / std::sqrt(double(r_t)));
  return unitary_with_first_column(col);
}

double squeeze_for_budget(Scheme scheme, int m, int r_t, double nbar) {
  if (!(nbar > 0.0)) throw std::invalid_argument("squeeze_for_budget: nbar must be > 0");
  switch (scheme) {
    case Scheme::TS: return std::asinh(std::sqrt(m * nbar));
    case Scheme::TM: return std::asinh(std::sqrt(double(r_t) * m * nbar));
    case Scheme::SQL: return 0.0;
  }
  throw std::invalid_argument("squeeze_for_budget: bad scheme");
}

namespace {

CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

}  // namespace

ProbeBundle build_probe(const ProbeSpec& spec) {
  spec.validate();
  const int m = spec.spatial_modes;
  const int rt = spec.temporal_modes;
  const int n = m * rt;

  ProbeBundle bundle;
  bundle.u_spatial = spatial_interferometer(spec.weights);
  bundle.u_temporal = temporal_interferometer(rt);
  bundle.squeeze = squeeze_for_budget(spec.scheme, m, rt, spec.nbar);

  CMatrix w;
  RVector r = RVector::Zero(n);
  CVector alpha = CVector::Zero(n);
  switch (spec.scheme) {
    case Scheme::TM:
      w = kron(bundle.u_temporal, bundle.u_spatial);
      r(0) = bundle.squeeze;
      break;
    case Scheme::TS:
      w = kron(CMatrix::Identity(rt, rt), bundle.u_spatial);
      for (int t = 0; t < rt; ++t) r(t * m) = bundle.squeeze;
      break;
    case Scheme::SQL:
      w = CMatrix::Identity(n, n);
      alpha.setConstant(std::sqrt(spec.nbar));
      break;
  }

  bundle.map = bogoliubov_from_factors(w, r, alpha);
  bundle.state = apply_bogoliubov(GaussianState::vacuum(n), bundle.map);

  for (int l = 0; l < n; ++l) {
    if (std::abs(mean_photon(bundle.state, l) - spec.nbar) > 1e-9)
      throw std::runtime_error("build_probe: per-mode photon budget violated");
  }
  if (!bundle.state.is_pure())
    throw std::runtime_error("build_probe: probe state not pure");
  return bundle;
}

}  // namespace tmsense
