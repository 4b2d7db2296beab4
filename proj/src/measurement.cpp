#include "tmsense/measurement.hpp"

#include <Eigen/Eigenvalues>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <thread>
#include <vector>

namespace tmsense {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t trial_seed(std::uint64_t seed, long trial) {
  return splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(trial) + 1));
}

}  // namespace

HomodyneConfig HomodyneConfig::uniform(int n_modes, double offset,
                                       std::uint64_t seed) {
  HomodyneConfig c;
  c.lo_phases = RVector::Constant(n_modes, offset);
  c.seed = seed;
  return c;
}

double phi_opt(int r_t, int m, double nbar) {
  double rmn = double(r_t) * m * nbar;
  if (!(rmn > 0.0)) throw std::invalid_argument("phi_opt: R_t M nbar must be > 0");
  return std::asin(1.0 / (2.0 * rmn + 1.0)) / 2.0;
}

double NormalSampler::operator()() {
  if (has_cached_) {
    has_cached_ = false;
    return cached_;
  }
  // Box-Muller on 53-bit uniforms; u1 kept away from zero.
  double u1 = (double((rng_() >> 11)) + 1.0) * 0x1p-53;
  double u2 = double(rng_() >> 11) * 0x1p-53;
  double rad = std::sqrt(-2.0 * std::log(u1));
  cached_ = rad * std::sin(2.0 * kPi * u2);
  has_cached_ = true;
  return rad * std::cos(2.0 * kPi * u2);
}

QuadratureMarginal outcome_model(const ProbeSpec& spec, const RVector& phases,
                                 const HomodyneConfig& config) {
  spec.validate();
  ModeLayout layout{spec.temporal_modes, spec.spatial_modes};
  ProbeBundle bundle = build_probe(spec);
  GaussianState s = phase_encode(bundle.state, phases, layout);
  if (spec.eta < 1.0) s = loss_channel(s, spec.eta);
  return quadrature_marginal(s, config.lo_phases);
}

HomodyneModel::HomodyneModel(const ProbeSpec& spec, const RVector& lo_phases)
    : spec_(spec), layout_{spec.temporal_modes, spec.spatial_modes} {
  spec_.validate();
  n_ = layout_.n_modes();
  if (lo_phases.size() != n_)
    throw std::invalid_argument("HomodyneModel: one LO phase per mode");
  theta_ = lo_phases;
  squeeze_ = squeeze_for_budget(spec.scheme, spec.spatial_modes,
                                spec.temporal_modes, spec.nbar);
  if (spec.scheme != Scheme::SQL) {
    // |W_{l,0}| for W = kron(U_T, U_S) with real nonnegative first columns.
    double wsum = spec.weights.sum();
    c_ = RVector(n_);
    for (int l = 0; l < n_; ++l) {
      double wj = spec.weights(layout_.spatial_of(l)) / wsum;
      c_(l) = std::sqrt(wj / double(spec.temporal_modes));
    }
  }
}

RMatrix HomodyneModel::Law::dense_cov() const {
  const int n = static_cast<int>((u.size() > 0 ? u.size() : mean.size()));
  RMatrix cov = sigma0 * RMatrix::Identity(n, n);
  if (u.size() > 0) cov += m1 * (u * u.transpose()) + m2 * (v * v.transpose());
  return cov;
}

HomodyneModel::Law HomodyneModel::law(const RVector& phases) const {
  if (phases.size() != spec_.spatial_modes)
    throw std::invalid_argument("HomodyneModel: phase vector length != M");
  Law law;
  law.mean = RVector::Zero(n_);
  if (spec_.scheme == Scheme::SQL) {
    double amp = std::sqrt(2.0 * spec_.eta * spec_.nbar);
    for (int l = 0; l < n_; ++l) {
      double psi = phases(layout_.spatial_of(l)) + theta_(l);
      law.mean(l) = amp * std::cos(psi);
    }
    return law;
  }
  law.u = RVector(n_);
  law.v = RVector(n_);
  for (int l = 0; l < n_; ++l) {
    double psi = phases(layout_.spatial_of(l)) + theta_(l);
    law.u(l) = c_(l) * std::cos(psi);
    law.v(l) = c_(l) * std::sin(psi);
  }
  law.m1 = spec_.eta * (std::exp(-2.0 * squeeze_) - 1.0) / 2.0;
  law.m2 = spec_.eta * (std::exp(2.0 * squeeze_) - 1.0) / 2.0;
  return law;
}

HomodyneModel::Law HomodyneModel::law_equal(double phi_avg) const {
  return law(RVector::Constant(spec_.spatial_modes, phi_avg));
}

double HomodyneModel::log_likelihood(double phi_avg,
                                     const RMatrix& outcomes) const {
  if (outcomes.rows() < 1)
    throw std::invalid_argument("log_likelihood: empty batch");
  if (outcomes.cols() != n_)
    throw std::invalid_argument("log_likelihood: outcome width != n_modes");
  Law law = law_equal(phi_avg);
  const double s0 = law.sigma0;
  const long rows = outcomes.rows();
  double ll = -0.5 * double(rows) * n_ * std::log(2.0 * kPi);

  if (law.u.size() == 0) {
    double quad = 0.0;
    for (long r = 0; r < rows; ++r)
      quad += (outcomes.row(r).transpose() - law.mean).squaredNorm();
    return ll - 0.5 * double(rows) * n_ * std::log(s0) - quad / (2.0 * s0);
  }

  Eigen::Matrix2d hth;
  hth << law.u.squaredNorm(), law.u.dot(law.v), law.u.dot(law.v),
      law.v.squaredNorm();
  Eigen::Matrix2d dinv = Eigen::Vector2d(s0 / law.m1, s0 / law.m2).asDiagonal();
  double detf = (Eigen::Matrix2d::Identity() +
                 Eigen::Vector2d(law.m1 / s0, law.m2 / s0).asDiagonal() * hth)
                    .determinant();
  if (!(detf > 0.0))
    throw std::runtime_error(
        "log_likelihood: singular model covariance in the squeezed plane");
  Eigen::Matrix2d k = (dinv + hth).inverse();

  double quad = 0.0;
  for (long r = 0; r < rows; ++r) {
    auto y = outcomes.row(r);
    Eigen::Vector2d z(y.dot(law.u), y.dot(law.v));
    quad += y.squaredNorm() - z.dot(k * z);
  }
  ll -= 0.5 * double(rows) * (n_ * std::log(s0) + std::log(detf));
  ll -= quad / (2.0 * s0);
  return ll;
}

RVector HomodyneModel::sample_run(const Law& law, NormalSampler& normal) const {
  RVector z(n_);
  for (int i = 0; i < n_; ++i) z(i) = normal();
  const double sq0 = std::sqrt(law.sigma0);
  if (law.u.size() == 0) return law.mean + sq0 * z;

  // Orthonormal basis of span{u, v}; covariance square root acts as
  // sqrt(sigma0) outside that plane.
  std::vector<RVector> q;
  RVector q1 = law.u;
  if (q1.norm() > 1e-13) q.push_back(q1 / q1.norm());
  RVector q2 = law.v;
  for (const auto& qq : q) q2 -= qq.dot(law.v) * qq;
  if (q2.norm() > 1e-13) q.push_back(q2 / q2.norm());
  const int k = static_cast<int>(q.size());
  if (k == 0) return law.mean + sq0 * z;

  RMatrix qm(n_, k);
  for (int i = 0; i < k; ++i) qm.col(i) = q[i];
  RVector au = qm.transpose() * law.u;
  RVector av = qm.transpose() * law.v;
  RMatrix small = law.sigma0 * RMatrix::Identity(k, k) +
                  law.m1 * (au * au.transpose()) +
                  law.m2 * (av * av.transpose());
  Eigen::SelfAdjointEigenSolver<RMatrix> es(small);
  RMatrix b = es.eigenvectors() *
              es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() *
              es.eigenvectors().transpose();
  RVector zq = qm.transpose() * z;
  return law.mean + sq0 * z + qm * ((b - sq0 * RMatrix::Identity(k, k)) * zq);
}

namespace {

// 1/2 Tr[(Sigma^-1 Sigma')^2] for Sigma = s0 I + H diag(m) H^T and
// Sigma' = G N G^T in low-rank form.
double covariance_fisher_term(const HomodyneModel::Law& law, const RMatrix& g,
                              const RMatrix& nmat) {
  const double s0 = law.sigma0;
  RMatrix h(law.u.size(), 2);
  h.col(0) = law.u;
  h.col(1) = law.v;
  Eigen::Matrix2d dinv = Eigen::Vector2d(s0 / law.m1, s0 / law.m2).asDiagonal();
  Eigen::Matrix2d k = (dinv + h.transpose() * h).inverse();
  // Sigma^-1 G = (G - H K (H^T G)) / s0
  RMatrix sig = (g - h * (k * (h.transpose() * g))) / s0;
  RMatrix b = g.transpose() * sig;  // 4x4
  RMatrix prod = b * nmat;
  return 0.5 * (prod * prod).trace();
}

}  // namespace

double HomodyneModel::classical_fisher(const RVector& phases) const {
  // Along a common shift of all phases, psi_l = phi_{j(l)} + theta_l moves
  // at unit rate, so the law derivative is exact: u' = -v, v' = u.
  if (spec_.scheme == Scheme::SQL) {
    // mean_l = amp cos(psi_l), Sigma = I/2.
    double amp2 = 2.0 * spec_.eta * spec_.nbar;
    double f = 0.0;
    for (int l = 0; l < n_; ++l) {
      double psi = phases(layout_.spatial_of(l)) + theta_(l);
      f += amp2 * std::sin(psi) * std::sin(psi) / 0.5;
    }
    return f;
  }

  // Sigma' = m1 (u'u^T + uu'^T) + m2 (v'v^T + vv'^T)
  //        = (m2 - m1) (u v^T + v u^T).
  Law law = this->law(phases);
  RMatrix g(n_, 2);
  g.col(0) = law.u;
  g.col(1) = law.v;
  RMatrix nmat(2, 2);
  nmat << 0.0, law.m2 - law.m1, law.m2 - law.m1, 0.0;
  return std::max(covariance_fisher_term(law, g, nmat), 0.0);
}

RMatrix sample_dense(const QuadratureMarginal& model, long rows,
                     std::uint64_t seed) {
  const int n = static_cast<int>(model.mean.size());
  Eigen::SelfAdjointEigenSolver<RMatrix> es(model.cov);
  if (es.eigenvalues().minCoeff() < -1e-10)
    throw std::runtime_error("sample_dense: covariance not PSD");
  RMatrix root = es.eigenvectors() *
                 es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() *
                 es.eigenvectors().transpose();
  NormalSampler normal(seed);
  RMatrix out(rows, n);
  RVector z(n);
  for (long r = 0; r < rows; ++r) {
    for (int i = 0; i < n; ++i) z(i) = normal();
    out.row(r) = (model.mean + root * z).transpose();
  }
  return out;
}

SampleBatch sample(const ProbeSpec& spec, const RVector& true_phases,
                   const HomodyneConfig& config) {
  HomodyneModel model(spec, config.lo_phases);
  auto law = model.law(true_phases);
  NormalSampler normal(config.seed);
  SampleBatch batch;
  batch.spec = spec;
  batch.true_phases = true_phases;
  batch.outcomes = RMatrix(spec.runs, model.n_modes());
  for (long r = 0; r < spec.runs; ++r)
    batch.outcomes.row(r) = model.sample_run(law, normal).transpose();
  return batch;
}

double log_likelihood(double phi_avg, const SampleBatch& batch,
                      const HomodyneConfig& config) {
  HomodyneModel model(batch.spec, config.lo_phases);
  return model.log_likelihood(phi_avg, batch.outcomes);
}

MleResult mle(const SampleBatch& batch, const HomodyneConfig& config,
              double lo, double hi, double tol) {
  if (!(tol > 0.0)) throw std::invalid_argument("mle: tol must be > 0");
  if (!(hi > lo)) throw std::invalid_argument("mle: empty search interval");
  HomodyneModel model(batch.spec, config.lo_phases);
  auto f = [&](double phi) { return model.log_likelihood(phi, batch.outcomes); };

  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = lo, b = hi;
  double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
  double f1 = f(x1), f2 = f(x2);
  while (b - a > std::max(tol * 0.25, 1e-14)) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + gr * (b - a);
      f2 = f(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - gr * (b - a);
      f1 = f(x1);
    }
  }
  double est = 0.5 * (a + b);

  // Polish with bisection on the numerical score.
  double eps = std::max(1e-9, tol * 1e-3);
  auto score = [&](double phi) { return f(phi + eps) - f(phi - eps); };
  double sl = score(a), sr = score(b);
  if (sl > 0.0 && sr < 0.0) {
    double la = a, lb = b;
    for (int it = 0; it < 30 && lb - la > 1e-14; ++it) {
      double mid = 0.5 * (la + lb);
      if (score(mid) > 0.0)
        la = mid;
      else
        lb = mid;
    }
    est = 0.5 * (la + lb);
  }

  MleResult res;
  res.estimate = est;
  res.on_boundary = (est - lo < 2.0 * tol) || (hi - est < 2.0 * tol);
  return res;
}

double classical_fisher(const ProbeSpec& spec, const RVector& phases,
                        const HomodyneConfig& config) {
  HomodyneModel model(spec, config.lo_phases);
  return model.classical_fisher(phases);
}

double choose_lo_offset(const ProbeSpec& spec, const RVector& phases) {
  const int n = spec.spatial_modes * spec.temporal_modes;
  auto cfi = [&](double theta) {
    HomodyneModel model(spec, RVector::Constant(n, theta));
    return model.classical_fisher(phases);
  };
  const int grid = 96;
  double best_theta = 0.0, best = -1.0;
  for (int i = 0; i < grid; ++i) {
    double th = kPi * double(i) / grid;
    double v = cfi(th);
    if (v > best) {
      best = v;
      best_theta = th;
    }
  }
  // Golden-section refinement around the best grid point.
  double a = best_theta - kPi / grid, b = best_theta + kPi / grid;
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
  double f1 = cfi(x1), f2 = cfi(x2);
  while (b - a > 1e-8) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + gr * (b - a);
      f2 = cfi(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - gr * (b - a);
      f1 = cfi(x1);
    }
  }
  return 0.5 * (a + b);
}

int worker_count() {
  if (const char* env = std::getenv("TMSENSE_THREADS")) {
    long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<int>(v);
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

EstimationResult run_experiment(const ProbeSpec& spec,
                                const RVector& true_phases, long n_trials,
                                const LoPolicy& policy, std::uint64_t seed) {
  spec.validate();
  if (n_trials < 100)
    throw std::invalid_argument("run_experiment: n_trials must be >= 100");
  if (true_phases.size() != spec.spatial_modes)
    throw std::invalid_argument("run_experiment: true_phases length != M");

  const int m = spec.spatial_modes;
  const int rt = spec.temporal_modes;
  const int n = m * rt;
  const double phi_avg_true = true_phases.mean();

  double lo_offset =
      policy.optimize
          ? choose_lo_offset(spec, RVector::Constant(m, phi_avg_true))
          : policy.offset;

  HomodyneModel model(spec, RVector::Constant(n, lo_offset));
  double cfi = model.classical_fisher(true_phases);
  if (!(cfi > 0.0))
    throw std::runtime_error("run_experiment: vanishing Fisher information");
  double crb = 1.0 / (double(spec.runs) * cfi);

  double qfi_run;
  if (spec.scheme == Scheme::SQL) {
    qfi_run = 4.0 * spec.eta * double(rt) * m * spec.nbar;
  } else {
    double n_total = double(rt) * m * spec.nbar;
    RVector w = spec.weights / spec.weights.sum();
    qfi_run = 1.0 / qcrb(w, qfim_closed_lossy(n_total, spec.eta,
                                              spatial_interferometer(spec.weights)));
  }

  double center = phi_opt(rt, m, spec.nbar);
  double half = 10.0 * std::sqrt(1.0 / (double(spec.runs) * qfi_run));
  double lo = std::min(center - half, phi_avg_true - 0.3 * half);
  double hi = std::max(center + half, phi_avg_true + 0.3 * half);
  double tol = std::max(1e-12, 1e-3 * std::sqrt(crb));

  auto law_true = model.law(true_phases);
  EstimationResult result;
  result.estimates = RVector(n_trials);
  std::atomic<long> boundary{0};
  std::atomic<long> next{0};
  int workers = std::min<long>(worker_count(), n_trials);

  auto work = [&]() {
    for (;;) {
      long i = next.fetch_add(1);
      if (i >= n_trials) break;
      NormalSampler normal(trial_seed(seed, i));
      RMatrix outcomes(spec.runs, n);
      for (long r = 0; r < spec.runs; ++r)
        outcomes.row(r) = model.sample_run(law_true, normal).transpose();

      SampleBatch batch;
      batch.spec = spec;
      batch.true_phases = true_phases;
      batch.outcomes = std::move(outcomes);
      HomodyneConfig cfg = HomodyneConfig::uniform(n, lo_offset, seed);
      MleResult r = mle(batch, cfg, lo, hi, tol);
      result.estimates(i) = r.estimate;
      if (r.on_boundary) boundary.fetch_add(1);
    }
  };
  std::vector<std::thread> pool;
  for (int t = 1; t < workers; ++t) pool.emplace_back(work);
  work();
  for (auto& th : pool) th.join();

  double mean = result.estimates.mean();
  result.sample_variance =
      (result.estimates.array() - mean).square().sum() /
      std::max<long>(n_trials - 1, 1);
  result.crb = crb;
  result.cfi_at_truth = cfi;
  result.qfi_scalar = qfi_run;
  result.lo_offset = lo_offset;
  result.boundary_hits = boundary.load();
  return result;
}

}  // namespace tmsense
