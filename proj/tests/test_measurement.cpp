#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "tmsense/measurement.hpp"

#include <cmath>

using namespace tmsense;

namespace {

ProbeSpec spec_for(Scheme scheme, int m, int rt, double nbar, double eta = 1.0,
                   long runs = 1) {
  ProbeSpec spec;
  spec.scheme = scheme;
  spec.spatial_modes = m;
  spec.temporal_modes = rt;
  spec.runs = runs;
  spec.nbar = nbar;
  spec.weights = RVector::Ones(m);
  spec.eta = eta;
  return spec;
}

RVector varied(int n, double base, double step) {
  RVector v(n);
  for (int i = 0; i < n; ++i) v(i) = base + step * i;
  return v;
}

}  // namespace

TEST_CASE("optimal operating phase") {
  CHECK(phi_opt(10, 2, 2.0) ==
        doctest::Approx(std::asin(1.0 / 81.0) / 2.0).epsilon(1e-14));
  CHECK(phi_opt(1, 1, 1.0) ==
        doctest::Approx(std::asin(1.0 / 3.0) / 2.0).epsilon(1e-14));
  // Shrinks like 1/(2 (2 R_t M nbar + 1)) at a large photon budget.
  CHECK(phi_opt(1000, 2, 2.0) * 2.0 * (2.0 * 4000.0 + 1.0) ==
        doctest::Approx(1.0).epsilon(1e-6));
  CHECK_THROWS_AS(phi_opt(1, 1, 0.0), std::invalid_argument);
}

TEST_CASE("analytic law matches the dense covariance pipeline") {
  // The structured O(n) law must reproduce the mean and covariance obtained
  // by pushing the state through encoding, loss, and the homodyne marginal.
  struct Case {
    Scheme scheme;
    int m, rt;
    double eta;
  };
  for (Case c : {Case{Scheme::TM, 2, 3, 1.0}, Case{Scheme::TM, 3, 2, 0.6},
                 Case{Scheme::TS, 2, 1, 1.0}, Case{Scheme::TS, 3, 1, 0.7},
                 Case{Scheme::SQL, 2, 2, 1.0}, Case{Scheme::SQL, 2, 3, 0.5}}) {
    ProbeSpec spec = spec_for(c.scheme, c.m, c.rt, 1.3, c.eta);
    const int n = c.m * c.rt;
    RVector phases = varied(c.m, 0.05, 0.11);
    RVector lo = varied(n, 0.3, 0.27);

    HomodyneConfig cfg;
    cfg.lo_phases = lo;
    QuadratureMarginal dense = outcome_model(spec, phases, cfg);

    HomodyneModel model(spec, lo);
    auto law = model.law(phases);
    RMatrix cov = law.dense_cov();

    CAPTURE(int(c.scheme));
    CAPTURE(c.eta);
    CHECK((cov - dense.cov).cwiseAbs().maxCoeff() < 1e-9);
    CHECK((law.mean - dense.mean).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("SQL law") {
  ProbeSpec spec = spec_for(Scheme::SQL, 2, 2, 2.0, 0.5);
  HomodyneModel model(spec, RVector::Zero(4));
  auto law = model.law(RVector::Zero(2));
  CHECK(law.u.size() == 0);
  for (int l = 0; l < 4; ++l)
    CHECK(law.mean(l) == doctest::Approx(std::sqrt(2.0 * 0.5 * 2.0)).epsilon(1e-12));
  CHECK((law.dense_cov() - 0.5 * RMatrix::Identity(4, 4)).cwiseAbs().maxCoeff() <
        1e-14);
}

TEST_CASE("normal sampler statistics") {
  NormalSampler normal(7);
  const long n = 100000;
  double s = 0.0, s2 = 0.0;
  for (long i = 0; i < n; ++i) {
    double z = normal();
    s += z;
    s2 += z * z;
  }
  CHECK(std::abs(s / n) < 0.02);
  CHECK(s2 / n == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("sample_run reproduces the law covariance") {
  ProbeSpec spec = spec_for(Scheme::TM, 2, 1, 2.0, 0.8);
  RVector lo = varied(2, 0.4, 0.9);
  HomodyneModel model(spec, lo);
  auto law = model.law(varied(2, 0.1, 0.2));
  RMatrix target = law.dense_cov();

  NormalSampler normal(11);
  const long n = 40000;
  RMatrix acc = RMatrix::Zero(2, 2);
  RVector mean_acc = RVector::Zero(2);
  for (long i = 0; i < n; ++i) {
    RVector y = model.sample_run(law, normal);
    mean_acc += y;
    acc += y * y.transpose();
  }
  mean_acc /= double(n);
  RMatrix emp = acc / double(n) - mean_acc * mean_acc.transpose();
  CHECK((emp - target).cwiseAbs().maxCoeff() < 0.05 * target.norm());
  CHECK(mean_acc.cwiseAbs().maxCoeff() < 0.05);
}

TEST_CASE("sampling determinism") {
  ProbeSpec spec = spec_for(Scheme::TM, 2, 2, 1.0, 1.0, 16);
  RVector phases = varied(2, 0.05, 0.03);
  HomodyneConfig cfg = HomodyneConfig::uniform(4, 0.7, 123);
  SampleBatch a = sample(spec, phases, cfg);
  SampleBatch b = sample(spec, phases, cfg);
  CHECK(a.outcomes == b.outcomes);
  cfg.seed = 124;
  SampleBatch c = sample(spec, phases, cfg);
  CHECK((a.outcomes - c.outcomes).cwiseAbs().maxCoeff() > 1e-6);
}

TEST_CASE("log-likelihood") {
  ProbeSpec spec = spec_for(Scheme::TM, 2, 1, 1.5, 0.9, 3);
  RVector lo = varied(2, 0.2, 0.5);
  HomodyneConfig cfg;
  cfg.lo_phases = lo;
  cfg.seed = 5;
  RVector phases = RVector::Constant(2, 0.08);
  SampleBatch batch = sample(spec, phases, cfg);
  HomodyneModel model(spec, lo);

  SUBCASE("additivity over runs") {
    double total = model.log_likelihood(0.08, batch.outcomes);
    double acc = 0.0;
    for (int r = 0; r < 3; ++r)
      acc += model.log_likelihood(0.08, batch.outcomes.row(r));
    CHECK(total == doctest::Approx(acc).epsilon(1e-10));
  }
  SUBCASE("Woodbury form equals the direct dense Gaussian density") {
    auto law = model.law_equal(0.08);
    RMatrix cov = law.dense_cov();
    double logdet = std::log(cov.determinant());
    RMatrix prec = cov.inverse();
    double direct = 0.0;
    for (int r = 0; r < 3; ++r) {
      RVector y = batch.outcomes.row(r).transpose() - law.mean;
      direct += -0.5 * (2.0 * std::log(2.0 * M_PI) + logdet) -
                0.5 * y.dot(prec * y);
    }
    CHECK(model.log_likelihood(0.08, batch.outcomes) ==
          doctest::Approx(direct).epsilon(1e-10));
  }
  SUBCASE("free function agrees with the member") {
    CHECK(log_likelihood(0.1, batch, cfg) ==
          doctest::Approx(model.log_likelihood(0.1, batch.outcomes)).epsilon(1e-12));
  }
}

TEST_CASE("maximum-likelihood estimate") {
  ProbeSpec spec = spec_for(Scheme::TM, 1, 4, 1.0, 1.0, 400);
  double truth = phi_opt(4, 1, 1.0);
  HomodyneConfig cfg = HomodyneConfig::uniform(4, choose_lo_offset(
      spec, RVector::Constant(1, truth)), 31);
  SampleBatch batch = sample(spec, RVector::Constant(1, truth), cfg);
  // Local search interval; the covariance-only model has a mirror mode at
  // -phi - 2 theta that a wide interval would expose.
  MleResult res = mle(batch, cfg, truth - 0.04, truth + 0.04, 1e-9);

  SUBCASE("estimate is a local maximum of the likelihood") {
    double at = log_likelihood(res.estimate, batch, cfg);
    CHECK(at >= log_likelihood(res.estimate + 1e-4, batch, cfg));
    CHECK(at >= log_likelihood(res.estimate - 1e-4, batch, cfg));
  }
  SUBCASE("estimate near the truth at this sample size") {
    double cfi = classical_fisher(spec, RVector::Constant(1, truth), cfg);
    double sigma = std::sqrt(1.0 / (400.0 * cfi));
    CHECK(std::abs(res.estimate - truth) < 6.0 * sigma);
    CHECK(!res.on_boundary);
  }
  CHECK_THROWS_AS(mle(batch, cfg, 0.2, 0.1, 1e-9), std::invalid_argument);
}

TEST_CASE("classical Fisher information") {
  SUBCASE("SQL with quadrature-phase LO reaches 4 eta R_t M nbar") {
    for (double eta : {1.0, 0.6}) {
      ProbeSpec spec = spec_for(Scheme::SQL, 2, 3, 1.5, eta);
      double phi = 0.12;
      RVector lo = RVector::Constant(6, M_PI / 2.0 - phi);
      HomodyneConfig cfg;
      cfg.lo_phases = lo;
      double f = classical_fisher(spec, RVector::Constant(2, phi), cfg);
      CHECK(f == doctest::Approx(4.0 * eta * 3 * 2 * 1.5).epsilon(1e-6));
    }
  }
  SUBCASE("squeezed scheme: optimized LO approaches the quantum limit") {
    ProbeSpec spec = spec_for(Scheme::TM, 2, 2, 1.0);
    double nt = 2.0 * 2 * 1.0;
    double qfi = 8.0 * nt * (nt + 1.0);
    RVector phases = RVector::Constant(2, phi_opt(2, 2, 1.0));
    double theta = choose_lo_offset(spec, phases);
    HomodyneConfig cfg = HomodyneConfig::uniform(4, theta);
    double f = classical_fisher(spec, phases, cfg);
    CHECK(f > 0.0);
    CHECK(f <= qfi * (1.0 + 1e-4));
    CHECK(f > 0.9 * qfi);
  }
  SUBCASE("nonnegative at arbitrary settings") {
    ProbeSpec spec = spec_for(Scheme::TM, 3, 2, 0.8, 0.7);
    HomodyneConfig cfg = HomodyneConfig::uniform(6, 0.3);
    CHECK(classical_fisher(spec, varied(3, 0.02, 0.04), cfg) >= 0.0);
  }
}

TEST_CASE("full estimation experiment") {
  ProbeSpec spec = spec_for(Scheme::TM, 1, 2, 1.0, 1.0, 200);
  RVector truth = RVector::Constant(1, phi_opt(2, 1, 1.0));
  LoPolicy policy;

  EstimationResult res = run_experiment(spec, truth, 200, policy, 77);
  SUBCASE("variance within a factor of the Cramer-Rao bound") {
    CHECK(res.crb > 0.0);
    CHECK(res.sample_variance > 0.4 * res.crb);
    CHECK(res.sample_variance < 2.5 * res.crb);
    CHECK(res.cfi_at_truth <= res.qfi_scalar * (1.0 + 1e-6));
    CHECK(res.boundary_hits == 0);
  }
  SUBCASE("deterministic across thread schedules") {
    EstimationResult again = run_experiment(spec, truth, 200, policy, 77);
    CHECK(res.estimates == again.estimates);
    CHECK(res.sample_variance == again.sample_variance);
  }
  CHECK_THROWS_AS(run_experiment(spec, truth, 50, policy, 1),
                  std::invalid_argument);
}
