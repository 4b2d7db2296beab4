#pragma once

#include "tmsense/fisher.hpp"
#include "tmsense/probes.hpp"

#include <cstdint>
#include <random>

namespace tmsense {

struct HomodyneConfig {
  RVector lo_phases;  // one LO phase per mode, length R_t * M
  std::uint64_t seed = 0;

  static HomodyneConfig uniform(int n_modes, double offset,
                                std::uint64_t seed = 0);
};

struct SampleBatch {
  RMatrix outcomes;  // runs x (R_t * M)
  ProbeSpec spec;
  RVector true_phases;  // length M
};

/// phi_opt = asin(1 / (2 R_t M nbar + 1)) / 2.
double phi_opt(int r_t, int m, double nbar);

/// Exact Gaussian law of one run's homodyne outcomes, computed through the
/// dense covariance pipeline (probe -> phase encoding -> loss -> marginal).
QuadratureMarginal outcome_model(const ProbeSpec& spec, const RVector& phases,
                                 const HomodyneConfig& config);

/// Deterministic Box-Muller normal stream on top of mt19937_64.
class NormalSampler {
 public:
  explicit NormalSampler(std::uint64_t seed) : rng_(seed) {}
  double operator()();

 private:
  std::mt19937_64 rng_;
  bool has_cached_ = false;
  double cached_ = 0.0;
};

/// Analytic outcome law exploiting the structure of the probes: for the
/// squeezed schemes the covariance is I/2 plus a rank-2 update, for SQL it
/// is I/2 with a phase-dependent mean. Cost of every operation is linear in
/// the number of modes, which keeps large-R_t Monte Carlo runs cheap.
class HomodyneModel {
 public:
  HomodyneModel(const ProbeSpec& spec, const RVector& lo_phases);

  int n_modes() const { return n_; }
  const ProbeSpec& spec() const { return spec_; }

  struct Law {
    RVector mean;      // zero for squeezed schemes
    RVector u, v;      // rank-2 factors (empty for SQL)
    double m1 = 0.0;   // eta (e^{-2r} - 1)/2
    double m2 = 0.0;   // eta (e^{+2r} - 1)/2
    double sigma0 = 0.5;

    RMatrix dense_cov() const;
  };

  Law law(const RVector& phases) const;
  Law law_equal(double phi_avg) const;

  /// Sum of multivariate normal log-densities of the rows under the
  /// equal-phase hypothesis phi_j = phi_avg.
  double log_likelihood(double phi_avg, const RMatrix& outcomes) const;

  /// One run sampled from law(phases); O(n) per draw.
  RVector sample_run(const Law& law, NormalSampler& normal) const;

  /// Per-run classical Fisher information for a common shift of all phases,
  /// using the exact derivative of the outcome law.
  double classical_fisher(const RVector& phases) const;

 private:
  ProbeSpec spec_;
  int n_ = 0;
  RVector theta_;      // LO phase per mode
  RVector c_;          // first-column amplitudes |W_{l,0}|
  double squeeze_ = 0.0;
  ModeLayout layout_;
};

/// Dense-path sampling via symmetric square-root factorization.
RMatrix sample_dense(const QuadratureMarginal& model, long rows,
                     std::uint64_t seed);

SampleBatch sample(const ProbeSpec& spec, const RVector& true_phases,
                   const HomodyneConfig& config);

double log_likelihood(double phi_avg, const SampleBatch& batch,
                      const HomodyneConfig& config);

struct MleResult {
  double estimate = 0.0;
  bool on_boundary = false;
};

/// Golden-section maximization of the equal-phase log-likelihood, refined
/// by bisection on the numerical score.
MleResult mle(const SampleBatch& batch, const HomodyneConfig& config,
              double lo, double hi, double tol);

/// Per-run classical Fisher information of the homodyne outcome law.
double classical_fisher(const ProbeSpec& spec, const RVector& phases,
                        const HomodyneConfig& config);

struct LoPolicy {
  bool optimize = true;   // sweep a common LO offset maximizing the CFI
  double offset = 1.5707963267948966;  // used directly when !optimize
};

/// CFI-maximizing common LO offset at the given operating phases.
double choose_lo_offset(const ProbeSpec& spec, const RVector& phases);

struct EstimationResult {
  RVector estimates;           // length n_trials
  double sample_variance = 0.0;
  double crb = 0.0;            // 1 / (R_r * CFI per run)
  double cfi_at_truth = 0.0;   // per run
  double qfi_scalar = 0.0;     // per run, w-scalarized
  double lo_offset = 0.0;
  long boundary_hits = 0;
};

/// Repeats sample + MLE n_trials times (trials run concurrently, output is
/// schedule-independent) and reports the spread against the CRB and QCRB.
EstimationResult run_experiment(const ProbeSpec& spec,
                                const RVector& true_phases, long n_trials,
                                const LoPolicy& policy, std::uint64_t seed);

/// Worker count: TMSENSE_THREADS when set and nonzero, else hardware.
int worker_count();

}  // namespace tmsense
