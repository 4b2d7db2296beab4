#pragma once

#include "tmsense/gaussian.hpp"

#include <functional>

namespace tmsense::fock {

/// Truncated single-mode Fock-space density matrix. Used as a brute-force
/// verification oracle for the Gaussian engine at small photon numbers.
struct FockState {
  int cutoff = 0;      // dimension = cutoff + 1
  CMatrix rho;         // (cutoff+1) x (cutoff+1), Hermitian, trace 1

  /// Population of the top two levels; must stay tiny for valid truncation.
  double truncation_leak() const;
};

/// Squeezed vacuum with amplitudes on even levels only:
/// c_k ~ (-tanh r)^k sqrt((2k)!) / (2^k k!). Throws if the truncation leak
/// exceeds 1e-8.
FockState squeezed_vacuum_fock(double r, int cutoff);

FockState coherent_fock(double alpha, int cutoff);

/// Pure-loss channel via Kraus operators; trace preserving.
FockState apply_loss_fock(const FockState& state, double eta);

/// Phase rotation exp(i phi n) on the density matrix.
FockState phase_rotate_fock(const FockState& state, double phi);

double mean_photon_fock(const FockState& state);
double quadrature_variance_fock(const FockState& state, double theta);

/// QFI of a one-parameter family of density matrices at phi0 using the
/// spectral sum over (lambda_m + lambda_n), terms with vanishing
/// denominator excluded. Derivative by central finite difference with one
/// Richardson consistency check.
double qfi_fock(const std::function<CMatrix(double)>& rho_of_phi, double phi0);

/// Two-mode pure state: squeezed vacuum split on a beam splitter with
/// |t|^2 = tau into two modes, each truncated at `cutoff` photons.
/// Returns the state vector in the |n1, n2> basis (n2 fastest).
CVector split_squeezed_two_mode(double r, double tau, int cutoff);

/// Cov(n_i, n_j) on a two-mode pure state vector.
double number_cov_fock2(const CVector& psi, int cutoff, int i, int j);

/// Cov(n, n) on a single-mode state.
double number_cov_fock(const FockState& state);

}  // namespace tmsense::fock
