#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "tmsense/fisher.hpp"
#include "tmsense/fock.hpp"
#include "tmsense/probes.hpp"

#include <cmath>

using namespace tmsense;
using namespace tmsense::fock;

TEST_CASE("squeezed vacuum in the number basis") {
  double r = 0.5;
  FockState s = squeezed_vacuum_fock(r, 40);

  SUBCASE("trace one, Hermitian, tiny truncation leak") {
    CHECK(s.rho.trace().real() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK((s.rho - s.rho.adjoint()).cwiseAbs().maxCoeff() < 1e-14);
    CHECK(s.truncation_leak() < 1e-8);
  }
  SUBCASE("odd levels unpopulated") {
    for (int n = 1; n <= 39; n += 2)
      CHECK(std::abs(s.rho(n, n)) < 1e-14);
  }
  SUBCASE("level populations match the analytic amplitudes") {
    double th = std::tanh(r);
    double p0 = 1.0 / std::cosh(r);        // |c_0|^2 = sech r
    CHECK(s.rho(0, 0).real() == doctest::Approx(p0).epsilon(1e-12));
    CHECK(s.rho(2, 2).real() ==
          doctest::Approx(p0 * th * th / 2.0).epsilon(1e-12));
  }
  SUBCASE("mean photon number sinh^2 r") {
    CHECK(mean_photon_fock(s) ==
          doctest::Approx(std::sinh(r) * std::sinh(r)).epsilon(1e-10));
  }
  SUBCASE("quadrature variances e^{-2r}/2 and e^{+2r}/2") {
    CHECK(quadrature_variance_fock(s, 0.0) ==
          doctest::Approx(0.5 * std::exp(-2.0 * r)).epsilon(1e-8));
    CHECK(quadrature_variance_fock(s, M_PI / 2.0) ==
          doctest::Approx(0.5 * std::exp(2.0 * r)).epsilon(1e-8));
  }
  SUBCASE("number variance 2 N (N + 1)") {
    double nb = std::sinh(r) * std::sinh(r);
    CHECK(number_cov_fock(s) ==
          doctest::Approx(2.0 * nb * (nb + 1.0)).epsilon(1e-9));
  }
  CHECK_THROWS_AS(squeezed_vacuum_fock(3.0, 10), std::invalid_argument);
}

TEST_CASE("coherent state oracle") {
  double a = 1.2;
  FockState s = coherent_fock(a, 40);
  CHECK(mean_photon_fock(s) == doctest::Approx(a * a).epsilon(1e-10));
  CHECK(number_cov_fock(s) == doctest::Approx(a * a).epsilon(1e-9));
  CHECK(quadrature_variance_fock(s, 0.3) == doctest::Approx(0.5).epsilon(1e-8));
}

TEST_CASE("loss channel on Fock states") {
  FockState s = squeezed_vacuum_fock(0.6, 50);
  SUBCASE("eta = 1 is the identity") {
    FockState t = apply_loss_fock(s, 1.0);
    CHECK((t.rho - s.rho).cwiseAbs().maxCoeff() < 1e-13);
  }
  SUBCASE("trace preserved, photons scaled by eta") {
    FockState t = apply_loss_fock(s, 0.35);
    CHECK(t.rho.trace().real() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(mean_photon_fock(t) ==
          doctest::Approx(0.35 * mean_photon_fock(s)).epsilon(1e-9));
  }
  SUBCASE("composition: eta1 then eta2 equals eta1 * eta2") {
    FockState a = apply_loss_fock(apply_loss_fock(s, 0.8), 0.5);
    FockState b = apply_loss_fock(s, 0.4);
    CHECK((a.rho - b.rho).cwiseAbs().maxCoeff() < 1e-12);
  }
  CHECK_THROWS_AS(apply_loss_fock(s, 0.0), std::invalid_argument);
}

TEST_CASE("phase rotation on Fock states") {
  FockState s = coherent_fock(0.9, 30);
  SUBCASE("populations invariant") {
    FockState t = phase_rotate_fock(s, 0.7);
    for (int n = 0; n <= 30; ++n)
      CHECK(t.rho(n, n).real() == doctest::Approx(s.rho(n, n).real()));
  }
  SUBCASE("2 pi is the identity") {
    FockState t = phase_rotate_fock(s, 2.0 * M_PI);
    CHECK((t.rho - s.rho).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("spectral QFI against known values") {
  SUBCASE("pure squeezed vacuum: 8 N (N + 1)") {
    for (double r : {0.3, 0.6, 0.8}) {
      auto family = [&](double phi) {
        return phase_rotate_fock(squeezed_vacuum_fock(r, 60), phi).rho;
      };
      double nb = std::sinh(r) * std::sinh(r);
      CHECK(qfi_fock(family, 0.05) ==
            doctest::Approx(8.0 * nb * (nb + 1.0)).epsilon(1e-6));
    }
  }
  SUBCASE("coherent state: 4 |alpha|^2") {
    double a = 0.8;
    auto family = [&](double phi) {
      return phase_rotate_fock(coherent_fock(a, 40), phi).rho;
    };
    CHECK(qfi_fock(family, 0.1) == doctest::Approx(4.0 * a * a).epsilon(1e-6));
  }
  SUBCASE("lossy squeezed vacuum matches the lossy closed form") {
    for (double eta : {0.5, 0.8}) {
      double nbar = 0.8;
      double r = std::asinh(std::sqrt(nbar));
      auto family = [&](double phi) {
        auto s = phase_rotate_fock(squeezed_vacuum_fock(r, 60), phi);
        return apply_loss_fock(s, eta).rho;
      };
      double closed =
          qfim_closed_lossy(nbar, eta, CMatrix::Identity(1, 1)).h(0, 0);
      CHECK(qfi_fock(family, 0.05) == doctest::Approx(closed).epsilon(1e-5));
    }
  }
}

TEST_CASE("two-mode split squeezed vacuum") {
  double r = 0.5;
  int cutoff = 40;

  SUBCASE("normalized for interior tau") {
    CVector psi = split_squeezed_two_mode(r, 0.3, cutoff);
    CHECK(psi.squaredNorm() == doctest::Approx(1.0).epsilon(1e-8));
  }
  SUBCASE("tau = 1 keeps everything in mode one") {
    CVector psi = split_squeezed_two_mode(r, 1.0, cutoff);
    int d = cutoff + 1;
    for (int n1 = 0; n1 < d; ++n1)
      for (int n2 = 1; n2 < d; ++n2)
        CHECK(std::abs(psi(n1 * d + n2)) < 1e-14);
  }
  SUBCASE("number covariance matches the Gaussian engine") {
    double tau = 0.5;
    CVector psi = split_squeezed_two_mode(r, tau, cutoff);

    CVector col(2);
    col << std::sqrt(tau), std::sqrt(1.0 - tau);
    CMatrix w = unitary_with_first_column(col);
    RVector rv = RVector::Zero(2);
    rv(0) = r;
    auto map = bogoliubov_from_factors(w, rv, CVector::Zero(2));

    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        CHECK(number_cov_fock2(psi, cutoff, i, j) ==
              doctest::Approx(number_cov(map, i, j)).epsilon(1e-7));
  }
}
