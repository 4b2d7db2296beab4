#include "tmsense/verify.hpp"

#include "tmsense/fock.hpp"
#include "tmsense/probes.hpp"

#include <cmath>
#include <sstream>

namespace tmsense {

namespace {

ProbeSpec make_spec(Scheme scheme, int m, int rt, double nbar, double eta = 1.0) {
  ProbeSpec spec;
  spec.scheme = scheme;
  spec.spatial_modes = m;
  spec.temporal_modes = rt;
  spec.runs = 1;
  spec.nbar = nbar;
  spec.weights = RVector::Ones(m);
  spec.eta = eta;
  return spec;
}

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(6);
  os << x;
  return os.str();
}

void check(std::vector<CheckResult>& out, const std::string& name, bool ok,
           const std::string& detail) {
  out.push_back({name, ok, detail});
}

double slope_loglog(const std::vector<double>& xs,
                    const std::vector<double>& ys) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = double(xs.size());
  for (size_t i = 0; i < xs.size(); ++i) {
    double lx = std::log(xs[i]), ly = std::log(ys[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace

std::vector<CheckResult> run_verification(const ClosedFormScale& scale) {
  std::vector<CheckResult> out;

  // Closed-form vs generic QFIM over the full grid, and the scalar QCRB.
  {
    double worst_h = 0.0, worst_q = 0.0;
    for (int m = 1; m <= 4; ++m) {
      for (int rt = 1; rt <= 8; ++rt) {
        for (double nbar : {0.5, 1.0, 2.0}) {
          ProbeSpec spec = make_spec(Scheme::TM, m, rt, nbar);
          ProbeBundle bundle = build_probe(spec);
          Qfim hg = qfim_generic(bundle.map, m, rt);
          Qfim hc = qfim_closed_lossless(double(rt) * m * nbar,
                                         bundle.u_spatial, scale.qfim_lossless);
          double scale_ref = hg.h.cwiseAbs().maxCoeff();
          worst_h = std::max(worst_h,
                             (hg.h - hc.h).cwiseAbs().maxCoeff() / scale_ref);

          RVector w = RVector::Constant(m, 1.0 / m);
          double nt = double(rt) * m * nbar;
          double analytic = 1.0 / (8.0 * nt * (nt + 1.0));
          double numeric = qcrb(w, hg);
          worst_q = std::max(worst_q, std::abs(numeric - analytic) / analytic);
        }
      }
    }
    check(out, "qfim-closed-vs-generic", worst_h < 1e-9,
          "max relative deviation " + fmt(worst_h));
    check(out, "qcrb-scalar-closed-form", worst_q < 1e-10,
          "max relative deviation " + fmt(worst_q));
  }

  // TS / TM bound formulas against the matrix route.
  {
    double worst_ts = 0.0, worst_tm = 0.0;
    for (long r : {1L, 4L, 16L, 32L}) {
      for (int m : {1, 2, 4}) {
        for (double nbar : {0.5, 2.0}) {
          RVector w = RVector::Constant(m, 1.0 / m);
          ProbeBundle ts = build_probe(make_spec(Scheme::TS, m, 1, nbar));
          double route_ts = qcrb(w, qfim_generic(ts.map, m, 1)) / double(r);
          double formula_ts = bound_ts(r, m, nbar, scale.bound_ts).qcrb;
          worst_ts = std::max(worst_ts,
                              std::abs(route_ts - formula_ts) / route_ts);

          // Single TM probe with R_t = R temporal modes (R_r = 1).
          ProbeBundle tm = build_probe(make_spec(Scheme::TM, m, int(r), nbar));
          double route_tm = qcrb(w, qfim_generic(tm.map, m, int(r)));
          double formula_tm = bound_tm(r, m, nbar, scale.bound_tm).qcrb;
          worst_tm = std::max(worst_tm,
                              std::abs(route_tm - formula_tm) / route_tm);
        }
      }
    }
    check(out, "bound-ts-vs-route", worst_ts < 1e-9,
          "max relative deviation " + fmt(worst_ts));
    check(out, "bound-tm-vs-route", worst_tm < 1e-9,
          "max relative deviation " + fmt(worst_tm));
  }

  // Lossy closed-form QFIM against the Fock-space oracle (M = 1).
  {
    double worst = 0.0;
    for (double eta : {0.5, 0.8}) {
      for (double nbar : {0.5, 1.0}) {
        double r = std::asinh(std::sqrt(nbar));
        auto family = [&](double phi) {
          auto s = fock::squeezed_vacuum_fock(r, 60);
          s = fock::phase_rotate_fock(s, phi);
          s = fock::apply_loss_fock(s, eta);
          return s.rho;
        };
        double oracle = fock::qfi_fock(family, 0.05);
        CMatrix one = CMatrix::Identity(1, 1);
        double closed =
            qfim_closed_lossy(nbar, eta, one, scale.qfim_lossy).h(0, 0);
        worst = std::max(worst, std::abs(oracle - closed) / closed);
      }
    }
    check(out, "qfim-lossy-vs-fock-oracle", worst < 1e-5,
          "max relative deviation " + fmt(worst));
  }

  // Gaussian number covariance against the Fock oracle.
  {
    double r = 0.5;
    auto s = fock::squeezed_vacuum_fock(r, 60);
    double nb = std::sinh(r) * std::sinh(r);
    CMatrix w1 = CMatrix::Identity(1, 1);
    RVector rv(1);
    rv << r;
    auto map1 = bogoliubov_from_factors(w1, rv, CVector::Zero(1));
    double dev = std::abs(number_cov(map1, 0, 0) - fock::number_cov_fock(s));
    bool ok = dev < 1e-7 &&
              std::abs(number_cov(map1, 0, 0) - 2.0 * nb * (nb + 1.0)) < 1e-10;
    check(out, "number-cov-vs-fock-oracle", ok, "deviation " + fmt(dev));
  }

  // Lossy bound formulas against the closed-form QFIM route.
  {
    double worst = 0.0;
    for (double eta : {0.3, 0.5, 0.9, 1.0}) {
      for (long r : {1L, 10L, 1000L}) {
        for (int m : {1, 2, 4}) {
          double nbar = 2.0;
          RVector w = RVector::Constant(m, 1.0 / m);
          CMatrix us = spatial_interferometer(RVector::Ones(m));

          double route_tm =
              qcrb(w, qfim_closed_lossy(double(r) * m * nbar, eta, us));
          double f_tm = bound_tm_lossy(eta, r, m, nbar, scale.bound_tm_lossy).qcrb;
          worst = std::max(worst, std::abs(route_tm - f_tm) / route_tm);

          double route_ts =
              qcrb(w, qfim_closed_lossy(double(m) * nbar, eta, us)) / double(r);
          double f_ts = bound_ts_lossy(eta, r, m, nbar, scale.bound_ts_lossy).qcrb;
          worst = std::max(worst, std::abs(route_ts - f_ts) / route_ts);
        }
      }
    }
    check(out, "lossy-bounds-vs-qfim-route", worst < 1e-9,
          "max relative deviation " + fmt(worst));
  }

  // Ordering chain and scaling slopes.
  {
    bool ordered = true;
    for (int ir = 1; ir <= 10 && ordered; ++ir) {
      for (int m = 1; m <= 10 && ordered; ++m) {
        for (double nbar : {0.5, 1.0, 2.0, 4.0, 8.0}) {
          long r = ir * ir;
          double ts = bound_ts(r, m, nbar).qcrb;
          double tm = bound_tm(r, m, nbar).qcrb;
          double sql = bound_sql(1.0, r, m, nbar).qcrb;
          if (!(tm <= ts * (1 + 1e-12) && ts <= sql * (1 + 1e-12)))
            ordered = false;
        }
      }
    }
    check(out, "bound-ordering-chain", ordered, "TM <= TS <= SQL at eta = 1");

    std::vector<double> rs, tms, tss;
    for (int i = 0; i <= 20; ++i) {
      long r = std::lround(100.0 * std::pow(100.0, i / 20.0));
      rs.push_back(double(r));
      tms.push_back(bound_tm(r, 2, 2.0).qcrb);
      tss.push_back(bound_ts(r, 2, 2.0).qcrb);
    }
    double s_tm = slope_loglog(rs, tms);
    double s_ts = slope_loglog(rs, tss);
    check(out, "tm-scaling-slope", s_tm >= -2.0 && s_tm <= -1.95,
          "slope " + fmt(s_tm));
    check(out, "ts-scaling-slope", std::abs(s_ts + 1.0) < 1e-10,
          "slope " + fmt(s_ts));
  }

  return out;
}

bool all_passed(const std::vector<CheckResult>& results) {
  for (const auto& r : results)
    if (!r.passed) return false;
  return true;
}

}  // namespace tmsense
