#include "tmsense/config.hpp"

#include "tmsense/fisher.hpp"
#include "tmsense/measurement.hpp"
#include "tmsense/verify.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

namespace tmsense {

using nlohmann::json;

ExperimentConfig ExperimentConfig::defaults() {
  ExperimentConfig c;
  c.spec.scheme = Scheme::TM;
  c.spec.spatial_modes = 2;
  c.spec.temporal_modes = 10;
  c.spec.runs = 1;
  c.spec.nbar = 2.0;
  c.spec.eta = 1.0;
  c.spec.weights = RVector::Ones(2);
  return c;
}

namespace {

void parse_spec(const json& j, ProbeSpec& spec) {
  if (j.contains("scheme")) spec.scheme = scheme_from_name(j.at("scheme"));
  if (j.contains("M")) spec.spatial_modes = j.at("M");
  if (j.contains("R_t")) spec.temporal_modes = j.at("R_t");
  if (j.contains("R_r")) spec.runs = j.at("R_r");
  if (j.contains("nbar")) spec.nbar = j.at("nbar");
  if (j.contains("eta")) spec.eta = j.at("eta");
  if (j.contains("weights")) {
    std::vector<double> w = j.at("weights");
    spec.weights = Eigen::Map<RVector>(w.data(), long(w.size()));
  } else if (spec.weights.size() != spec.spatial_modes) {
    spec.weights = RVector::Ones(spec.spatial_modes);
  }
}

void parse_sweep(const json& j, SweepConfig& sweep) {
  if (j.contains("variable")) sweep.variable = j.at("variable");
  if (sweep.variable != "R" && sweep.variable != "eta")
    throw std::invalid_argument("sweep.variable must be \"R\" or \"eta\"");
  if (j.contains("grid")) {
    sweep.grid = j.at("grid").get<std::vector<double>>();
  } else if (j.contains("log_range")) {
    std::vector<double> lr = j.at("log_range");
    if (lr.size() != 3)
      throw std::invalid_argument("sweep.log_range must be [start, stop, points]");
    double start = lr[0], stop = lr[1];
    int points = int(lr[2]);
    if (!(start > 0.0) || !(start < stop) || points < 2)
      throw std::invalid_argument("sweep.log_range: need 0 < start < stop, points >= 2");
    for (int i = 0; i < points; ++i)
      sweep.grid.push_back(start *
                           std::pow(stop / start, double(i) / (points - 1)));
  }
  for (double v : sweep.grid)
    if (!(v > 0.0)) throw std::invalid_argument("sweep.grid values must be > 0");
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text) {
  try {
    json j = json::parse(text);
    ExperimentConfig c = defaults();
    if (j.contains("command")) c.command = j.at("command");
    if (j.contains("spec")) parse_spec(j.at("spec"), c.spec);
    if (j.contains("sweep")) parse_sweep(j.at("sweep"), c.sweep);
    if (j.contains("trials")) c.trials = j.at("trials");
    if (j.contains("seed")) c.seed = j.at("seed");
    if (j.contains("output_path")) c.output_path = j.at("output_path");
    if (j.contains("s")) c.s_exponent = j.at("s");
    if (j.contains("C")) c.c_offset = j.at("C");
    if (j.contains("D")) c.d_spread = j.at("D");
    if (j.contains("perturb")) {
      c.perturb_formula = j.at("perturb").at("formula").get<std::string>();
      c.perturb_factor = j.at("perturb").at("factor");
    }
    return c;
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
}

ExperimentConfig ExperimentConfig::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return from_json_text(buf.str());
}

std::string csv_number(double value) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.10g", value);
  return buf;
}

RVector operating_phases(const ProbeSpec& spec, double c_offset,
                         double d_spread) {
  const int m = spec.spatial_modes;
  double rmn = double(spec.temporal_modes) * m * spec.nbar;
  double avg = phi_opt(spec.temporal_modes, m, spec.nbar) + c_offset / rmn;
  RVector phases = RVector::Constant(m, avg);
  if (d_spread > 0.0 && m > 1) {
    // Zero-mean, unit-mean-square alternating pattern scaled to D/(R_t M nbar).
    RVector pattern(m);
    for (int j = 0; j < m; ++j) pattern(j) = (j % 2 == 0) ? 1.0 : -1.0;
    pattern.array() -= pattern.mean();
    pattern /= std::sqrt(pattern.squaredNorm() / m);
    phases += std::sqrt(d_spread / rmn) * pattern;
  }
  return phases;
}

int cmd_bounds(const ExperimentConfig& config, std::ostream& out) {
  const ProbeSpec& spec = config.spec;
  spec.validate();
  long r = spec.total_repetitions();
  int m = spec.spatial_modes;
  double nbar = spec.nbar, eta = spec.eta;

  BoundReport ts = eta < 1.0 ? bound_ts_lossy(eta, r, m, nbar)
                             : bound_ts(r, m, nbar);
  BoundReport tm = eta < 1.0 ? bound_tm_lossy(eta, r, m, nbar)
                             : bound_tm(r, m, nbar);
  BoundReport sql = bound_sql(eta, r, m, nbar);

  out << "scheme,R,M,nbar,eta,qcrb\n";
  for (const BoundReport* b : {&ts, &tm, &sql}) {
    out << scheme_name(b->scheme) << ',' << r << ',' << m << ','
        << csv_number(nbar) << ',' << csv_number(eta) << ','
        << csv_number(b->qcrb) << '\n';
  }
  return kOk;
}

int cmd_sweep_r(const ExperimentConfig& config, std::ostream& out) {
  config.spec.validate();
  SweepConfig sweep = config.sweep;
  if (sweep.variable != "R")
    throw std::invalid_argument("sweep-r requires sweep.variable == \"R\"");
  if (sweep.grid.empty()) {
    for (int i = 0; i < 50; ++i)
      sweep.grid.push_back(std::pow(1e4, double(i) / 49.0));
  }
  std::sort(sweep.grid.begin(), sweep.grid.end());

  int m = config.spec.spatial_modes;
  double nbar = config.spec.nbar, eta = config.spec.eta;
  out << "R,qcrb_ts,qcrb_tm,qcrb_sql\n";
  for (double rv : sweep.grid) {
    long r = std::lround(rv);
    if (r < 1) r = 1;
    double ts = eta < 1.0 ? bound_ts_lossy(eta, r, m, nbar).qcrb
                          : bound_ts(r, m, nbar).qcrb;
    double tm = eta < 1.0 ? bound_tm_lossy(eta, r, m, nbar).qcrb
                          : bound_tm(r, m, nbar).qcrb;
    double sql = bound_sql(eta, r, m, nbar).qcrb;
    out << r << ',' << csv_number(ts) << ',' << csv_number(tm) << ','
        << csv_number(sql) << '\n';
  }
  return kOk;
}

int cmd_sweep_loss(const ExperimentConfig& config, std::ostream& out) {
  config.spec.validate();
  SweepConfig sweep = config.sweep;
  if (sweep.grid.empty()) {
    for (int i = 2; i <= 100; ++i) sweep.grid.push_back(i / 100.0);
  } else if (sweep.variable != "eta") {
    throw std::invalid_argument("sweep-loss requires sweep.variable == \"eta\"");
  }
  std::sort(sweep.grid.begin(), sweep.grid.end());

  long r = config.spec.total_repetitions();
  int m = config.spec.spatial_modes;
  double nbar = config.spec.nbar;
  out << "eta,qcrb_ts,qcrb_tm,qcrb_sql,tm_beats_sql\n";
  for (double eta : sweep.grid) {
    if (!(eta > 0.0) || eta > 1.0)
      throw std::invalid_argument("sweep-loss: eta grid values must be in (0, 1]");
    out << csv_number(eta) << ','
        << csv_number(bound_ts_lossy(eta, r, m, nbar).qcrb) << ','
        << csv_number(bound_tm_lossy(eta, r, m, nbar).qcrb) << ','
        << csv_number(bound_sql(eta, r, m, nbar).qcrb) << ','
        << (sql_crossover(eta, r, m, nbar) ? 1 : 0) << '\n';
  }
  return kOk;
}

int cmd_simulate_mle(const ExperimentConfig& config, std::ostream& json_out,
                     std::ostream& csv_out) {
  const ProbeSpec& spec = config.spec;
  spec.validate();
  RVector phases = operating_phases(spec, config.c_offset, config.d_spread);

  LoPolicy policy;
  EstimationResult res =
      run_experiment(spec, phases, config.trials, policy, config.seed);

  double r_total = double(spec.total_repetitions());
  double s = r_total > 1.0 ? std::log(double(spec.temporal_modes)) /
                                 std::log(r_total)
                           : 1.0;

  json j;
  j["scheme"] = scheme_name(spec.scheme);
  j["M"] = spec.spatial_modes;
  j["R_t"] = spec.temporal_modes;
  j["R_r"] = spec.runs;
  j["nbar"] = spec.nbar;
  j["eta"] = spec.eta;
  j["seed"] = config.seed;
  j["trials"] = config.trials;
  j["s"] = s;
  j["true_phases"] = std::vector<double>(phases.data(),
                                         phases.data() + phases.size());
  j["lo_offset"] = res.lo_offset;
  j["sample_variance"] = res.sample_variance;
  j["crb"] = res.crb;
  j["cfi_per_run"] = res.cfi_at_truth;
  j["qfi_per_run"] = res.qfi_scalar;
  j["variance_over_crb"] = res.sample_variance / res.crb;
  j["boundary_hits"] = res.boundary_hits;
  json_out << j.dump(2) << '\n';

  csv_out << "R_r,R_t,s,variance,crb,qfi,ratio\n";
  csv_out << spec.runs << ',' << spec.temporal_modes << ',' << csv_number(s)
          << ',' << csv_number(res.sample_variance) << ','
          << csv_number(res.crb) << ','
          << csv_number(double(spec.runs) * res.qfi_scalar) << ','
          << csv_number(res.sample_variance / res.crb) << '\n';
  return kOk;
}

int cmd_verify(const ExperimentConfig& config, std::ostream& out) {
  ClosedFormScale scale;
  if (config.perturb_formula)
    scale = ClosedFormScale::perturbed(*config.perturb_formula,
                                       config.perturb_factor);
  auto results = run_verification(scale);
  for (const auto& r : results)
    out << (r.passed ? "[PASS] " : "[FAIL] ") << r.name << ": " << r.detail
        << '\n';
  return all_passed(results) ? kOk : kVerificationError;
}

int run_command(const ExperimentConfig& config) {
  std::ofstream file;
  std::ostream* out = &std::cout;
  if (!config.output_path.empty()) {
    file.open(config.output_path);
    if (!file)
      throw std::invalid_argument("cannot open output file: " +
                                  config.output_path);
    out = &file;
  }

  if (config.command == "bounds") return cmd_bounds(config, *out);
  if (config.command == "sweep-r") return cmd_sweep_r(config, *out);
  if (config.command == "sweep-loss") return cmd_sweep_loss(config, *out);
  if (config.command == "simulate-mle") {
    // JSON to the chosen output, CSV summary alongside (path + ".csv") or
    // to stdout when no path is given.
    if (config.output_path.empty())
      return cmd_simulate_mle(config, std::cout, std::cout);
    std::ofstream csv(config.output_path + ".csv");
    if (!csv)
      throw std::invalid_argument("cannot open output file: " +
                                  config.output_path + ".csv");
    return cmd_simulate_mle(config, *out, csv);
  }
  if (config.command == "verify") return cmd_verify(config, *out);
  throw std::invalid_argument("unknown command: " + config.command);
}

}  // namespace tmsense
