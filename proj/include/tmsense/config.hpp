#pragma once

#include "tmsense/probes.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace tmsense {

/// Exit codes shared by the CLI commands.
enum ExitCode {
  kOk = 0,
  kConfigError = 2,
  kNumericalError = 3,
  kVerificationError = 4,
};

struct SweepConfig {
  std::string variable = "R";       // "R" or "eta"
  std::vector<double> grid;         // explicit values; empty = use defaults
};

struct ExperimentConfig {
  std::string command = "bounds";
  ProbeSpec spec;                   // defaults: TM, M=2, nbar=2, eta=1
  SweepConfig sweep;
  long trials = 1000;
  std::uint64_t seed = 1;
  std::string output_path;          // empty = stdout
  // simulate-mle: local-estimation operating point offsets
  double s_exponent = 0.8;          // R_t = R^s, R_r = R^(1-s)
  double c_offset = 0.0;            // phi_avg - phi_opt = C / (R_t M nbar)
  double d_spread = 0.0;            // mean square spread = D / (R_t M nbar)
  // verify: optional closed-form perturbation for mutation testing
  std::optional<std::string> perturb_formula;
  double perturb_factor = 1.0;

  static ExperimentConfig defaults();
  static ExperimentConfig from_json_text(const std::string& text);
  static ExperimentConfig from_json_file(const std::string& path);
};

/// True phases for the simulate-mle operating point: average at
/// phi_opt + C/(R_t M nbar) with a zero-mean spread of mean square
/// D/(R_t M nbar).
RVector operating_phases(const ProbeSpec& spec, double c_offset,
                         double d_spread);

int cmd_bounds(const ExperimentConfig& config, std::ostream& out);
int cmd_sweep_r(const ExperimentConfig& config, std::ostream& out);
int cmd_sweep_loss(const ExperimentConfig& config, std::ostream& out);
int cmd_simulate_mle(const ExperimentConfig& config, std::ostream& json_out,
                     std::ostream& csv_out);
int cmd_verify(const ExperimentConfig& config, std::ostream& out);

/// Dispatches on config.command, writing to config.output_path or stdout.
int run_command(const ExperimentConfig& config);

/// Fixed-format CSV number: 10 significant digits, locale-independent.
std::string csv_number(double value);

}  // namespace tmsense
