#pragma once

#include "tmsense/fisher.hpp"

#include <string>
#include <vector>

namespace tmsense {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Full cross-validation suite: closed-form vs generic QFIM, bound formulas
/// vs the matrix route, Fock-oracle agreement, bound ordering, and scaling
/// slopes. `scale` lets the mutation tests perturb individual closed-form
/// constants; defaults leave every formula untouched.
std::vector<CheckResult> run_verification(const ClosedFormScale& scale = {});

bool all_passed(const std::vector<CheckResult>& results);

}  // namespace tmsense
