#pragma once

#include <string>
#include <vector>

namespace qrgd {

struct CriterionResult {
  int id = 0;
  std::string title;
  bool passed = false;
  std::string detail;
  double seconds = 0;
  double time_limit = 0;
};

/// Runs the acceptance criteria (all of them when `only` is empty). Each
/// result counts as passed only if its checks held and it ran within its
/// time limit.
std::vector<CriterionResult> run_acceptance(const std::vector<int>& only = {});

/// Number of criteria known to run_acceptance.
int acceptance_criterion_count();

}  // namespace qrgd
