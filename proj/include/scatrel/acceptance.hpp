// The acceptance suite: ten end-to-end criteria covering flow integrity,
// asymptotic extraction, the Lagrangian relation, action identities, WKB
// phases, the semiclassical-vs-exact comparison, and the order test.
#pragma once

#include <string>
#include <vector>

#include "scatrel/config.hpp"

namespace scatrel {

struct CriterionResult {
  int index = 0;
  std::string name;
  bool pass = false;
  double runtime_s = 0.0;
  std::string detail; // the measured numbers behind the verdict
};

// Run criteria 1..10 against the configured system (the shipped default:
// gaussian amplitude 1, width 2, lambda 1/2, n = 2).  Exceptions inside a
// criterion fail that criterion with the message in `detail`; the remaining
// criteria still run.
std::vector<CriterionResult> run_acceptance(const RunConfig& config = {});

} // namespace scatrel
