#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "eigenpath/json_io.hpp"

namespace eigenpath {

// One invariant, aggregated over its whole random ensemble. margin is the
// worst observed distance to the tolerance (positive = pass with room);
// detail names the worst offender.
struct CheckResult {
  std::string name;
  bool pass = false;
  double margin = 0.0;
  std::string detail;
};

struct SuiteReport {
  std::string suite;
  std::uint64_t seed = 0;
  std::vector<CheckResult> checks;
  bool pass = false;
};

// Runs the named invariant suite (appendix_a | dynamics | stochastic |
// bounds) or all of them, on ensembles derived deterministically from the
// seed. Reports carry no timestamps or machine state, so a given (suite,
// seed) pair always serialises byte-identically.
std::vector<SuiteReport> run_verify(const std::string& suite, std::uint64_t seed,
                                    int n_threads);

Json verify_report_json(const std::vector<SuiteReport>& reports);

}  // namespace eigenpath
