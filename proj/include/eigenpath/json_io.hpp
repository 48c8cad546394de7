#pragma once

#include <optional>
#include <string>

#include <json.hpp>

#include "eigenpath/core.hpp"
#include "eigenpath/dynamics.hpp"
#include "eigenpath/schedules.hpp"
#include "eigenpath/stochastic.hpp"

namespace eigenpath {

using Json = nlohmann::json;

// Dense matrices travel as {rows, cols, re: [...], im: [...]} in row-major
// order; vectors are the cols == 1 special case.
Json matrix_to_json(const ComplexMatrix& m);
ComplexMatrix matrix_from_json(const Json& j);
Json vector_to_json(const ComplexVector& v);
ComplexVector vector_from_json(const Json& j);

Json run_result_to_json(const RunResult& r);
std::string samples_csv(const RunResult& r);

// measured = infidelity of an accompanying run, when one was executed;
// satisfied = measured <= bound total (with an absolute 1e-12 slack).
struct BoundOutcome {
  BoundReport report;
  std::optional<double> measured_infidelity;
  std::optional<bool> satisfied;
};

BoundOutcome make_bound_outcome(BoundReport report, std::optional<double> measured);
Json bound_outcome_to_json(const BoundOutcome& o);

Json monte_carlo_to_json(const MonteCarloResult& r);
std::string trajectories_jsonl(const MonteCarloResult& r);

Json gap_integral_report_to_json(const GapIntegralReport& r);

// Parse a JSON document from disk; I/O and syntax problems surface as
// ValidationError mentioning the path.
Json load_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace eigenpath
