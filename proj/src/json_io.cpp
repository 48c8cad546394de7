#include "eigenpath/json_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "eigenpath/errors.hpp"

namespace eigenpath {

namespace {

// Fixed-width round-trip formatting keeps CSV artifacts byte-stable.
std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

}  // namespace

Json matrix_to_json(const ComplexMatrix& m) {
  Json j;
  j["rows"] = m.rows();
  j["cols"] = m.cols();
  std::vector<double> re, im;
  re.reserve(m.size());
  im.reserve(m.size());
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      re.push_back(m(r, c).real());
      im.push_back(m(r, c).imag());
    }
  }
  j["re"] = re;
  j["im"] = im;
  return j;
}

ComplexMatrix matrix_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("rows") || !j.contains("cols") || !j.contains("re"))
    throw ValidationError("matrix JSON needs rows, cols, re (and optional im)");
  Eigen::Index rows = j.at("rows").get<Eigen::Index>();
  Eigen::Index cols = j.at("cols").get<Eigen::Index>();
  if (rows < 1 || cols < 1) throw ValidationError("matrix dimensions must be positive");
  std::vector<double> re = j.at("re").get<std::vector<double>>();
  std::vector<double> im =
      j.contains("im") ? j.at("im").get<std::vector<double>>()
                       : std::vector<double>(static_cast<std::size_t>(rows * cols), 0.0);
  if (re.size() != static_cast<std::size_t>(rows * cols) || im.size() != re.size())
    throw ValidationError("matrix JSON entry count does not match rows*cols");
  ComplexMatrix m(rows, cols);
  std::size_t k = 0;
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c, ++k) m(r, c) = Complex(re[k], im[k]);
  return m;
}

Json vector_to_json(const ComplexVector& v) { return matrix_to_json(v); }

ComplexVector vector_from_json(const Json& j) {
  ComplexMatrix m = matrix_from_json(j);
  if (m.cols() != 1) throw ValidationError("vector JSON must have cols == 1");
  return ComplexVector(m.col(0));
}

Json run_result_to_json(const RunResult& r) {
  Json j;
  Json samples = Json::array();
  for (const auto& [s, f] : r.samples) samples.push_back({{"s", s}, {"fidelity", f}});
  j["samples"] = std::move(samples);
  j["final_fidelity"] = r.final_fidelity;
  j["cost"] = {{"jumps", r.cost.jumps}, {"time", r.cost.time}};
  j["diagnostics"] = r.diagnostics;
  return j;
}

std::string samples_csv(const RunResult& r) {
  std::string out = "s,fidelity\n";
  for (const auto& [s, f] : r.samples) {
    out += fmt17(s);
    out += ',';
    out += fmt17(f);
    out += '\n';
  }
  return out;
}

BoundOutcome make_bound_outcome(BoundReport report, std::optional<double> measured) {
  BoundOutcome o;
  o.report = std::move(report);
  o.measured_infidelity = measured;
  if (measured) o.satisfied = (*measured <= o.report.total + 1e-12);
  return o;
}

Json bound_outcome_to_json(const BoundOutcome& o) {
  Json j;
  j["family"] = o.report.family;
  j["schedule"] = o.report.schedule;
  j["m"] = o.report.m;
  j["total"] = o.report.total;
  if (o.report.alternative_total >= 0.0)
    j["alternative_total"] = o.report.alternative_total;
  Json terms = Json::object();
  for (const auto& t : o.report.terms) terms[t.name] = t.value;
  j["terms"] = std::move(terms);
  j["measured_infidelity"] = o.measured_infidelity ? Json(*o.measured_infidelity) : Json();
  j["satisfied"] = o.satisfied ? Json(*o.satisfied) : Json();
  return j;
}

Json monte_carlo_to_json(const MonteCarloResult& r) {
  Json j;
  j["n_trajectories"] = r.n_trajectories;
  j["fidelity_mean"] = r.fidelity_mean;
  j["fidelity_stderr"] = r.fidelity_stderr;
  j["state_stderr"] = r.state_stderr;
  j["mean_jumps"] = r.mean_jumps;
  j["mean_time"] = r.mean_time;
  j["mean_state"] = matrix_to_json(r.mean_state);
  return j;
}

std::string trajectories_jsonl(const MonteCarloResult& r) {
  std::string out;
  for (const auto& t : r.per_trajectory) {
    Json j;
    j["seed"] = t.seed;
    j["jump_count"] = t.jump_count;
    j["time"] = t.time;
    j["fidelity"] = t.fidelity;
    out += j.dump();
    out += '\n';
  }
  return out;
}

Json gap_integral_report_to_json(const GapIntegralReport& r) {
  Json j;
  j["kind"] = r.kind;
  j["p"] = r.p;
  j["parameter"] = r.parameter;
  j["integral"] = r.integral;
  j["ratio"] = r.ratio;
  j["spread"] = r.spread;
  j["pass"] = r.pass;
  return j;
}

Json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open file: " + path);
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw ValidationError("malformed JSON in " + path + ": " + e.what());
  }
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write file: " + path);
  out << content;
}

}  // namespace eigenpath
