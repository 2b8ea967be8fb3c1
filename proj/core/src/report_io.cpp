#include "renyikey/report_io.hpp"

#include <charconv>
#include <cmath>
#include <ostream>

#include <json.hpp>

namespace renyikey {

using nlohmann::json;

namespace {

json number(double v) {
  if (std::isfinite(v)) return v;
  return format_double(v);
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

const std::vector<std::string>& csv_columns() {
  static const std::vector<std::string> cols = {"alpha",   "beta",      "N",          "p_gen",    "depol",
                                                "loss",    "min_f",     "lambda_EC",  "g_alpha",  "key_length",
                                                "key_rate", "fw_iters", "fw_gap",     "dual_residual", "status"};
  return cols;
}

std::string csv_header() {
  std::string out;
  for (const auto& c : csv_columns()) {
    if (!out.empty()) out += ',';
    out += c;
  }
  return out;
}

std::string csv_row(const KeyRateReport& r) {
  std::string out;
  auto add = [&out](const std::string& s) {
    if (!out.empty()) out += ',';
    out += s;
  };
  add(format_double(r.alpha));
  add(format_double(r.beta));
  add(std::to_string(r.n_total));
  add(format_double(r.p_gen));
  add(format_double(r.depolarization));
  add(format_double(r.loss));
  add(format_double(r.min_f));
  add(format_double(r.lambda_ec));
  add(format_double(r.g_alpha));
  add(format_double(r.key_length));
  add(format_double(r.key_rate));
  add(std::to_string(r.fw_iters));
  add(format_double(r.fw_gap));
  add(format_double(r.dual_residual));
  add(r.status.empty() ? "unknown" : r.status);
  return out;
}

void write_run_log(std::ostream& os, const KeyRateReport& report, const FWResult& fw, const CertifiedBound& bound) {
  for (const auto& it : fw.log) {
    json rec = {{"type", "iteration"},
                {"alpha", number(report.alpha)},
                {"index", it.index},
                {"f", number(it.value)},
                {"gap", number(it.gap)},
                {"step", number(it.step)},
                {"away", it.away},
                {"feasibility", number(it.feasibility)},
                {"solver_status", it.solver_status},
                {"solver_iterations", it.solver_iterations}};
    os << rec.dump() << '\n';
  }
  json fin = {{"type", "bound"},
              {"alpha", number(report.alpha)},
              {"status", report.status},
              {"fw_converged", fw.converged},
              {"fw_value", number(fw.value)},
              {"fw_gap", number(fw.final_gap)},
              {"certified_bound", number(bound.value)},
              {"linear_primal", number(bound.linear_primal)},
              {"linear_dual", number(bound.linear_dual)},
              {"duality_gap", number(bound.duality_gap)},
              {"dual_residual", number(bound.dual_feasibility_residual)},
              {"certified", bound.certified},
              {"solver_status", bound.solver_status},
              {"mu", number(report.mu_ball)},
              {"perturbation_shift", number(report.perturbation_shift)},
              {"key_length", number(report.key_length)},
              {"key_rate", number(report.key_rate)}};
  if (!report.message.empty()) fin["message"] = report.message;
  os << fin.dump() << '\n';
}

}  // namespace renyikey
