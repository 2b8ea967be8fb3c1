// renyikey: certified finite-size key rates from a flat JSON config.
//
//   renyikey run  [--config cfg.json] [--<key> value ...]
//   renyikey scan --axis alpha|loss|blocksize --values v1,v2,... [--config ...] [--<key> value ...]
//
// Exit status: 0 converged, 1 bad config or usage, 2 zero key rate, 3 infeasible
// constraint set, 4 solver failure or non-convergence.

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "renyikey/pipeline.hpp"
#include "renyikey/report_io.hpp"
#include "renyikey/run_config.hpp"

namespace {

using namespace renyikey;

enum ExitCode : int { kOk = 0, kConfig = 1, kZeroRate = 2, kInfeasible = 3, kSolverFailure = 4 };

int exit_code_for(const KeyRateReport& r) {
  if (r.status == "infeasible") return kInfeasible;
  if (r.status != "converged") return kSolverFailure;
  if (!(r.key_rate > 0.0)) return kZeroRate;
  return kOk;
}

int worker_count() {
  const char* env = std::getenv("RENYIKEY_WORKERS");
  if (env == nullptr || *env == '\0') return 1;
  char* end = nullptr;
  const long n = std::strtol(env, &end, 10);
  if (*end != '\0' || n < 1) throw Error(ErrorKind::Config, "RENYIKEY_WORKERS must be a positive integer");
  return static_cast<int>(n);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Config, "cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Evaluates one configuration: a single alpha, or the best point of the alpha grid.
/// The run log of every evaluated alpha goes to `log` when given.
KeyRateReport evaluate(const RunConfig& cfg, std::ostream* log) {
  const KeyRatePipeline pipeline(cfg.instance(), cfg.finite_size(), cfg.security(), cfg.pipeline_options());
  if (cfg.alpha) {
    const PointRun p = pipeline.run(*cfg.alpha);
    if (log) write_run_log(*log, p.report, p.fw, p.bound);
    return p.report;
  }
  const AlphaScan scan = pipeline.optimize_alpha(cfg.grid(), [log](const PointRun& p) {
    if (log) write_run_log(*log, p.report, p.fw, p.bound);
  });
  return scan.best;
}

class Output {
 public:
  Output(const std::string& path, bool append) {
    if (path.empty() || path == "-") return;
    bool has_content = false;
    if (append) {
      std::ifstream probe(path);
      has_content = probe && probe.peek() != std::ifstream::traits_type::eof();
    }
    file_ = std::make_unique<std::ofstream>(path, append ? std::ios::app : std::ios::trunc);
    if (!*file_) throw Error(ErrorKind::Config, "cannot open output file '" + path + "'");
    header_written_ = has_content;
  }
  void row(const std::string& line) {
    std::ostream& os = file_ ? *file_ : std::cout;
    if (!header_written_) {
      os << csv_header() << '\n';
      header_written_ = true;
    }
    os << line << '\n';
    os.flush();
  }

 private:
  std::unique_ptr<std::ofstream> file_;
  bool header_written_ = false;
};

std::unique_ptr<std::ofstream> open_log(const std::string& path) {
  if (path.empty()) return nullptr;
  auto f = std::make_unique<std::ofstream>(path, std::ios::trunc);
  if (!*f) throw Error(ErrorKind::Config, "cannot open run log '" + path + "'");
  return f;
}

void report_failure(const KeyRateReport& r) {
  if (r.status == "converged") return;
  std::cerr << "renyikey: status=" << r.status << " alpha=" << format_double(r.alpha);
  if (!r.message.empty()) std::cerr << " reason=\"" << r.message << '"';
  std::cerr << '\n';
}

int run_single(const RunConfig& cfg) {
  auto log = open_log(cfg.run_log_path);
  const KeyRateReport r = evaluate(cfg, log.get());
  Output out(cfg.output_path, true);
  out.row(csv_row(r));
  report_failure(r);
  return exit_code_for(r);
}

std::vector<double> parse_values(const std::string& text) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size()) throw Error(ErrorKind::Config, "bad scan value '" + item + "'");
    values.push_back(v);
  }
  if (values.empty()) throw Error(ErrorKind::Config, "--values needs at least one number");
  return values;
}

int run_scan(const RunConfig& base, const std::string& axis, const std::vector<double>& values) {
  std::vector<RunConfig> points;
  for (double v : values) {
    RunConfig c = base;
    if (axis == "alpha") {
      c.alpha = v;
    } else if (axis == "loss") {
      c.loss = v;
    } else {
      if (!(v >= 1.0) || std::floor(v) != v) throw Error(ErrorKind::Config, "blocksize values must be integers");
      c.n_total = static_cast<std::int64_t>(v);
    }
    c.validate();
    points.push_back(std::move(c));
  }

  std::vector<KeyRateReport> reports(points.size());
  std::vector<std::string> logs(points.size());
  const bool want_log = !base.run_log_path.empty();

  if (axis == "alpha" && base.warm_start) {
    // One pipeline, warm-started along the input order.
    const KeyRatePipeline pipeline(base.instance(), base.finite_size(), base.security(), base.pipeline_options());
    CMatrix warm;
    for (std::size_t i = 0; i < points.size(); ++i) {
      const PointRun p = pipeline.run(*points[i].alpha, warm);
      if (p.fw.rho.size() != 0) warm = p.fw.rho;
      reports[i] = p.report;
      if (want_log) {
        std::ostringstream os;
        write_run_log(os, p.report, p.fw, p.bound);
        logs[i] = os.str();
      }
    }
  } else {
    parallel_for(points.size(), worker_count(), [&](std::size_t i) {
      std::ostringstream os;
      reports[i] = evaluate(points[i], want_log ? &os : nullptr);
      logs[i] = os.str();
    });
  }

  auto log = open_log(base.run_log_path);
  Output out(base.output_path, false);
  int code = kOk;
  for (std::size_t i = 0; i < reports.size(); ++i) {
    out.row(csv_row(reports[i]));
    if (log) *log << logs[i];
    report_failure(reports[i]);
    const int c = exit_code_for(reports[i]);
    if (c == kSolverFailure || (c == kInfeasible && code != kSolverFailure)) code = c;
  }
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Certified finite-size QKD key rates"};
  app.require_subcommand(1);

  std::string config_path;
  std::map<std::string, std::string> overrides;
  std::string axis;
  std::string values_text;
  bool print_config = false;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "JSON config file")->check(CLI::ExistingFile);
    cmd->add_flag("--print-config", print_config, "Print the effective config to stderr");
    for (const auto& key : run_config_keys()) {
      cmd->add_option_function<std::string>(
          "--" + key, [&overrides, key](const std::string& v) { overrides[key] = v; },
          "Overrides config key '" + key + "'");
    }
  };

  CLI::App* run_cmd = app.add_subcommand("run", "Single run (fixed alpha, or best alpha on the grid)");
  add_common(run_cmd);
  CLI::App* scan_cmd = app.add_subcommand("scan", "One CSV row per value of the chosen axis");
  add_common(scan_cmd);
  scan_cmd->add_option("--axis", axis, "Scan axis")->required()->check(CLI::IsMember({"alpha", "loss", "blocksize"}));
  scan_cmd->add_option("--values", values_text, "Comma-separated axis values")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfig;
  }

  try {
    RunConfig cfg = config_path.empty() ? RunConfig{} : parse_run_config(read_file(config_path));
    for (const auto& [key, value] : overrides) apply_config_value(cfg, key, value);
    cfg.validate();
    if (print_config) std::cerr << run_config_to_json(cfg) << '\n';
    if (*run_cmd) return run_single(cfg);
    return run_scan(cfg, axis, parse_values(values_text));
  } catch (const Error& e) {
    std::cerr << "renyikey: error: " << e.what() << '\n';
    if (e.kind() == ErrorKind::Config || e.kind() == ErrorKind::InvalidArgument) return kConfig;
    return e.kind() == ErrorKind::Infeasible ? kInfeasible : kSolverFailure;
  } catch (const std::exception& e) {
    std::cerr << "renyikey: error: " << e.what() << '\n';
    return kSolverFailure;
  }
}
