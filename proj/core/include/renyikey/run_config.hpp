#pragma once

// Flat JSON run configuration with strict key checking.

#include <optional>
#include <string>
#include <vector>

#include "renyikey/pipeline.hpp"

namespace renyikey {

struct RunConfig {
  std::string protocol = "bb84-pm";
  double depol_p = 0.01;
  double loss = 0.0;
  std::int64_t n_total = 100000;
  double p_gen = 0.9;
  double eps_pa = 1e-10;
  double eps_ev = 1e-10;
  double eps_pe = 1e-10;
  double f_ec = 1.16;
  /// Fixed Renyi order; empty means "scan" over the alpha grid.
  std::optional<double> alpha;
  /// Explicit grid; when empty the log-spaced grid below is used.
  std::vector<double> alpha_grid;
  int alpha_grid_points = 25;
  double alpha_grid_min = 1.0005;
  double alpha_grid_max = 2.0;
  double eps_perturb = kDefaultPerturbation;
  double gap_tol = 1e-6;
  int max_iters = 300;
  double t_ball = 0.0;
  std::string statistics = "full";  // "full" | "coarse"
  double alice_z_prob = 0.5;
  double bob_z_prob = 0.5;
  bool warm_start = true;
  std::string output_path;   // CSV; empty or "-" writes to stdout
  std::string run_log_path;  // JSON lines; empty disables

  void validate() const;

  FiniteSizeParams finite_size() const;
  SecurityParams security() const;
  PipelineOptions pipeline_options() const;
  Bb84Options protocol_options() const;
  std::vector<double> grid() const;
  ProtocolInstance instance() const;
};

/// Keys accepted in a config document, in canonical order.
const std::vector<std::string>& run_config_keys();

/// Parses a JSON object; unknown keys, wrong types and out-of-range values throw
/// Error{Config}.
RunConfig parse_run_config(const std::string& json_text);

/// Sets one key from its textual form ("0.5", "scan", "[1.1, 1.2]", "true").
void apply_config_value(RunConfig& cfg, const std::string& key, const std::string& value);

std::string run_config_to_json(const RunConfig& cfg, int indent = 2);

}  // namespace renyikey
