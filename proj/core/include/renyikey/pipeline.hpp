#pragma once

// End-to-end key-rate computation for one protocol instance: feasible set from the
// finite-size radius, Frank-Wolfe, certified step-2 bound, key length, alpha scan.

#include <functional>
#include <vector>

#include "renyikey/finitesize.hpp"
#include "renyikey/optimizer.hpp"

namespace renyikey {

struct PipelineOptions {
  FWConfig fw;
  double eps_perturb = kDefaultPerturbation;
  double t_ball = 0.0;
  /// Restrict the variable to supp(rho_A) (x) B.
  bool reduce = true;
  /// Start each alpha from the previous optimum during a scan.
  bool warm_start = true;
};

struct PointRun {
  KeyRateReport report;
  FWResult fw;
  CertifiedBound bound;
};

struct AlphaScan {
  double alpha_star = 0.0;
  KeyRateReport best;
  std::vector<KeyRateReport> points;
  bool all_zero = true;
};

/// Log-spaced grid in alpha - 1: alpha_k = 1 + (lo - 1) ((hi - 1)/(lo - 1))^(k/(n-1)).
std::vector<double> default_alpha_grid(int n = 25, double lo = 1.0005, double hi = 2.0);

class KeyRatePipeline {
 public:
  KeyRatePipeline(ProtocolInstance instance, FiniteSizeParams fp, SecurityParams sp, PipelineOptions opts = {});

  const ProtocolInstance& instance() const { return instance_; }
  const FiniteSizeParams& finite_size() const { return fp_; }
  const SecurityParams& security() const { return sp_; }
  const PipelineOptions& options() const { return opts_; }
  /// Parameter-estimation radius for the instance's statistics and m.
  double mu() const { return mu_; }
  const FeasibleSet& feasible_set() const { return set_; }

  /// Full pipeline at one alpha. Solver and feasibility errors are reported in the
  /// returned status rather than thrown.
  PointRun run(double alpha, const CMatrix& warm_start = CMatrix()) const;

  /// Runs every grid point and keeps the one with the largest key rate. `on_point`
  /// sees each point's full run, in grid order.
  AlphaScan optimize_alpha(const std::vector<double>& grid,
                           const std::function<void(const PointRun&)>& on_point = {}) const;

 private:
  ProtocolInstance instance_;
  FiniteSizeParams fp_;
  SecurityParams sp_;
  PipelineOptions opts_;
  double mu_;
  FeasibleSet set_;
};

AlphaScan optimize_alpha(const ProtocolInstance& instance, const FiniteSizeParams& fp, const SecurityParams& sp,
                         const std::vector<double>& grid, const PipelineOptions& opts = {});

/// Calls fn(i) for i in [0, n) on up to `workers` threads.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn);

}  // namespace renyikey
