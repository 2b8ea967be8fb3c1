#include "renyikey/pipeline.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

namespace renyikey {

namespace {

double radius_for(const ProtocolInstance& inst, const FiniteSizeParams& fp, const SecurityParams& sp) {
  fp.validate();
  sp.validate();
  return pe_radius(sp.eps_pe, static_cast<int>(inst.pe_observables.size()), static_cast<double>(fp.m()));
}

}  // namespace

std::vector<double> default_alpha_grid(int n, double lo, double hi) {
  if (n < 1) throw Error(ErrorKind::InvalidArgument, "alpha grid needs at least one point");
  if (!(lo > 1.0 && hi <= 2.0 && lo <= hi)) {
    throw Error(ErrorKind::InvalidArgument, "alpha grid bounds must satisfy 1 < lo <= hi <= 2");
  }
  std::vector<double> grid;
  if (n == 1) return {hi};
  const double a = std::log(lo - 1.0);
  const double b = std::log(hi - 1.0);
  for (int k = 0; k < n; ++k) grid.push_back(1.0 + std::exp(a + (b - a) * k / (n - 1)));
  grid.back() = hi;
  return grid;
}

KeyRatePipeline::KeyRatePipeline(ProtocolInstance instance, FiniteSizeParams fp, SecurityParams sp,
                                 PipelineOptions opts)
    : instance_(std::move(instance)), fp_(fp), sp_(sp), opts_(std::move(opts)), mu_(radius_for(instance_, fp_, sp_)),
      set_(FeasibleSet::from_instance(instance_, mu_, opts_.t_ball, opts_.reduce)) {
  opts_.fw.validate();
}

PointRun KeyRatePipeline::run(double alpha, const CMatrix& warm_start) const {
  PointRun out;
  const RenyiParams params = RenyiParams::from_alpha(alpha);
  const PerturbedObjective obj(instance_.gmap, instance_.zmap, params, opts_.eps_perturb);
  try {
    out.fw = frank_wolfe(obj, set_, opts_.fw, warm_start);
    out.bound = step2_lower_bound(out.fw.rho, obj, set_, opts_.fw.solver);
    out.report = key_length(out.bound.value, fp_, sp_, alpha, instance_.hzy, instance_.sift_probability);
    out.report.fw_value = out.fw.value;
    out.report.sdp_gap = out.bound.duality_gap;
    out.report.dual_residual = out.bound.dual_feasibility_residual;
    out.report.certified = out.bound.certified;
    out.report.perturbation_shift = out.fw.value - obj.with_epsilon(opts_.eps_perturb / 10.0).value(out.fw.rho);
    out.report.status = out.fw.converged ? "converged" : "not_converged";
  } catch (const Error& e) {
    out.report = key_length(0.0, fp_, sp_, alpha, instance_.hzy, instance_.sift_probability);
    out.report.min_f = 0.0;
    out.report.key_length = 0.0;
    out.report.key_rate = 0.0;
    out.report.status = e.kind() == ErrorKind::Infeasible ? "infeasible" : "solver_failure";
    out.report.message = e.what();
  }
  out.report.depolarization = instance_.depolarization;
  out.report.loss = instance_.loss;
  out.report.mu_ball = mu_;
  out.report.fw_iters = out.fw.iterations;
  out.report.fw_gap = out.fw.final_gap;
  out.report.fw_converged = out.fw.converged;
  return out;
}

AlphaScan KeyRatePipeline::optimize_alpha(const std::vector<double>& grid,
                                          const std::function<void(const PointRun&)>& on_point) const {
  if (grid.empty()) throw Error(ErrorKind::InvalidArgument, "optimize_alpha: empty alpha grid");
  AlphaScan scan;
  CMatrix warm;
  for (double alpha : grid) {
    PointRun p = run(alpha, opts_.warm_start ? warm : CMatrix());
    if (opts_.warm_start && p.fw.rho.size() != 0) warm = p.fw.rho;
    if (on_point) on_point(p);
    const bool better = scan.points.empty() || p.report.key_rate > scan.best.key_rate;
    if (p.report.key_rate > 0.0) scan.all_zero = false;
    if (better) {
      scan.best = p.report;
      scan.alpha_star = alpha;
    }
    scan.points.push_back(std::move(p.report));
  }
  return scan;
}

AlphaScan optimize_alpha(const ProtocolInstance& instance, const FiniteSizeParams& fp, const SecurityParams& sp,
                         const std::vector<double>& grid, const PipelineOptions& opts) {
  return KeyRatePipeline(instance, fp, sp, opts).optimize_alpha(grid);
}

void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn) {
  const auto threads = static_cast<std::size_t>(std::max(1, workers));
  if (threads == 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < std::min(threads, n); ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace renyikey
