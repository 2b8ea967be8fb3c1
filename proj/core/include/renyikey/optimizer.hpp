#pragma once

// Two-step minimization of the Renyi objective over a feasible set: Frank-Wolfe
// with exact line search, then a linearization bound certified by a dual point.

#include <functional>
#include <string>
#include <vector>

#include "renyikey/feasible_set.hpp"
#include "renyikey/objective.hpp"

namespace renyikey {

struct FWConfig {
  double gap_tol = 1e-6;
  int max_iters = 300;
  double linesearch_tol = 1e-12;
  /// Allow steps away from the worst active vertex.
  bool away_steps = true;
  sdp::Settings solver;

  void validate() const;
};

struct FWIteration {
  int index = 0;
  double value = 0.0;      // f(rho_i)
  double gap = 0.0;        // Tr(Delta rho grad f(rho_i)), <= 0
  double step = 0.0;       // lambda taken (0 on the stopping iteration)
  bool away = false;       // step moved away from an active vertex
  double feasibility = 0.0;
  std::string solver_status;
  int solver_iterations = 0;
};

struct FWResult {
  CMatrix rho;
  double value = 0.0;
  double final_gap = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<FWIteration> log;
};

/// Feasible starting point: the element of S with the largest smallest eigenvalue.
DensityOperator initial_point(const FeasibleSet& s, const sdp::Settings& settings = {});

/// Delta rho = argmin_{sigma in S} Tr(sigma grad) - rho; zero when grad = 0.
HermitianMatrix fw_direction(const CMatrix& rho, const HermitianMatrix& grad, const FeasibleSet& s,
                             const sdp::Settings& settings = {});

/// Exact line search on [0, 1] for a convex function along a segment, given its
/// directional derivative phi'(lambda). Brackets the sign change of phi' with
/// Illinois regula falsi (bisection when it stalls) and returns the largest point
/// known to have phi' <= 0, so phi(lambda) <= phi(0).
double line_search(const std::function<double(double)>& derivative, double tol = 1e-12, int max_iters = 40);
double line_search(const CMatrix& rho, const HermitianMatrix& delta, const PerturbedObjective& obj,
                   double tol = 1e-12, int max_iters = 40);

/// Frank-Wolfe minimization of f_beta over S from `start` (initial_point when empty).
FWResult frank_wolfe(const PerturbedObjective& obj, const FeasibleSet& s, const FWConfig& cfg = {},
                     const CMatrix& start = CMatrix());

/// Generic Frank-Wolfe for a convex differentiable function over S. `evaluate`
/// returns the value and writes the gradient when asked.
using ValueGradient = std::function<double(const CMatrix&, HermitianMatrix*)>;
FWResult frank_wolfe(const ValueGradient& f, const FeasibleSet& s, const FWConfig& cfg, const CMatrix& start);

struct CertifiedBound {
  double value = 0.0;            // certified lower bound on min_S f
  double objective = 0.0;        // f(rho_hat)
  double linear_primal = 0.0;    // min_S Tr(sigma grad f(rho_hat)) from the primal solution
  double linear_dual = 0.0;      // certified dual value of the same problem
  DualCertificate dual;
  double dual_feasibility_residual = 0.0;
  double duality_gap = 0.0;      // linear_primal - linear_dual
  bool certified = false;
  std::string solver_status;
};

/// f(rho_hat) - Tr(rho_hat grad) + max dual of min_{sigma in S} Tr(sigma grad).
CertifiedBound step2_lower_bound(const CMatrix& rho_hat, const PerturbedObjective& obj, const FeasibleSet& s,
                                 const sdp::Settings& settings = {});
CertifiedBound step2_lower_bound(const CMatrix& rho_hat, const ValueGradient& f, const FeasibleSet& s,
                                 const sdp::Settings& settings = {});

}  // namespace renyikey
