#pragma once

// Dense primal-dual interior-point solver for small semidefinite programs in the
// standard form
//
//   min  sum_b <C_b, X_b> + c_lp . x      s.t.  sum_b <A_ib, X_b> + a_i . x = b_i,
//                                              X_b PSD (real symmetric), x >= 0
//
//   max  b . y                           s.t.  C_b - sum_i y_i A_ib = Z_b PSD,
//                                              c_lp - A_lp^T y = z >= 0.
//
// Search directions use the HKM scaling with a Mehrotra predictor-corrector step.

#include <string>
#include <vector>

#include "renyikey/types.hpp"

namespace renyikey::sdp {

struct Row {
  /// One matrix per PSD block; a 0x0 matrix stands for a zero coefficient.
  std::vector<RMatrix> psd;
  /// Coefficients on the nonnegative variables; empty means all zero.
  RVector lp;
  double rhs = 0.0;
};

struct Problem {
  std::vector<int> psd_dims;
  int lp_dim = 0;
  std::vector<RMatrix> c_psd;
  RVector c_lp;
  std::vector<Row> rows;

  int num_rows() const { return static_cast<int>(rows.size()); }
  /// Throws Error{DimensionMismatch} on inconsistent shapes.
  void validate() const;
};

struct Settings {
  int max_iters = 120;
  double tol_gap = 1e-11;
  double tol_feas = 1e-11;
  double step_fraction = 0.98;
};

enum class Status {
  Optimal,
  NearOptimal,
  PrimalInfeasible,
  DualInfeasible,
  MaxIterations,
  NumericalFailure,
};

const char* to_string(Status s) noexcept;

struct Solution {
  Status status = Status::NumericalFailure;
  std::vector<RMatrix> x_psd;
  RVector x_lp;
  RVector y;
  std::vector<RMatrix> z_psd;
  RVector z_lp;
  double primal_objective = 0.0;
  double dual_objective = 0.0;
  /// ||b - A(X)|| / (1 + ||b||)
  double primal_residual = 0.0;
  /// ||C - A^*(y) - Z|| / (1 + ||C||)
  double dual_residual = 0.0;
  double relative_gap = 0.0;
  int iterations = 0;

  bool usable() const { return status == Status::Optimal || status == Status::NearOptimal; }
};

Solution solve(const Problem& problem, const Settings& settings = {});

}  // namespace renyikey::sdp
