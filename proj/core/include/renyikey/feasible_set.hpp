#pragma once

// Feasible set of density matrices: equality constraints Tr(Gamma_i rho) = gamma_i,
// unit trace, and parameter-estimation statistics within an l1 ball
//   || Phi(rho) - F ||_1 <= mu,  || F - F_bar ||_1 <= t,
// plus the linear programs over it that drive Frank-Wolfe and the dual bound.

#include <optional>
#include <vector>

#include "renyikey/protocol.hpp"
#include "renyikey/sdp.hpp"

namespace renyikey {

/// Dual point for min_{sigma in S} Tr(sigma G), evaluated in the full space.
struct DualCertificate {
  RVector y;  // one entry per equality constraint (trace row first)
  RVector z;  // one entry per parameter-estimation observable
  double a = 0.0;
  /// Multiple c of I - V V^dagger added to the slack. That projector is a combination
  /// of the equality observables, so this equals shifting y by -c times its coefficients.
  double face_shift = 0.0;
  /// gamma . y + F_bar . z - a (mu + t) - residual.
  double value = 0.0;
  /// max(0, -lambda_min(G - sum y_i Gamma_i - sum z_j Gamma~_j + c (I - V V^dagger))),
  /// bounded through the Schur complement on the support when c > 0.
  double residual = 0.0;
};

struct LinearMinimum {
  CMatrix argmin;       // minimizer sigma* in S
  double primal = 0.0;  // Tr(sigma* G)
  DualCertificate dual;
  sdp::Solution solver;
};

class FeasibleSet {
 public:
  /// `support`, when given, is an isometry V (dim x k) whose range contains the
  /// support of every element of the set; the linear programs are then solved over
  /// V omega V^dagger. `reference`, when given, must satisfy all constraints to 1e-8.
  FeasibleSet(int dim, std::vector<EqualityObservable> equalities, std::vector<CMatrix> pe_observables, RVector target,
              double mu_ball, double t_ball, std::optional<CMatrix> support = std::nullopt,
              std::optional<CMatrix> reference = std::nullopt);

  /// Constraints of a protocol instance with its ideal statistics as the target.
  /// With `reduce`, the variable is restricted to supp(rho_A) (x) B.
  static FeasibleSet from_instance(const ProtocolInstance& inst, double mu_ball, double t_ball = 0.0,
                                   bool reduce = true);

  int dim() const { return dim_; }
  const std::vector<EqualityObservable>& equalities() const { return equalities_; }
  const std::vector<CMatrix>& pe_observables() const { return pe_observables_; }
  const RVector& target() const { return target_; }
  double mu_ball() const { return mu_ball_; }
  double t_ball() const { return t_ball_; }
  /// mu + t: the l1 radius around F_bar that the two balls collapse to.
  double radius() const { return mu_ball_ + t_ball_; }
  int reduced_dim() const { return static_cast<int>(support_.cols()); }
  const CMatrix& support() const { return support_; }

  struct Residual {
    double equality = 0.0;        // max |Tr(Gamma_i rho) - gamma_i|, trace row included
    double statistics = 0.0;      // max(0, ||Phi(rho) - F_bar||_1 - (mu + t))
    double min_eigenvalue = 0.0;  // lambda_min(rho)
    double hermiticity = 0.0;
    double worst(double psd_tol = 0.0) const;
  };
  Residual residual(const CMatrix& rho) const;
  bool contains(const CMatrix& rho, double tol = 1e-8) const;

  /// min Tr(sigma G) over the set, with a full-space dual certificate.
  LinearMinimum minimize_linear(const HermitianMatrix& g, const sdp::Settings& settings = {}) const;

  /// Feasible point with the largest smallest eigenvalue on the support.
  CMatrix most_interior_point(const sdp::Settings& settings = {}) const;

  /// Certified lower bound of min Tr(sigma G) from any dual point (y, z).
  DualCertificate certify(const HermitianMatrix& g, const RVector& y, const RVector& z, double face_shift = 0.0) const;

 private:
  struct Reduced {
    std::vector<int> kept_equalities;
    std::vector<RMatrix> eq_blocks;  // embedded V^dagger Gamma_i V / 2 for kept rows
    std::vector<RMatrix> pe_blocks;
    std::vector<double> eq_traces;   // Tr(V^dagger Gamma_i V) for kept rows
    std::vector<double> pe_traces;
  };

  sdp::Problem build_problem(const std::vector<RMatrix>& c_psd, bool interior) const;
  RMatrix embed(const CMatrix& full) const;
  CMatrix lift(const RMatrix& y) const;
  void prepare();
  /// Lower bound on lambda_min of a dual slack operator (exact without a face).
  double slack_lower_bound(const CMatrix& slack, double face_shift) const;

  int dim_;
  std::vector<EqualityObservable> equalities_;
  std::vector<CMatrix> pe_observables_;
  RVector target_;
  double mu_ball_;
  double t_ball_;
  CMatrix support_;
  // Coefficients of I - V V^dagger in the equality observables, if it lies in their span.
  std::optional<RVector> face_witness_;
  double face_witness_value_ = 0.0;
  CMatrix complement_;  // orthonormal basis of range(I - V V^dagger)
  Reduced reduced_;
};

}  // namespace renyikey
