#pragma once

// Dense Hermitian matrix-function kernels: eigendecomposition, support-restricted
// fractional powers, pinching, Schatten norms and the Frechet-derivative
// integral used by the Renyi gradient.

#include <string_view>
#include <vector>

#include "renyikey/types.hpp"

namespace renyikey {

/// Relative Hermiticity tolerance: max|M - M^dagger| <= tol * max|M|.
inline constexpr double kHermitianTol = 1e-12;
/// Eigenvalues below this fraction of the largest one are treated as zero.
inline constexpr double kSupportCutRel = 1e-12;
/// Relative gap under which two eigenvalues use the divided-difference limit.
inline constexpr double kDegeneracyTol = 1e-9;

struct EigenSystem {
  RVector values;   // ascending
  CMatrix vectors;  // columns are orthonormal eigenvectors

  int dim() const { return static_cast<int>(values.size()); }
  CMatrix reconstruct() const;
};

/// Largest |M - M^dagger| entry relative to the largest |M| entry (0 for M = 0).
double hermiticity_defect(const CMatrix& m);
bool is_hermitian(const CMatrix& m, double tol = kHermitianTol);
/// Throws Error{NotHermitian} naming `what` when the check fails.
void require_hermitian(const CMatrix& m, std::string_view what, double tol = kHermitianTol);
/// (M + M^dagger) / 2
CMatrix hermitian_part(const CMatrix& m);

EigenSystem eig_hermitian(const HermitianMatrix& m);

/// Support threshold for a spectrum: kSupportCutRel * max(largest eigenvalue, 0).
double support_cut(const RVector& eigenvalues);

/// V diag(lambda_i^p) V^dagger on the support; sub-cut eigenvalues map to zero.
CMatrix matrix_power(const EigenSystem& es, double p);
CMatrix matrix_power(const HermitianMatrix& m, double p);

/// Tr(M^p) summed over the support, p > 0.
double schatten_norm_pow(const EigenSystem& es, double p);
double schatten_norm_pow(const HermitianMatrix& m, double p);

/// Integral over t in [0, inf) of (B + t)^-1 A (B + t)^-1 t^mu dt, B > 0, mu in (0, 1).
///
/// Evaluated in B's eigenbasis: entry (i, j) of V^dagger A V is scaled by
/// (pi / sin(pi mu)) (b_i^mu - b_j^mu) / (b_i - b_j), using mu b^(mu-1) when the
/// two eigenvalues are within kDegeneracyTol of each other. A need not be Hermitian.
CMatrix frechet_integral(const CMatrix& a, const EigenSystem& b, double mu);
CMatrix frechet_integral(const CMatrix& a, const HermitianMatrix& b, double mu);

/// Rank-one projective dephasing on the leading tensor factor R of R (x) rest.
///
/// The projectors are |z_i><z_i| (x) I_rest for an orthonormal basis {z_i} of R.
class PinchingMap {
 public:
  /// Standard (computational) basis on a register of dimension `register_dim`.
  PinchingMap(int register_dim, int rest_dim);
  /// Projectors |v><v| for each column v of `basis`; rejects families that are not
  /// orthonormal and complete on R.
  PinchingMap(const CMatrix& basis, int rest_dim);

  int register_dim() const { return static_cast<int>(basis_.cols()); }
  int rest_dim() const { return rest_dim_; }
  int dim() const { return register_dim() * rest_dim_; }
  const CMatrix& basis() const { return basis_; }
  /// Full-space projector Z_i (x) I_rest.
  CMatrix projector(int i) const;

  HermitianMatrix apply(const CMatrix& m) const;

 private:
  CMatrix basis_;
  int rest_dim_;
  bool standard_;
};

HermitianMatrix pinch(const CMatrix& m, const PinchingMap& z);

/// Kronecker product of two dense complex matrices.
CMatrix kron(const CMatrix& a, const CMatrix& b);

/// Tr(A B) for dense matrices without forming the product.
Complex trace_product(const CMatrix& a, const CMatrix& b);

}  // namespace renyikey
