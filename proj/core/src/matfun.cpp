#include "renyikey/matfun.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace renyikey {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "invalid_argument";
    case ErrorKind::DimensionMismatch: return "dimension_mismatch";
    case ErrorKind::NotHermitian: return "not_hermitian";
    case ErrorKind::NotPositive: return "not_positive";
    case ErrorKind::SupportViolation: return "support_violation";
    case ErrorKind::Infeasible: return "infeasible";
    case ErrorKind::SolverFailure: return "solver_failure";
    case ErrorKind::Config: return "config";
  }
  return "unknown";
}

CMatrix EigenSystem::reconstruct() const {
  return vectors * values.cast<Complex>().asDiagonal() * vectors.adjoint();
}

double hermiticity_defect(const CMatrix& m) {
  if (m.rows() != m.cols()) return std::numeric_limits<double>::infinity();
  if (m.size() == 0) return 0.0;
  const double scale = m.cwiseAbs().maxCoeff();
  if (scale == 0.0) return 0.0;
  return (m - m.adjoint()).cwiseAbs().maxCoeff() / scale;
}

bool is_hermitian(const CMatrix& m, double tol) { return hermiticity_defect(m) <= tol; }

void require_hermitian(const CMatrix& m, std::string_view what, double tol) {
  if (m.rows() != m.cols()) {
    std::ostringstream os;
    os << what << ": expected a square matrix, got " << m.rows() << "x" << m.cols();
    throw Error(ErrorKind::DimensionMismatch, os.str());
  }
  const double defect = hermiticity_defect(m);
  if (defect > tol) {
    std::ostringstream os;
    os << what << ": not Hermitian (relative defect " << defect << " > " << tol << ")";
    throw Error(ErrorKind::NotHermitian, os.str());
  }
}

CMatrix hermitian_part(const CMatrix& m) { return 0.5 * (m + m.adjoint()); }

EigenSystem eig_hermitian(const HermitianMatrix& m) {
  require_hermitian(m, "eig_hermitian");
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(hermitian_part(m));
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorKind::SolverFailure, "eig_hermitian: eigensolver did not converge");
  }
  // Eigen returns eigenvalues in ascending order already.
  return EigenSystem{solver.eigenvalues(), solver.eigenvectors()};
}

double support_cut(const RVector& eigenvalues) {
  if (eigenvalues.size() == 0) return 0.0;
  return kSupportCutRel * std::max(eigenvalues.maxCoeff(), 0.0);
}

namespace {

void require_psd_spectrum(const RVector& values, double cut, const char* what) {
  if (values.size() == 0) return;
  if (values.minCoeff() < -std::max(cut, 1e-300)) {
    std::ostringstream os;
    os << what << ": matrix is not positive semidefinite (smallest eigenvalue "
       << values.minCoeff() << ", support cut " << cut << ")";
    throw Error(ErrorKind::NotPositive, os.str());
  }
}

}  // namespace

CMatrix matrix_power(const EigenSystem& es, double p) {
  const double cut = support_cut(es.values);
  require_psd_spectrum(es.values, cut, "matrix_power");
  RVector mapped(es.dim());
  for (int i = 0; i < es.dim(); ++i) {
    const double v = es.values(i);
    mapped(i) = (v > cut) ? std::pow(v, p) : 0.0;
  }
  return es.vectors * mapped.cast<Complex>().asDiagonal() * es.vectors.adjoint();
}

CMatrix matrix_power(const HermitianMatrix& m, double p) { return matrix_power(eig_hermitian(m), p); }

double schatten_norm_pow(const EigenSystem& es, double p) {
  if (!(p > 0.0)) throw Error(ErrorKind::InvalidArgument, "schatten_norm_pow: p must be positive");
  const double cut = support_cut(es.values);
  require_psd_spectrum(es.values, cut, "schatten_norm_pow");
  double sum = 0.0;
  for (int i = 0; i < es.dim(); ++i) {
    if (es.values(i) > cut) sum += std::pow(es.values(i), p);
  }
  return sum;
}

double schatten_norm_pow(const HermitianMatrix& m, double p) { return schatten_norm_pow(eig_hermitian(m), p); }

CMatrix frechet_integral(const CMatrix& a, const EigenSystem& b, double mu) {
  if (!(mu > 0.0 && mu < 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "frechet_integral: mu must lie in (0, 1)");
  }
  const int d = b.dim();
  if (a.rows() != d || a.cols() != d) {
    throw Error(ErrorKind::DimensionMismatch, "frechet_integral: operand dimensions differ");
  }
  const double cut = support_cut(b.values);
  if (d > 0 && !(b.values(0) > cut)) {
    std::ostringstream os;
    os << "frechet_integral: B must be strictly positive definite (smallest eigenvalue "
       << b.values(0) << "); was the depolarizing perturbation applied?";
    throw Error(ErrorKind::NotPositive, os.str());
  }

  // L(mu)^-1 = pi / sin(pi mu)
  const double inv_l = std::numbers::pi / std::sin(std::numbers::pi * mu);
  RVector pw(d);
  for (int i = 0; i < d; ++i) pw(i) = std::pow(b.values(i), mu);

  CMatrix t = b.vectors.adjoint() * a * b.vectors;
  for (int j = 0; j < d; ++j) {
    for (int i = 0; i < d; ++i) {
      const double bi = b.values(i);
      const double bj = b.values(j);
      double dd;
      if (std::abs(bi - bj) <= kDegeneracyTol * std::max(bi, bj)) {
        const double mid = 0.5 * (bi + bj);
        dd = mu * std::pow(mid, mu - 1.0);
      } else {
        dd = (pw(i) - pw(j)) / (bi - bj);
      }
      t(i, j) *= inv_l * dd;
    }
  }
  return b.vectors * t * b.vectors.adjoint();
}

CMatrix frechet_integral(const CMatrix& a, const HermitianMatrix& b, double mu) {
  return frechet_integral(a, eig_hermitian(b), mu);
}

PinchingMap::PinchingMap(int register_dim, int rest_dim)
    : basis_(CMatrix::Identity(register_dim, register_dim)), rest_dim_(rest_dim), standard_(true) {
  if (register_dim < 1 || rest_dim < 1) {
    throw Error(ErrorKind::InvalidArgument, "PinchingMap: dimensions must be positive");
  }
}

PinchingMap::PinchingMap(const CMatrix& basis, int rest_dim) : basis_(basis), rest_dim_(rest_dim), standard_(false) {
  if (rest_dim < 1 || basis.cols() < 1) {
    throw Error(ErrorKind::InvalidArgument, "PinchingMap: dimensions must be positive");
  }
  if (basis.rows() != basis.cols()) {
    std::ostringstream os;
    os << "PinchingMap: " << basis.cols() << " rank-one projectors cannot be complete on a register of dimension "
       << basis.rows();
    throw Error(ErrorKind::InvalidArgument, os.str());
  }
  const CMatrix gram = basis.adjoint() * basis;
  const double defect = (gram - CMatrix::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff();
  if (defect > 1e-10) {
    std::ostringstream os;
    os << "PinchingMap: projector family is not orthonormal (Gram defect " << defect << ")";
    throw Error(ErrorKind::InvalidArgument, os.str());
  }
  standard_ = (basis - CMatrix::Identity(basis.rows(), basis.cols())).cwiseAbs().maxCoeff() == 0.0;
}

CMatrix PinchingMap::projector(int i) const {
  const CVector v = basis_.col(i);
  return kron(v * v.adjoint(), CMatrix::Identity(rest_dim_, rest_dim_));
}

HermitianMatrix PinchingMap::apply(const CMatrix& m) const {
  const int n = dim();
  if (m.rows() != n || m.cols() != n) {
    std::ostringstream os;
    os << "pinch: operand is " << m.rows() << "x" << m.cols() << ", map acts on dimension " << n;
    throw Error(ErrorKind::DimensionMismatch, os.str());
  }
  const int r = register_dim();
  const int k = rest_dim_;
  if (standard_) {
    CMatrix out = CMatrix::Zero(n, n);
    for (int i = 0; i < r; ++i) out.block(i * k, i * k, k, k) = m.block(i * k, i * k, k, k);
    return out;
  }
  // Rotate R into the projector basis, keep the diagonal blocks, rotate back.
  const CMatrix u = kron(basis_, CMatrix::Identity(k, k));
  const CMatrix rotated = u.adjoint() * m * u;
  CMatrix kept = CMatrix::Zero(n, n);
  for (int i = 0; i < r; ++i) kept.block(i * k, i * k, k, k) = rotated.block(i * k, i * k, k, k);
  return u * kept * u.adjoint();
}

HermitianMatrix pinch(const CMatrix& m, const PinchingMap& z) { return z.apply(m); }

CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

Complex trace_product(const CMatrix& a, const CMatrix& b) {
  // Tr(AB) = sum_ij A_ij B_ji
  return (a.array() * b.transpose().array()).sum();
}

}  // namespace renyikey
