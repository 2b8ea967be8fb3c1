#pragma once

// Seeded random operators shared by the unit and acceptance tests.

#include <algorithm>
#include <cmath>
#include <random>

#include <boost/math/quadrature/exp_sinh.hpp>

#include <Eigen/QR>

#include "renyikey/objective.hpp"
#include "renyikey/protocol.hpp"

namespace renyikey::testing {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  double normal() { return normal_(gen_); }
  double uniform(double lo = 0.0, double hi = 1.0) { return std::uniform_real_distribution<double>(lo, hi)(gen_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(gen_); }

  CMatrix gaussian(int rows, int cols) {
    CMatrix m(rows, cols);
    for (int j = 0; j < cols; ++j)
      for (int i = 0; i < rows; ++i) m(i, j) = Complex(normal(), normal());
    return m;
  }

  HermitianMatrix hermitian(int d) {
    const CMatrix g = gaussian(d, d);
    return (g + g.adjoint()) / 2.0;
  }

  /// Full-rank PSD matrix with trace 1 (Ginibre ensemble with a floor).
  CMatrix density(int d, int rank = -1) {
    const CMatrix g = gaussian(d, rank < 0 ? d : rank);
    CMatrix rho = g * g.adjoint();
    if (rank < 0) rho += 1e-3 * rho.trace().real() / d * CMatrix::Identity(d, d);
    return rho / rho.trace().real();
  }

  /// Full-rank state: equal mixture of density(d) and I/d, so the spectrum stays above 1/(2d).
  CMatrix interior_density(int d) { return 0.5 * density(d) + 0.5 / d * CMatrix::Identity(d, d); }

  /// Diagonal density matrix with random spectrum.
  CMatrix diagonal_density(int d) {
    RVector p(d);
    for (int i = 0; i < d; ++i) p(i) = uniform(0.05, 1.0);
    p /= p.sum();
    return p.cast<Complex>().asDiagonal();
  }

  CMatrix unitary(int d) {
    Eigen::HouseholderQR<CMatrix> qr(gaussian(d, d));
    return qr.householderQ() * CMatrix::Identity(d, d);
  }

  /// CPTP map C^in -> C^out with `kraus` operators, from a random isometry.
  CpMap channel(int in, int out, int kraus) {
    kraus = std::max(kraus, (in + out - 1) / out);  // an isometry needs out * kraus >= in
    Eigen::HouseholderQR<CMatrix> qr(gaussian(out * kraus, in));
    const CMatrix iso = qr.householderQ() * CMatrix::Identity(out * kraus, in);
    std::vector<CMatrix> ops;
    for (int k = 0; k < kraus; ++k) ops.push_back(iso.block(k * out, 0, out, in));
    return CpMap(std::move(ops), in, out);
  }

  std::mt19937_64& engine() { return gen_; }

 private:
  std::mt19937_64 gen_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

/// Random objective on C^d: a CPTP map into a key qubit (x) C^d, pinched on the key.
inline PerturbedObjective random_objective(Rng& rng, int d, double beta, double eps = kDefaultPerturbation) {
  return PerturbedObjective(rng.channel(d, 2 * d, 2), PinchingMap(2, d), RenyiParams::from_beta(beta), eps);
}

/// Classical Renyi divergence of two nonnegative vectors, normalized by sum(p).
inline double classical_renyi(const RVector& p, const RVector& q, double beta) {
  double s = 0.0;
  for (int i = 0; i < p.size(); ++i) s += std::pow(p(i), beta) * std::pow(q(i), 1.0 - beta);
  return std::log2(s / p.sum()) / (beta - 1.0);
}

// The defining integral, entry by entry, with exp-sinh quadrature on [0, inf).
inline CMatrix frechet_quadrature(const CMatrix& a, const HermitianMatrix& b, double mu) {
  const int d = static_cast<int>(b.rows());
  boost::math::quadrature::exp_sinh<double> integrator;
  CMatrix out(d, d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      auto part = [&](double t, bool imag) {
        const CMatrix inv = (b + t * CMatrix::Identity(d, d)).inverse();
        const Complex v = (inv * a * inv)(i, j) * std::pow(t, mu);
        return imag ? v.imag() : v.real();
      };
      out(i, j) = Complex(integrator.integrate([&](double t) { return part(t, false); }, 1e-13),
                          integrator.integrate([&](double t) { return part(t, true); }, 1e-13));
    }
  }
  return out;
}

}  // namespace renyikey::testing
