#pragma once

// Sandwiched Renyi divergence, the key-rate objective
//   f(rho) = Tr G(rho) * D_beta(G(rho) || Z(G(rho)))
// with G replaced by its depolarized version, and its analytic gradient.

#include <functional>

#include "renyikey/matfun.hpp"
#include "renyikey/protocol.hpp"

namespace renyikey {

inline constexpr double kDefaultPerturbation = 1e-8;

/// Parameters derived from the Renyi order alpha in (1, 2]:
/// beta = 1/alpha, gamma = (2 - 1/alpha)^-1, mu = (1 - beta) / (2 beta), L = sin(pi mu) / pi.
struct RenyiParams {
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
  double mu = 0.0;
  double L = 0.0;

  static RenyiParams from_alpha(double alpha);
  /// beta in [0.5, 1).
  static RenyiParams from_beta(double beta);
};

/// D_beta(rho || sigma) = log2(Tr[(sigma^mu rho sigma^mu)^beta] / Tr rho) / (beta - 1),
/// mu = (1 - beta) / (2 beta); rho and sigma may be subnormalized.
double renyi_divergence(const HermitianMatrix& rho, const HermitianMatrix& sigma, double beta);
double renyi_divergence(const DensityOperator& rho, const DensityOperator& sigma, double beta);

/// Q_beta(rho || sigma) = Tr[(sigma^mu rho sigma^mu)^beta].
double q_beta(const HermitianMatrix& rho, const HermitianMatrix& sigma, double beta);
double q_beta(const DensityOperator& rho, const DensityOperator& sigma, double beta);

/// Kraus form of rho -> (1 - eps) G(rho) + eps Tr(G(rho)) I / d_out.
CpMap perturb_map(const CpMap& g, double epsilon);

class PerturbedObjective {
 public:
  PerturbedObjective(CpMap gmap, PinchingMap zmap, RenyiParams params, double epsilon = kDefaultPerturbation);

  const CpMap& base_map() const { return gmap_; }
  const PinchingMap& zmap() const { return zmap_; }
  const RenyiParams& params() const { return params_; }
  double epsilon() const { return epsilon_; }
  int dim() const { return gmap_.in_dim(); }

  PerturbedObjective with_params(const RenyiParams& params) const;
  PerturbedObjective with_epsilon(double epsilon) const;

  /// Explicit Kraus representation of the perturbed map.
  CpMap perturbed_map() const { return perturb_map(gmap_, epsilon_); }
  /// G_eps(x), evaluated without expanding the Kraus list.
  CMatrix channel(const CMatrix& x) const;
  /// G_eps^dagger(y).
  CMatrix channel_adjoint(const CMatrix& y) const;

  struct Evaluation {
    double value = 0.0;
    double divergence = 0.0;
    double trace = 0.0;  // Tr G_eps(rho)
    double q = 0.0;      // Q_beta
    HermitianMatrix gradient;
  };

  /// Objective value (and optionally gradient) at a Hermitian operand. Throws
  /// Error{NotPositive} when Z(G_eps(rho)) is not strictly positive.
  Evaluation evaluate(const CMatrix& rho, bool with_gradient = true) const;
  double value(const CMatrix& rho) const { return evaluate(rho, false).value; }
  HermitianMatrix gradient(const CMatrix& rho) const { return evaluate(rho, true).gradient; }

 private:
  CpMap gmap_;
  PinchingMap zmap_;
  RenyiParams params_;
  double epsilon_;
};

double objective_f(const DensityOperator& rho, const PerturbedObjective& obj);
HermitianMatrix gradient_f(const DensityOperator& rho, const PerturbedObjective& obj);

/// Central difference [f(rho_{+h}) - f(rho_{-h})] / (2h) along rho_x = (1 - x) rho + x tau.
double finite_diff_gradient(const std::function<double(const CMatrix&)>& f, const CMatrix& rho, const CMatrix& tau,
                            double step);
double finite_diff_gradient(const DensityOperator& rho, const DensityOperator& tau, const PerturbedObjective& obj,
                            double step);

}  // namespace renyikey
