#include "renyikey/objective.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace renyikey {

namespace {

constexpr double kSupportOverlapTol = 1e-9;

void require_valid_beta(double beta) {
  if (!(beta > 0.0) || beta == 1.0 || !std::isfinite(beta)) {
    throw Error(ErrorKind::InvalidArgument, "Renyi order beta must lie in (0, 1) or (1, inf)");
  }
}

}  // namespace

RenyiParams RenyiParams::from_alpha(double alpha) {
  if (!(alpha > 1.0 && alpha <= 2.0)) {
    std::ostringstream os;
    os << "alpha = " << alpha << " outside (1, 2]";
    throw Error(ErrorKind::InvalidArgument, os.str());
  }
  RenyiParams p;
  p.alpha = alpha;
  p.beta = 1.0 / alpha;
  p.gamma = 1.0 / (2.0 - 1.0 / alpha);
  p.mu = (1.0 - p.beta) / (2.0 * p.beta);
  p.L = std::sin(std::numbers::pi * p.mu) / std::numbers::pi;
  return p;
}

RenyiParams RenyiParams::from_beta(double beta) {
  if (!(beta >= 0.5 && beta < 1.0)) {
    std::ostringstream os;
    os << "beta = " << beta << " outside [0.5, 1)";
    throw Error(ErrorKind::InvalidArgument, os.str());
  }
  RenyiParams p = from_alpha(1.0 / beta);
  p.beta = beta;  // keep the caller's value exactly
  p.mu = (1.0 - beta) / (2.0 * beta);
  p.L = std::sin(std::numbers::pi * p.mu) / std::numbers::pi;
  return p;
}

double q_beta(const HermitianMatrix& rho, const HermitianMatrix& sigma, double beta) {
  require_valid_beta(beta);
  require_hermitian(rho, "q_beta: rho");
  if (rho.rows() != sigma.rows() || rho.cols() != sigma.cols()) {
    throw Error(ErrorKind::DimensionMismatch, "q_beta: rho and sigma differ in dimension");
  }
  const EigenSystem es = eig_hermitian(sigma);
  const double cut = support_cut(es.values);
  // Portion of rho outside supp(sigma).
  double overlap = 0.0;
  for (int i = 0; i < es.dim(); ++i) {
    if (es.values(i) <= cut) {
      const CVector v = es.vectors.col(i);
      overlap += (v.adjoint() * rho * v)(0, 0).real();
    }
  }
  if (overlap > kSupportOverlapTol) {
    std::ostringstream os;
    os << "renyi divergence: supp(rho) is not contained in supp(sigma) (overlap " << overlap << ")";
    throw Error(ErrorKind::SupportViolation, os.str());
  }
  const double mu = (1.0 - beta) / (2.0 * beta);
  const CMatrix s_mu = matrix_power(es, mu);
  const CMatrix xi = hermitian_part(s_mu * rho * s_mu);
  return schatten_norm_pow(xi, beta);
}

double q_beta(const DensityOperator& rho, const DensityOperator& sigma, double beta) {
  return q_beta(rho.matrix(), sigma.matrix(), beta);
}

double renyi_divergence(const HermitianMatrix& rho, const HermitianMatrix& sigma, double beta) {
  const double tr = rho.trace().real();
  if (!(tr > 0.0)) throw Error(ErrorKind::InvalidArgument, "renyi divergence: Tr rho must be positive");
  const double q = q_beta(rho, sigma, beta);
  return std::log2(q / tr) / (beta - 1.0);
}

double renyi_divergence(const DensityOperator& rho, const DensityOperator& sigma, double beta) {
  return renyi_divergence(rho.matrix(), sigma.matrix(), beta);
}

CpMap perturb_map(const CpMap& g, double epsilon) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "perturb_map: epsilon must lie in (0, 1)");
  }
  const int d = g.out_dim();
  std::vector<CMatrix> kraus;
  const double keep = std::sqrt(1.0 - epsilon);
  for (const auto& k : g.kraus()) kraus.push_back(keep * k);
  // eps Tr(X rho) I/d with X = sum K^dagger K = sum_m w_m |e_m><e_m|
  const EigenSystem es = eig_hermitian(g.adjoint_identity());
  const double cut = support_cut(es.values);
  for (int m = 0; m < es.dim(); ++m) {
    if (es.values(m) <= cut) continue;
    const double scale = std::sqrt(epsilon * es.values(m) / d);
    const CMatrix bra = es.vectors.col(m).adjoint();
    for (int k = 0; k < d; ++k) {
      CMatrix op = CMatrix::Zero(d, g.in_dim());
      op.row(k) = scale * bra;
      kraus.push_back(std::move(op));
    }
  }
  return CpMap(std::move(kraus), g.in_dim(), d);
}

PerturbedObjective::PerturbedObjective(CpMap gmap, PinchingMap zmap, RenyiParams params, double epsilon)
    : gmap_(std::move(gmap)), zmap_(std::move(zmap)), params_(params), epsilon_(epsilon) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "PerturbedObjective: epsilon must lie in (0, 1)");
  }
  if (zmap_.dim() != gmap_.out_dim()) {
    throw Error(ErrorKind::DimensionMismatch, "PerturbedObjective: pinching acts on a different space than G's output");
  }
  if (!(params_.beta >= 0.5 && params_.beta < 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "PerturbedObjective: beta must lie in [0.5, 1)");
  }
}

PerturbedObjective PerturbedObjective::with_params(const RenyiParams& params) const {
  return PerturbedObjective(gmap_, zmap_, params, epsilon_);
}

PerturbedObjective PerturbedObjective::with_epsilon(double epsilon) const {
  return PerturbedObjective(gmap_, zmap_, params_, epsilon);
}

CMatrix PerturbedObjective::channel(const CMatrix& x) const {
  const CMatrix gx = gmap_.apply(x);
  const int d = gmap_.out_dim();
  CMatrix out = (1.0 - epsilon_) * gx;
  out.diagonal().array() += epsilon_ * gx.trace() / static_cast<double>(d);
  return out;
}

CMatrix PerturbedObjective::channel_adjoint(const CMatrix& y) const {
  const int d = gmap_.out_dim();
  return (1.0 - epsilon_) * gmap_.adjoint(y) + (epsilon_ * y.trace() / static_cast<double>(d)) * gmap_.adjoint_identity();
}

PerturbedObjective::Evaluation PerturbedObjective::evaluate(const CMatrix& rho, bool with_gradient) const {
  if (rho.rows() != dim() || rho.cols() != dim()) {
    throw Error(ErrorKind::DimensionMismatch, "objective: state dimension differs from the map's input");
  }
  const double beta = params_.beta;
  const double mu = params_.mu;

  const CMatrix g = hermitian_part(channel(hermitian_part(rho)));
  const double tr = g.trace().real();
  if (!(tr > 0.0)) throw Error(ErrorKind::InvalidArgument, "objective: Tr G(rho) must be positive");

  const CMatrix sigma = zmap_.apply(g);
  const EigenSystem es_sigma = eig_hermitian(sigma);
  if (!(es_sigma.values(0) > support_cut(es_sigma.values))) {
    std::ostringstream os;
    os << "objective: Z(G_eps(rho)) is not strictly positive (smallest eigenvalue " << es_sigma.values(0)
       << "); check epsilon_perturb";
    throw Error(ErrorKind::NotPositive, os.str());
  }
  const CMatrix s_mu = matrix_power(es_sigma, mu);
  const CMatrix xi = hermitian_part(s_mu * g * s_mu);
  const EigenSystem es_xi = eig_hermitian(xi);
  const double q = schatten_norm_pow(es_xi, beta);
  const double divergence = std::log2(q / tr) / (beta - 1.0);

  Evaluation ev;
  ev.trace = tr;
  ev.q = q;
  ev.divergence = divergence;
  ev.value = tr * divergence;
  if (!with_gradient) return ev;

  const CMatrix xi_pow = matrix_power(es_xi, beta - 1.0);
  const double pre = beta * params_.L;
  const CMatrix chi1 = zmap_.apply(pre * frechet_integral(CMatrix(g * s_mu * xi_pow), es_sigma, mu));
  const CMatrix chi2 = beta * s_mu * xi_pow * s_mu;
  const CMatrix chi3 = zmap_.apply(pre * frechet_integral(CMatrix(xi_pow * s_mu * g), es_sigma, mu));

  const int d_out = gmap_.out_dim();
  CMatrix inner = (chi1 + chi2 + chi3) / q;
  inner.diagonal().array() -= 1.0 / tr;
  const CMatrix grad_d = channel_adjoint(inner) / ((beta - 1.0) * std::numbers::ln2);
  const CMatrix grad = channel_adjoint(CMatrix::Identity(d_out, d_out)) * divergence + tr * grad_d;
  ev.gradient = hermitian_part(grad);
  return ev;
}

double objective_f(const DensityOperator& rho, const PerturbedObjective& obj) { return obj.value(rho.matrix()); }

HermitianMatrix gradient_f(const DensityOperator& rho, const PerturbedObjective& obj) {
  return obj.gradient(rho.matrix());
}

double finite_diff_gradient(const std::function<double(const CMatrix&)>& f, const CMatrix& rho, const CMatrix& tau,
                            double step) {
  if (!(step > 0.0)) throw Error(ErrorKind::InvalidArgument, "finite_diff_gradient: step must be positive");
  const CMatrix dir = tau - rho;
  return (f(rho + step * dir) - f(rho - step * dir)) / (2.0 * step);
}

double finite_diff_gradient(const DensityOperator& rho, const DensityOperator& tau, const PerturbedObjective& obj,
                            double step) {
  return finite_diff_gradient([&](const CMatrix& x) { return obj.value(x); }, rho.matrix(), tau.matrix(), step);
}

}  // namespace renyikey
