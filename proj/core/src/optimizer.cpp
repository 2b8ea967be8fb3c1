#include "renyikey/optimizer.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace renyikey {

namespace {

constexpr double kCertifiedResidual = 1e-8;

double directional(const HermitianMatrix& grad, const HermitianMatrix& delta) {
  return trace_product(grad, delta).real();
}

ValueGradient wrap(const PerturbedObjective& obj) {
  return [&obj](const CMatrix& rho, HermitianMatrix* grad) {
    PerturbedObjective::Evaluation ev = obj.evaluate(rho, grad != nullptr);
    if (grad) *grad = std::move(ev.gradient);
    return ev.value;
  };
}

}  // namespace

void FWConfig::validate() const {
  if (!(gap_tol > 0.0)) throw Error(ErrorKind::InvalidArgument, "FWConfig: gap_tol must be positive");
  if (max_iters < 1) throw Error(ErrorKind::InvalidArgument, "FWConfig: max_iters must be at least 1");
  if (!(linesearch_tol > 0.0)) throw Error(ErrorKind::InvalidArgument, "FWConfig: linesearch_tol must be positive");
}

DensityOperator initial_point(const FeasibleSet& s, const sdp::Settings& settings) {
  CMatrix rho = s.most_interior_point(settings);
  // Clip round-off so the result is a valid density operator.
  const EigenSystem es = eig_hermitian(rho);
  if (es.values(0) < 0.0) {
    RVector v = es.values.cwiseMax(0.0);
    rho = es.vectors * v.cast<Complex>().asDiagonal() * es.vectors.adjoint();
  }
  return DensityOperator(hermitian_part(rho));
}

HermitianMatrix fw_direction(const CMatrix& rho, const HermitianMatrix& grad, const FeasibleSet& s,
                             const sdp::Settings& settings) {
  if (grad.cwiseAbs().maxCoeff() == 0.0) return CMatrix::Zero(rho.rows(), rho.cols());
  const LinearMinimum lm = s.minimize_linear(grad, settings);
  return hermitian_part(lm.argmin - rho);
}

double line_search(const std::function<double(double)>& derivative, double tol, int max_iters) {
  const double d_hi0 = derivative(1.0);
  if (d_hi0 <= 0.0) return 1.0;
  const double d_lo0 = derivative(0.0);
  if (d_lo0 >= 0.0) return 0.0;
  // Bracket [lo, hi] with phi'(lo) < 0 < phi'(hi); Illinois-modified regula falsi,
  // falling back to bisection when the secant point stalls near an end.
  double lo = 0.0;
  double hi = 1.0;
  double d_lo = d_lo0;
  double d_hi = d_hi0;
  int side = 0;
  for (int i = 0; i < max_iters && hi - lo > tol; ++i) {
    double x = lo - d_lo * (hi - lo) / (d_hi - d_lo);
    const double margin = 0.01 * (hi - lo);
    if (!(x > lo + margin && x < hi - margin)) x = 0.5 * (lo + hi);
    const double d = derivative(x);
    if (d <= 0.0) {
      lo = x;
      d_lo = d;
      if (side == -1) d_hi *= 0.5;
      side = -1;
      if (d == 0.0 || -d <= 1e-13 * std::abs(d_lo0)) break;
    } else {
      hi = x;
      d_hi = d;
      if (side == 1) d_lo *= 0.5;
      side = 1;
    }
  }
  return lo;
}

double line_search(const CMatrix& rho, const HermitianMatrix& delta, const PerturbedObjective& obj, double tol,
                   int max_iters) {
  return line_search([&](double lam) { return directional(obj.gradient(rho + lam * delta), delta); }, tol,
                     max_iters);
}

FWResult frank_wolfe(const ValueGradient& f, const FeasibleSet& s, const FWConfig& cfg, const CMatrix& start) {
  cfg.validate();
  FWResult out;
  out.rho = start.size() == 0 ? initial_point(s, cfg.solver).matrix() : hermitian_part(start);
  if (out.rho.rows() != s.dim()) throw Error(ErrorKind::DimensionMismatch, "frank_wolfe: start has the wrong dimension");

  // rho = sum_k weight_k atom_k, needed for away steps.
  std::vector<CMatrix> atoms{out.rho};
  std::vector<double> weights{1.0};

  HermitianMatrix grad;
  out.value = f(out.rho, &grad);
  for (int it = 0; it < cfg.max_iters; ++it) {
    FWIteration rec;
    rec.index = it;
    rec.value = out.value;
    rec.feasibility = s.residual(out.rho).worst();

    CMatrix vertex;
    if (grad.cwiseAbs().maxCoeff() == 0.0) {
      vertex = out.rho;
      rec.solver_status = "skipped";
    } else {
      LinearMinimum lm = s.minimize_linear(grad, cfg.solver);
      vertex = std::move(lm.argmin);
      rec.solver_status = sdp::to_string(lm.solver.status);
      rec.solver_iterations = lm.solver.iterations;
    }
    const HermitianMatrix fw_dir = hermitian_part(vertex - out.rho);
    rec.gap = directional(grad, fw_dir);
    out.final_gap = rec.gap;
    out.iterations = it + 1;
    if (rec.gap > -cfg.gap_tol) {
      out.converged = true;
      out.log.push_back(rec);
      break;
    }

    HermitianMatrix delta = fw_dir;
    double max_step = 1.0;
    std::size_t away_index = atoms.size();
    if (cfg.away_steps && atoms.size() > 1) {
      double worst = -std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < atoms.size(); ++k) {
        const double v = trace_product(grad, atoms[k]).real();
        if (v > worst) {
          worst = v;
          away_index = k;
        }
      }
      const HermitianMatrix away_dir = hermitian_part(out.rho - atoms[away_index]);
      if (directional(grad, away_dir) < rec.gap && weights[away_index] < 1.0) {
        delta = away_dir;
        max_step = weights[away_index] / (1.0 - weights[away_index]);
        rec.away = true;
      }
    }

    const HermitianMatrix scaled = max_step * delta;
    const double lam = max_step * line_search(
                                      [&](double l) {
                                        HermitianMatrix g;
                                        f(out.rho + l * scaled, &g);
                                        return directional(g, scaled);
                                      },
                                      cfg.linesearch_tol);
    rec.step = lam;
    out.log.push_back(rec);
    if (lam <= 0.0) {
      out.converged = false;
      break;
    }
    CMatrix next = hermitian_part(out.rho + lam * delta);
    HermitianMatrix next_grad;
    const double next_value = f(next, &next_grad);
    if (next_value > out.value) {
      out.converged = false;
      break;
    }

    if (rec.away) {
      for (double& w : weights) w *= 1.0 + lam;
      weights[away_index] -= lam;
      if (weights[away_index] <= 1e-14 * (1.0 + lam) || lam >= max_step) {
        atoms.erase(atoms.begin() + static_cast<std::ptrdiff_t>(away_index));
        weights.erase(weights.begin() + static_cast<std::ptrdiff_t>(away_index));
      }
    } else if (lam >= 1.0) {
      atoms.assign(1, vertex);
      weights.assign(1, 1.0);
    } else {
      for (double& w : weights) w *= 1.0 - lam;
      std::size_t k = 0;
      while (k < atoms.size() && (atoms[k] - vertex).norm() > 1e-10) ++k;
      if (k == atoms.size()) {
        atoms.push_back(vertex);
        weights.push_back(0.0);
      }
      weights[k] += lam;
    }
    out.rho = std::move(next);
    out.value = next_value;
    grad = std::move(next_grad);
  }
  return out;
}

FWResult frank_wolfe(const PerturbedObjective& obj, const FeasibleSet& s, const FWConfig& cfg, const CMatrix& start) {
  return frank_wolfe(wrap(obj), s, cfg, start);
}

CertifiedBound step2_lower_bound(const CMatrix& rho_hat, const ValueGradient& f, const FeasibleSet& s,
                                 const sdp::Settings& settings) {
  CertifiedBound b;
  HermitianMatrix grad;
  b.objective = f(rho_hat, &grad);
  const double offset = b.objective - directional(grad, hermitian_part(rho_hat));
  const LinearMinimum lm = s.minimize_linear(grad, settings);
  b.linear_primal = lm.primal;
  b.linear_dual = lm.dual.value;
  b.dual = lm.dual;
  b.dual_feasibility_residual = lm.dual.residual;
  b.duality_gap = lm.primal - lm.dual.value;
  b.value = offset + lm.dual.value;
  b.solver_status = sdp::to_string(lm.solver.status);
  b.certified = b.dual_feasibility_residual <= kCertifiedResidual && std::isfinite(b.value);
  return b;
}

CertifiedBound step2_lower_bound(const CMatrix& rho_hat, const PerturbedObjective& obj, const FeasibleSet& s,
                                 const sdp::Settings& settings) {
  return step2_lower_bound(rho_hat, wrap(obj), s, settings);
}

}  // namespace renyikey
