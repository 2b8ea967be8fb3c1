#include "renyikey/sdp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace renyikey::sdp {

const char* to_string(Status s) noexcept {
  switch (s) {
    case Status::Optimal: return "optimal";
    case Status::NearOptimal: return "near_optimal";
    case Status::PrimalInfeasible: return "primal_infeasible";
    case Status::DualInfeasible: return "dual_infeasible";
    case Status::MaxIterations: return "max_iterations";
    case Status::NumericalFailure: return "numerical_failure";
  }
  return "unknown";
}

void Problem::validate() const {
  const auto nb = psd_dims.size();
  if (c_psd.size() != nb) throw Error(ErrorKind::DimensionMismatch, "sdp: objective has wrong number of PSD blocks");
  for (std::size_t b = 0; b < nb; ++b) {
    if (psd_dims[b] < 1) throw Error(ErrorKind::DimensionMismatch, "sdp: PSD block dimension must be positive");
    if (c_psd[b].rows() != psd_dims[b] || c_psd[b].cols() != psd_dims[b]) {
      throw Error(ErrorKind::DimensionMismatch, "sdp: objective block has wrong shape");
    }
  }
  if (c_lp.size() != lp_dim) throw Error(ErrorKind::DimensionMismatch, "sdp: LP objective has wrong length");
  for (const Row& r : rows) {
    if (r.psd.size() != nb) throw Error(ErrorKind::DimensionMismatch, "sdp: row has wrong number of PSD blocks");
    for (std::size_t b = 0; b < nb; ++b) {
      if (r.psd[b].size() == 0) continue;
      if (r.psd[b].rows() != psd_dims[b] || r.psd[b].cols() != psd_dims[b]) {
        throw Error(ErrorKind::DimensionMismatch, "sdp: row block has wrong shape");
      }
    }
    if (r.lp.size() != 0 && r.lp.size() != lp_dim) {
      throw Error(ErrorKind::DimensionMismatch, "sdp: row LP coefficients have wrong length");
    }
  }
}

namespace {

double inner(const RMatrix& a, const RMatrix& b) { return (a.array() * b.array()).sum(); }

RMatrix sym(const RMatrix& m) { return 0.5 * (m + m.transpose()); }

// Largest step t with X + t dX PSD (infinity when dX keeps X PSD for all t >= 0).
double max_step_psd(const RMatrix& x, const RMatrix& dx) {
  Eigen::LLT<RMatrix> llt(x);
  if (llt.info() != Eigen::Success) return 0.0;
  const RMatrix l_inv_dx = llt.matrixL().solve(dx);
  const RMatrix w = llt.matrixL().solve(l_inv_dx.transpose());
  Eigen::SelfAdjointEigenSolver<RMatrix> es(sym(w), Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues()(0);
  return lo >= 0.0 ? std::numeric_limits<double>::infinity() : -1.0 / lo;
}

double max_step_lp(const RVector& x, const RVector& dx) {
  double t = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (dx(i) < 0.0) t = std::min(t, -x(i) / dx(i));
  }
  return t;
}

struct Iterate {
  std::vector<RMatrix> x;
  RVector xl;
  RVector y;
  std::vector<RMatrix> z;
  RVector zl;
};

class Solver {
 public:
  Solver(const Problem& p, const Settings& s) : s_(s) {
    p.validate();
    m_ = p.num_rows();
    nb_ = static_cast<int>(p.psd_dims.size());
    nl_ = p.lp_dim;
    dims_ = p.psd_dims;
    n_total_ = nl_;
    for (int d : dims_) n_total_ += d;

    // Row scaling to unit norm and objective scaling to norm <= 1.
    row_scale_ = RVector::Ones(m_);
    a_.assign(m_, std::vector<RMatrix>(nb_));
    a_lp_ = RMatrix::Zero(m_, nl_);
    b_ = RVector(m_);
    for (int i = 0; i < m_; ++i) {
      const Row& r = p.rows[i];
      double norm2 = 0.0;
      for (int b = 0; b < nb_; ++b) {
        if (r.psd[b].size() != 0) norm2 += r.psd[b].squaredNorm();
      }
      if (r.lp.size() != 0) norm2 += r.lp.squaredNorm();
      const double norm = std::sqrt(norm2);
      if (norm == 0.0) {
        std::ostringstream os;
        os << "sdp: constraint row " << i << " has no coefficients";
        throw Error(ErrorKind::InvalidArgument, os.str());
      }
      row_scale_(i) = 1.0 / norm;
      for (int b = 0; b < nb_; ++b) {
        if (r.psd[b].size() != 0 && r.psd[b].cwiseAbs().maxCoeff() > 0.0) a_[i][b] = sym(r.psd[b]) * row_scale_(i);
      }
      if (r.lp.size() != 0) a_lp_.row(i) = r.lp.transpose() * row_scale_(i);
      b_(i) = r.rhs * row_scale_(i);
    }
    double c_norm2 = p.c_lp.squaredNorm();
    for (const auto& c : p.c_psd) c_norm2 += c.squaredNorm();
    obj_scale_ = 1.0 / std::max(1.0, std::sqrt(c_norm2));
    c_.clear();
    for (const auto& c : p.c_psd) c_.push_back(sym(c) * obj_scale_);
    c_lp_ = p.c_lp * obj_scale_;
    b_norm_ = b_.norm();
    c_norm_ = std::sqrt(c_norm2) * obj_scale_;
  }

  Solution run() {
    Iterate it = initial_point();
    Solution best;
    double best_merit = std::numeric_limits<double>::infinity();
    int since_best = 0;
    Status final_status = Status::MaxIterations;

    for (int iter = 0; iter <= s_.max_iters; ++iter) {
      const Residuals r = residuals(it);
      const double merit = std::max({r.rel_gap, r.pinf, r.dinf});
      if (merit < best_merit * 0.999 || iter == 0) {
        if (merit < best_merit) {
          best_merit = merit;
          best = make_solution(it, r, iter);
        }
        since_best = 0;
      } else {
        ++since_best;
      }
      if (r.rel_gap <= s_.tol_gap && r.pinf <= s_.tol_feas && r.dinf <= s_.tol_feas) {
        final_status = Status::Optimal;
        break;
      }
      // Unbounded dual objective with (nearly) feasible dual: primal infeasible.
      if (r.dobj > 1e10 && r.dinf <= 1e-6) {
        final_status = Status::PrimalInfeasible;
        break;
      }
      if (r.pobj < -1e10 && r.pinf <= 1e-6) {
        final_status = Status::DualInfeasible;
        break;
      }
      if (since_best > 12 || iter == s_.max_iters) break;
      if (!step(it, r)) {
        final_status = Status::NumericalFailure;
        break;
      }
    }

    if (final_status == Status::PrimalInfeasible || final_status == Status::DualInfeasible) {
      best.status = final_status;
      return best;
    }
    if (best_merit <= std::max({s_.tol_gap, s_.tol_feas})) {
      best.status = Status::Optimal;
    } else if (best_merit <= 1e-6) {
      best.status = Status::NearOptimal;
    } else {
      best.status = final_status == Status::NumericalFailure ? Status::NumericalFailure : Status::MaxIterations;
    }
    return best;
  }

 private:
  struct Residuals {
    RVector rp;
    std::vector<RMatrix> rd;
    RVector rdl;
    double pobj = 0.0;
    double dobj = 0.0;
    double rel_gap = 0.0;
    double pinf = 0.0;
    double dinf = 0.0;
    double mu = 0.0;
  };

  Iterate initial_point() const {
    double max_ratio = 0.0;
    for (int i = 0; i < m_; ++i) max_ratio = std::max(max_ratio, (1.0 + std::abs(b_(i))) / 2.0);
    Iterate it;
    for (int b = 0; b < nb_; ++b) {
      const double n = dims_[b];
      const double xi = std::max({10.0, std::sqrt(n), n * max_ratio});
      const double eta = std::max({10.0, std::sqrt(n), 1.0, c_[b].norm()});
      it.x.push_back(RMatrix::Identity(dims_[b], dims_[b]) * xi);
      it.z.push_back(RMatrix::Identity(dims_[b], dims_[b]) * eta);
    }
    const double xi_lp = std::max(10.0, max_ratio * std::max(1, nl_));
    const double eta_lp = std::max(10.0, c_lp_.size() ? c_lp_.cwiseAbs().maxCoeff() : 0.0);
    it.xl = RVector::Constant(nl_, xi_lp);
    it.zl = RVector::Constant(nl_, eta_lp);
    it.y = RVector::Zero(m_);
    return it;
  }

  RVector apply_a(const std::vector<RMatrix>& x, const RVector& xl) const {
    RVector out = a_lp_ * xl;
    for (int i = 0; i < m_; ++i) {
      for (int b = 0; b < nb_; ++b) {
        if (a_[i][b].size() != 0) out(i) += inner(a_[i][b], x[b]);
      }
    }
    return out;
  }

  void apply_at(const RVector& y, std::vector<RMatrix>& out, RVector& outl) const {
    out.assign(nb_, RMatrix());
    for (int b = 0; b < nb_; ++b) out[b] = RMatrix::Zero(dims_[b], dims_[b]);
    for (int i = 0; i < m_; ++i) {
      for (int b = 0; b < nb_; ++b) {
        if (a_[i][b].size() != 0) out[b].noalias() += y(i) * a_[i][b];
      }
    }
    outl = a_lp_.transpose() * y;
  }

  Residuals residuals(const Iterate& it) const {
    Residuals r;
    r.rp = b_ - apply_a(it.x, it.xl);
    std::vector<RMatrix> aty;
    RVector atyl;
    apply_at(it.y, aty, atyl);
    r.rd.resize(nb_);
    double rd_norm2 = 0.0;
    double xz = it.xl.dot(it.zl);
    r.pobj = c_lp_.dot(it.xl);
    for (int b = 0; b < nb_; ++b) {
      r.rd[b] = c_[b] - aty[b] - it.z[b];
      rd_norm2 += r.rd[b].squaredNorm();
      xz += inner(it.x[b], it.z[b]);
      r.pobj += inner(c_[b], it.x[b]);
    }
    r.rdl = c_lp_ - atyl - it.zl;
    rd_norm2 += r.rdl.squaredNorm();
    r.dobj = b_.dot(it.y);
    r.mu = xz / n_total_;
    r.rel_gap = std::abs(r.pobj - r.dobj) / (1.0 + std::abs(r.pobj) + std::abs(r.dobj));
    r.pinf = r.rp.norm() / (1.0 + b_norm_);
    r.dinf = std::sqrt(rd_norm2) / (1.0 + c_norm_);
    return r;
  }

  struct Direction {
    std::vector<RMatrix> dx;
    RVector dxl;
    RVector dy;
    std::vector<RMatrix> dz;
    RVector dzl;
  };

  // T_b = Rc_b Z_b^-1 for the complementarity target; rcl likewise for the orthant.
  Direction solve_direction(const Iterate& it, const Residuals& r, const std::vector<RMatrix>& t, const RVector& rcl,
                            const Eigen::LDLT<RMatrix>& schur) const {
    RVector rhs = r.rp;
    for (int b = 0; b < nb_; ++b) {
      const RMatrix w = t[b] - it.x[b] * r.rd[b] * zinv_[b];
      for (int i = 0; i < m_; ++i) {
        if (a_[i][b].size() != 0) rhs(i) -= inner(a_[i][b], w);
      }
    }
    if (nl_ > 0) {
      const RVector wl = rcl.cwiseQuotient(it.zl) - it.xl.cwiseProduct(r.rdl).cwiseQuotient(it.zl);
      rhs -= a_lp_ * wl;
    }
    Direction d;
    d.dy = schur.solve(rhs);
    std::vector<RMatrix> aty;
    RVector atyl;
    apply_at(d.dy, aty, atyl);
    d.dz.resize(nb_);
    d.dx.resize(nb_);
    for (int b = 0; b < nb_; ++b) {
      d.dz[b] = r.rd[b] - aty[b];
      d.dx[b] = sym(t[b] - it.x[b] * d.dz[b] * zinv_[b]);
    }
    d.dzl = r.rdl - atyl;
    d.dxl = rcl.cwiseQuotient(it.zl) - it.xl.cwiseProduct(d.dzl).cwiseQuotient(it.zl);
    return d;
  }

  std::pair<double, double> step_lengths(const Iterate& it, const Direction& d) const {
    double ap = std::numeric_limits<double>::infinity();
    double ad = std::numeric_limits<double>::infinity();
    for (int b = 0; b < nb_; ++b) {
      ap = std::min(ap, max_step_psd(it.x[b], d.dx[b]));
      ad = std::min(ad, max_step_psd(it.z[b], d.dz[b]));
    }
    if (nl_ > 0) {
      ap = std::min(ap, max_step_lp(it.xl, d.dxl));
      ad = std::min(ad, max_step_lp(it.zl, d.dzl));
    }
    return {ap, ad};
  }

  bool step(Iterate& it, const Residuals& r) {
    zinv_.resize(nb_);
    for (int b = 0; b < nb_; ++b) {
      Eigen::LLT<RMatrix> llt(it.z[b]);
      if (llt.info() != Eigen::Success) return false;
      zinv_[b] = llt.solve(RMatrix::Identity(dims_[b], dims_[b]));
      zinv_[b] = sym(zinv_[b]);
    }

    // Schur complement M_ij = sum_b Tr(A_i X A_j Z^-1) + sum_k a_ik (x/z)_k a_jk.
    RMatrix schur = RMatrix::Zero(m_, m_);
    for (int b = 0; b < nb_; ++b) {
      for (int j = 0; j < m_; ++j) {
        if (a_[j][b].size() == 0) continue;
        const RMatrix w = it.x[b] * a_[j][b] * zinv_[b];
        for (int i = 0; i <= j; ++i) {
          if (a_[i][b].size() == 0) continue;
          schur(i, j) += inner(a_[i][b], w);
        }
      }
    }
    if (nl_ > 0) {
      const RVector ratio = it.xl.cwiseQuotient(it.zl);
      const RMatrix scaled = a_lp_ * ratio.asDiagonal();
      schur.triangularView<Eigen::Upper>() += scaled * a_lp_.transpose();
    }
    schur = schur.selfadjointView<Eigen::Upper>();
    if (m_ > 0) {
      const double diag_max = schur.diagonal().cwiseAbs().maxCoeff();
      schur.diagonal().array() += 1e-15 * std::max(diag_max, 1e-300);
    }
    Eigen::LDLT<RMatrix> ldlt(schur);
    if (ldlt.info() != Eigen::Success) return false;

    // Predictor.
    std::vector<RMatrix> t(nb_);
    for (int b = 0; b < nb_; ++b) t[b] = -it.x[b];
    RVector rcl = -it.xl.cwiseProduct(it.zl);
    const Direction aff = solve_direction(it, r, t, rcl, ldlt);
    auto [ap_aff, ad_aff] = step_lengths(it, aff);
    ap_aff = std::min(1.0, ap_aff);
    ad_aff = std::min(1.0, ad_aff);
    double mu_aff = 0.0;
    for (int b = 0; b < nb_; ++b) {
      mu_aff += inner(it.x[b] + ap_aff * aff.dx[b], it.z[b] + ad_aff * aff.dz[b]);
    }
    if (nl_ > 0) mu_aff += (it.xl + ap_aff * aff.dxl).dot(it.zl + ad_aff * aff.dzl);
    mu_aff /= n_total_;
    double sigma = r.mu > 0.0 ? std::pow(std::max(mu_aff, 0.0) / r.mu, 3.0) : 0.0;
    sigma = std::clamp(sigma, 0.0, 1.0);

    // Corrector.
    const double target = sigma * r.mu;
    for (int b = 0; b < nb_; ++b) {
      t[b] = target * zinv_[b] - it.x[b] - aff.dx[b] * aff.dz[b] * zinv_[b];
    }
    rcl = RVector::Constant(nl_, target) - it.xl.cwiseProduct(it.zl) - aff.dxl.cwiseProduct(aff.dzl);
    const Direction d = solve_direction(it, r, t, rcl, ldlt);
    auto [ap, ad] = step_lengths(it, d);
    ap = std::min(1.0, s_.step_fraction * ap);
    ad = std::min(1.0, s_.step_fraction * ad);
    if (!(ap > 1e-14) && !(ad > 1e-14)) return false;

    for (int b = 0; b < nb_; ++b) {
      it.x[b] = sym(it.x[b] + ap * d.dx[b]);
      it.z[b] = sym(it.z[b] + ad * d.dz[b]);
    }
    if (nl_ > 0) {
      it.xl += ap * d.dxl;
      it.zl += ad * d.dzl;
    }
    it.y += ad * d.dy;
    return true;
  }

  Solution make_solution(const Iterate& it, const Residuals& r, int iter) const {
    Solution s;
    s.x_psd = it.x;
    s.x_lp = it.xl;
    s.y = it.y.cwiseProduct(row_scale_) / obj_scale_;
    for (const auto& z : it.z) s.z_psd.push_back(z / obj_scale_);
    s.z_lp = it.zl / obj_scale_;
    s.primal_objective = r.pobj / obj_scale_;
    s.dual_objective = r.dobj / obj_scale_;
    s.primal_residual = r.pinf;
    s.dual_residual = r.dinf;
    s.relative_gap = r.rel_gap;
    s.iterations = iter;
    return s;
  }

  Settings s_;
  int m_ = 0;
  int nb_ = 0;
  int nl_ = 0;
  int n_total_ = 0;
  std::vector<int> dims_;
  std::vector<std::vector<RMatrix>> a_;
  RMatrix a_lp_;
  RVector b_;
  std::vector<RMatrix> c_;
  RVector c_lp_;
  RVector row_scale_;
  double obj_scale_ = 1.0;
  double b_norm_ = 0.0;
  double c_norm_ = 0.0;
  std::vector<RMatrix> zinv_;
};

}  // namespace

Solution solve(const Problem& problem, const Settings& settings) {
  Solver solver(problem, settings);
  return solver.run();
}

}  // namespace renyikey::sdp
