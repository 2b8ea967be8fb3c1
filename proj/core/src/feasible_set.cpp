#include "renyikey/feasible_set.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace renyikey {

namespace {

constexpr double kReferenceTol = 1e-8;
constexpr double kRankTol = 1e-10;

// [[Re M, -Im M], [Im M, Re M]] / 2, so that <embed(M), Y> = Tr(M X) for the
// Hermitian X encoded by Y.
RMatrix real_embedding_half(const CMatrix& m) {
  const Eigen::Index k = m.rows();
  RMatrix out(2 * k, 2 * k);
  out.topLeftCorner(k, k) = m.real();
  out.bottomRightCorner(k, k) = m.real();
  out.topRightCorner(k, k) = -m.imag();
  out.bottomLeftCorner(k, k) = m.imag();
  return 0.5 * out;
}

CMatrix complex_from_embedding(const RMatrix& y) {
  const Eigen::Index k = y.rows() / 2;
  const RMatrix re = 0.5 * (y.topLeftCorner(k, k) + y.bottomRightCorner(k, k));
  const RMatrix im = 0.5 * (y.bottomLeftCorner(k, k) - y.topRightCorner(k, k));
  CMatrix out(k, k);
  out.real() = re;
  out.imag() = im;
  return hermitian_part(out);
}

double lambda_min(const CMatrix& m) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian_part(m), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

}  // namespace

double FeasibleSet::Residual::worst(double psd_tol) const {
  return std::max({equality, statistics, std::max(0.0, -min_eigenvalue - psd_tol), hermiticity});
}

FeasibleSet::FeasibleSet(int dim, std::vector<EqualityObservable> equalities, std::vector<CMatrix> pe_observables,
                         RVector target, double mu_ball, double t_ball, std::optional<CMatrix> support,
                         std::optional<CMatrix> reference)
    : dim_(dim), pe_observables_(std::move(pe_observables)), target_(std::move(target)), mu_ball_(mu_ball),
      t_ball_(t_ball) {
  if (dim < 1) throw Error(ErrorKind::InvalidArgument, "FeasibleSet: dimension must be positive");
  if (!(mu_ball >= 0.0) || !(t_ball >= 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "FeasibleSet: mu and t must be non-negative");
  }
  if (target_.size() != static_cast<Eigen::Index>(pe_observables_.size())) {
    throw Error(ErrorKind::DimensionMismatch, "FeasibleSet: target length differs from the number of observables");
  }
  if (!pe_observables_.empty()) {
    if (target_.minCoeff() < -1e-12 || std::abs(target_.sum() - 1.0) > 1e-9) {
      throw Error(ErrorKind::InvalidArgument, "FeasibleSet: target statistics must be a probability vector");
    }
  }
  equalities_.push_back({CMatrix::Identity(dim, dim), 1.0});
  for (auto& e : equalities) {
    if (e.observable.rows() != dim || e.observable.cols() != dim) {
      throw Error(ErrorKind::DimensionMismatch, "FeasibleSet: equality observable has the wrong dimension");
    }
    require_hermitian(e.observable, "FeasibleSet: equality observable", 1e-10);
    equalities_.push_back(std::move(e));
  }
  for (const auto& g : pe_observables_) {
    if (g.rows() != dim || g.cols() != dim) {
      throw Error(ErrorKind::DimensionMismatch, "FeasibleSet: statistics observable has the wrong dimension");
    }
    require_hermitian(g, "FeasibleSet: statistics observable", 1e-10);
  }

  if (support) {
    const CMatrix& v = *support;
    if (v.rows() != dim || v.cols() < 1 || v.cols() > dim) {
      throw Error(ErrorKind::DimensionMismatch, "FeasibleSet: support isometry has the wrong shape");
    }
    if ((v.adjoint() * v - CMatrix::Identity(v.cols(), v.cols())).norm() > 1e-10) {
      throw Error(ErrorKind::InvalidArgument, "FeasibleSet: support map is not an isometry");
    }
    support_ = v;
  } else {
    support_ = CMatrix::Identity(dim, dim);
  }

  if (reference) {
    const Residual r = residual(*reference);
    if (r.worst(kReferenceTol) > kReferenceTol) {
      std::ostringstream os;
      os << "FeasibleSet: reference state violates the constraints (equality " << r.equality << ", statistics "
         << r.statistics << ", lambda_min " << r.min_eigenvalue << ")";
      throw Error(ErrorKind::Infeasible, os.str());
    }
    const CMatrix outside = *reference - support_ * (support_.adjoint() * *reference * support_) * support_.adjoint();
    if (outside.norm() > kReferenceTol) {
      throw Error(ErrorKind::InvalidArgument, "FeasibleSet: reference state is not supported on the given isometry");
    }
  }
  prepare();
}

FeasibleSet FeasibleSet::from_instance(const ProtocolInstance& inst, double mu_ball, double t_ball, bool reduce) {
  const int da = inst.dims.alice;
  const int db = inst.dims.bob;
  std::vector<EqualityObservable> eq = inst.equality_observables;
  std::optional<CMatrix> support;
  if (reduce) {
    const EigenSystem es = eig_hermitian(inst.alice_marginal);
    const double cut = std::max(support_cut(es.values), 1e-12);
    std::vector<int> cols;
    for (int i = 0; i < es.dim(); ++i) {
      if (es.values(i) > cut) cols.push_back(i);
    }
    if (static_cast<int>(cols.size()) < da) {
      CMatrix u(da, static_cast<Eigen::Index>(cols.size()));
      for (std::size_t c = 0; c < cols.size(); ++c) u.col(static_cast<Eigen::Index>(c)) = es.vectors.col(cols[c]);
      support = kron(u, CMatrix::Identity(db, db));
      // Same constraints written in the eigenbasis of rho_A, so that the projector onto
      // its kernel is an exact combination with value exactly zero.
      RVector lambda = es.values;
      for (int i = 0; i < es.dim(); ++i) {
        if (lambda(i) <= cut) lambda(i) = 0.0;
      }
      eq.clear();
      for (const CMatrix& e : hermitian_basis(da)) {
        double value = 0.0;
        for (int i = 0; i < da; ++i) value += e(i, i).real() * lambda(i);
        eq.push_back({kron(es.vectors * e * es.vectors.adjoint(), CMatrix::Identity(db, db)), value});
      }
    }
  }
  return FeasibleSet(inst.dims.input(), std::move(eq), inst.pe_observables, inst.ideal_frequencies, mu_ball, t_ball,
                     support, inst.rho_ideal.matrix());
}

RMatrix FeasibleSet::embed(const CMatrix& full) const {
  return real_embedding_half(support_.adjoint() * full * support_);
}

CMatrix FeasibleSet::lift(const RMatrix& y) const {
  return hermitian_part(support_ * complex_from_embedding(y) * support_.adjoint());
}

void FeasibleSet::prepare() {
  const int n_eq = static_cast<int>(equalities_.size());
  std::vector<RMatrix> blocks;
  blocks.reserve(n_eq);
  for (const auto& e : equalities_) blocks.push_back(embed(e.observable));

  // Drop equality rows that are linearly dependent on the face.
  const Eigen::Index len = blocks.front().size();
  RMatrix cols(len, n_eq);
  for (int i = 0; i < n_eq; ++i) cols.col(i) = Eigen::Map<const RVector>(blocks[i].data(), len);
  Eigen::ColPivHouseholderQR<RMatrix> qr(cols);
  qr.setThreshold(kRankTol);
  const auto rank = qr.rank();
  std::vector<int> kept;
  for (Eigen::Index r = 0; r < rank; ++r) kept.push_back(qr.colsPermutation().indices()(r));
  std::sort(kept.begin(), kept.end());

  reduced_ = Reduced{};
  reduced_.kept_equalities = kept;
  for (int i : kept) {
    reduced_.eq_blocks.push_back(blocks[i]);
    reduced_.eq_traces.push_back((support_.adjoint() * equalities_[i].observable * support_).trace().real());
  }
  for (const auto& g : pe_observables_) {
    reduced_.pe_blocks.push_back(embed(g));
    reduced_.pe_traces.push_back((support_.adjoint() * g * support_).trace().real());
  }

  // Express I - V V^dagger in the equality observables so reduced duals can be lifted.
  face_witness_.reset();
  complement_.resize(dim_, 0);
  if (reduced_dim() < dim_) {
    const CMatrix w = CMatrix::Identity(dim_, dim_) - support_ * support_.adjoint();
    const EigenSystem ew = eig_hermitian(w);
    complement_ = ew.vectors.rightCols(dim_ - reduced_dim());
    // Prefer rows with value exactly zero: the shift then has exactly zero weight.
    std::vector<int> zero_rows;
    std::vector<int> all_rows;
    for (int i = 0; i < n_eq; ++i) {
      all_rows.push_back(i);
      if (equalities_[i].value == 0.0) zero_rows.push_back(i);
    }
    for (const std::vector<int>* rows : {&zero_rows, &all_rows}) {
      const auto n = static_cast<Eigen::Index>(rows->size());
      if (n == 0) continue;
      RMatrix gram(n, n);
      RVector rhs(n);
      for (Eigen::Index a = 0; a < n; ++a) {
        const CMatrix& ga = equalities_[(*rows)[a]].observable;
        rhs(a) = trace_product(ga, w).real();
        for (Eigen::Index b = 0; b <= a; ++b) {
          gram(a, b) = gram(b, a) = trace_product(ga, equalities_[(*rows)[b]].observable).real();
        }
      }
      const RVector sub = gram.completeOrthogonalDecomposition().solve(rhs);
      RVector c = RVector::Zero(n_eq);
      for (Eigen::Index a = 0; a < n; ++a) c((*rows)[a]) = std::abs(sub(a)) < 1e-12 ? 0.0 : sub(a);
      CMatrix recon = CMatrix::Zero(dim_, dim_);
      double value = 0.0;
      for (int i = 0; i < n_eq; ++i) {
        if (c(i) == 0.0) continue;
        recon += c(i) * equalities_[i].observable;
        value += c(i) * equalities_[i].value;
      }
      if ((recon - w).norm() > 1e-9 * w.norm()) continue;
      if (std::abs(value) > kReferenceTol) {
        throw Error(ErrorKind::InvalidArgument, "FeasibleSet: support isometry excludes feasible states");
      }
      face_witness_ = c;
      face_witness_value_ = value;
      break;
    }
  }
}

FeasibleSet::Residual FeasibleSet::residual(const CMatrix& rho) const {
  if (rho.rows() != dim_ || rho.cols() != dim_) {
    throw Error(ErrorKind::DimensionMismatch, "FeasibleSet: state has the wrong dimension");
  }
  Residual r;
  r.hermiticity = (rho - rho.adjoint()).cwiseAbs().maxCoeff();
  const CMatrix h = hermitian_part(rho);
  for (const auto& e : equalities_) {
    r.equality = std::max(r.equality, std::abs(trace_product(e.observable, h).real() - e.value));
  }
  double l1 = 0.0;
  for (std::size_t j = 0; j < pe_observables_.size(); ++j) {
    l1 += std::abs(trace_product(pe_observables_[j], h).real() - target_(static_cast<Eigen::Index>(j)));
  }
  r.statistics = std::max(0.0, l1 - radius());
  r.min_eigenvalue = lambda_min(h);
  return r;
}

bool FeasibleSet::contains(const CMatrix& rho, double tol) const { return residual(rho).worst(tol) <= tol; }

sdp::Problem FeasibleSet::build_problem(const std::vector<RMatrix>& c_psd, bool interior) const {
  const int n_pe = static_cast<int>(pe_observables_.size());
  const int n_eq = static_cast<int>(reduced_.kept_equalities.size());
  // LP variables: A_j, B_j, s1_j, s2_j, slack of the radius row, [interior margin].
  const int lp_dim = 4 * n_pe + 1 + (interior ? 1 : 0);
  const int idx_a = 0;
  const int idx_b = n_pe;
  const int idx_s1 = 2 * n_pe;
  const int idx_s2 = 3 * n_pe;
  const int idx_slack = 4 * n_pe;
  const int idx_margin = 4 * n_pe + 1;

  sdp::Problem p;
  p.psd_dims = {2 * reduced_dim()};
  p.lp_dim = lp_dim;
  p.c_psd = c_psd;
  p.c_lp = RVector::Zero(lp_dim);
  if (interior) p.c_lp(idx_margin) = -1.0;

  for (int r = 0; r < n_eq; ++r) {
    sdp::Row row;
    row.psd = {reduced_.eq_blocks[r]};
    row.rhs = equalities_[reduced_.kept_equalities[r]].value;
    if (interior) {
      row.lp = RVector::Zero(lp_dim);
      row.lp(idx_margin) = reduced_.eq_traces[r];
    }
    p.rows.push_back(std::move(row));
  }
  for (int sign = -1; sign <= 1; sign += 2) {
    for (int j = 0; j < n_pe; ++j) {
      // sign = -1:  A_j - p_j - s1_j = -F_j;  sign = +1:  B_j + p_j - s2_j = F_j.
      sdp::Row row;
      row.psd = {sign * reduced_.pe_blocks[j]};
      row.lp = RVector::Zero(lp_dim);
      row.lp((sign < 0 ? idx_a : idx_b) + j) = 1.0;
      row.lp((sign < 0 ? idx_s1 : idx_s2) + j) = -1.0;
      if (interior) row.lp(idx_margin) = sign * reduced_.pe_traces[j];
      row.rhs = sign * target_(j);
      p.rows.push_back(std::move(row));
    }
  }
  if (n_pe > 0) {
    sdp::Row row;
    row.psd = {RMatrix()};
    row.lp = RVector::Zero(lp_dim);
    row.lp.segment(idx_a, 2 * n_pe).setOnes();
    row.lp(idx_slack) = 1.0;
    row.rhs = radius();
    p.rows.push_back(std::move(row));
  }
  return p;
}

double FeasibleSet::slack_lower_bound(const CMatrix& slack, double face_shift) const {
  if (complement_.cols() > 0) {
    // With S22 > 0, S >= -eta I whenever S11 - S12 S22^-1 S21 >= -eta I. This stays
    // accurate when the slack carries a large multiple of the face complement.
    const CMatrix s11 = support_.adjoint() * slack * support_;
    const CMatrix s12 = support_.adjoint() * slack * complement_;
    CMatrix s22 = hermitian_part(complement_.adjoint() * slack * complement_);
    s22.diagonal().array() += face_shift;
    Eigen::LLT<CMatrix> llt(s22);
    if (llt.info() == Eigen::Success) {
      return lambda_min(s11 - s12 * llt.solve(CMatrix(s12.adjoint())));
    }
  }
  CMatrix shifted = slack;
  if (face_shift != 0.0) shifted += face_shift * (CMatrix::Identity(dim_, dim_) - support_ * support_.adjoint());
  return lambda_min(shifted);
}

DualCertificate FeasibleSet::certify(const HermitianMatrix& g, const RVector& y, const RVector& z,
                                     double face_shift) const {
  if (g.rows() != dim_ || g.cols() != dim_) {
    throw Error(ErrorKind::DimensionMismatch, "FeasibleSet::certify: objective has the wrong dimension");
  }
  if (y.size() != static_cast<Eigen::Index>(equalities_.size()) ||
      z.size() != static_cast<Eigen::Index>(pe_observables_.size())) {
    throw Error(ErrorKind::DimensionMismatch, "FeasibleSet::certify: dual vector has the wrong length");
  }
  CMatrix slack = hermitian_part(g);
  double value = 0.0;
  for (std::size_t i = 0; i < equalities_.size(); ++i) {
    slack -= y(static_cast<Eigen::Index>(i)) * equalities_[i].observable;
    value += y(static_cast<Eigen::Index>(i)) * equalities_[i].value;
  }
  for (std::size_t j = 0; j < pe_observables_.size(); ++j) {
    slack -= z(static_cast<Eigen::Index>(j)) * pe_observables_[j];
  }
  DualCertificate c;
  c.y = y;
  c.z = z;
  c.a = z.size() > 0 ? z.cwiseAbs().maxCoeff() : 0.0;
  value += target_.dot(z) - c.a * radius();
  if (face_shift != 0.0) {
    if (!face_witness_) {
      throw Error(ErrorKind::InvalidArgument, "FeasibleSet::certify: face shift requires a reduced support");
    }
    c.face_shift = face_shift;
    value -= face_shift * face_witness_value_;
  }
  c.residual = std::max(0.0, -slack_lower_bound(slack, face_shift));
  // Every feasible sigma has unit trace, so Tr(sigma slack) >= lambda_min.
  c.value = value - c.residual;
  return c;
}

LinearMinimum FeasibleSet::minimize_linear(const HermitianMatrix& g, const sdp::Settings& settings) const {
  if (g.rows() != dim_ || g.cols() != dim_) {
    throw Error(ErrorKind::DimensionMismatch, "FeasibleSet::minimize_linear: objective has the wrong dimension");
  }
  const CMatrix gh = hermitian_part(g);
  LinearMinimum out;
  out.solver = sdp::solve(build_problem({embed(gh)}, false), settings);
  if (out.solver.status == sdp::Status::PrimalInfeasible) {
    throw Error(ErrorKind::Infeasible, "FeasibleSet: the constraint set is empty");
  }
  if (!out.solver.usable()) {
    std::ostringstream os;
    os << "FeasibleSet: linear subproblem failed (" << sdp::to_string(out.solver.status) << ", gap "
       << out.solver.relative_gap << ", residuals " << out.solver.primal_residual << "/" << out.solver.dual_residual
       << ")";
    throw Error(ErrorKind::SolverFailure, os.str());
  }
  out.argmin = lift(out.solver.x_psd.front());
  out.primal = trace_product(gh, out.argmin).real();

  const int n_pe = static_cast<int>(pe_observables_.size());
  const int n_kept = static_cast<int>(reduced_.kept_equalities.size());
  RVector y = RVector::Zero(static_cast<Eigen::Index>(equalities_.size()));
  for (int r = 0; r < n_kept; ++r) y(reduced_.kept_equalities[r]) = out.solver.y(r);
  RVector z(n_pe);
  for (int j = 0; j < n_pe; ++j) z(j) = out.solver.y(n_kept + n_pe + j) - out.solver.y(n_kept + j);

  out.dual = certify(gh, y, z);
  if (face_witness_) {
    // The reduced dual only controls the slack on the face. Adding a multiple of
    // I - V V^dagger, which lies in the equality span, restores positivity outside it.
    const double scale = std::max(1.0, gh.cwiseAbs().maxCoeff());
    for (int k = 0; k <= 20; ++k) {
      DualCertificate cand = certify(gh, y, z, scale * std::pow(10.0, k - 4));
      if (cand.value > out.dual.value) out.dual = cand;
    }
  }
  return out;
}

CMatrix FeasibleSet::most_interior_point(const sdp::Settings& settings) const {
  const int k2 = 2 * reduced_dim();
  const sdp::Solution s = sdp::solve(build_problem({RMatrix::Zero(k2, k2)}, true), settings);
  if (s.status == sdp::Status::PrimalInfeasible) {
    throw Error(ErrorKind::Infeasible, "FeasibleSet: the constraint set is empty");
  }
  if (!s.usable()) {
    std::ostringstream os;
    os << "FeasibleSet: interior-point subproblem failed (" << sdp::to_string(s.status) << ")";
    throw Error(ErrorKind::SolverFailure, os.str());
  }
  const double margin = s.x_lp(s.x_lp.size() - 1);
  CMatrix omega = complex_from_embedding(s.x_psd.front());
  omega.diagonal().array() += margin;
  return hermitian_part(support_ * omega * support_.adjoint());
}

}  // namespace renyikey
