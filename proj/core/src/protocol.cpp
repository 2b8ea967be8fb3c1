#include "renyikey/protocol.hpp"

#include <cmath>
#include <sstream>

namespace renyikey {

namespace {

constexpr double kMapTol = 1e-10;

double min_eigenvalue(const CMatrix& m) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian_part(m), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

double max_eigenvalue(const CMatrix& m) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian_part(m), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(es.eigenvalues().size() - 1);
}

CMatrix psd_sqrt(const CMatrix& m) {
  const EigenSystem es = eig_hermitian(m);
  RVector roots(es.dim());
  for (int i = 0; i < es.dim(); ++i) roots(i) = std::sqrt(std::max(es.values(i), 0.0));
  return es.vectors * roots.cast<Complex>().asDiagonal() * es.vectors.adjoint();
}

CMatrix ket(int dim, int index) {
  CMatrix v = CMatrix::Zero(dim, 1);
  v(index, 0) = 1.0;
  return v;
}

CMatrix projector(const CVector& v) { return v * v.adjoint(); }

}  // namespace

DensityOperator::DensityOperator(CMatrix m) : m_(std::move(m)) {
  require_hermitian(m_, "DensityOperator");
  m_ = hermitian_part(m_);
  const double tr = trace();
  if (!(tr > 0.0) || tr > 1.0 + kTraceTol) {
    std::ostringstream os;
    os << "DensityOperator: trace " << tr << " outside (0, 1]";
    throw Error(ErrorKind::InvalidArgument, os.str());
  }
  const double lo = min_eigenvalue(m_);
  if (lo < -kPsdTol) {
    std::ostringstream os;
    os << "DensityOperator: smallest eigenvalue " << lo << " below -" << kPsdTol;
    throw Error(ErrorKind::NotPositive, os.str());
  }
}

DensityOperator DensityOperator::maximally_mixed(int dim) {
  return DensityOperator(CMatrix::Identity(dim, dim) / static_cast<double>(dim));
}

CpMap::CpMap(std::vector<CMatrix> kraus, int in_dim, int out_dim)
    : kraus_(std::move(kraus)), in_dim_(in_dim), out_dim_(out_dim) {
  if (in_dim < 1 || out_dim < 1) throw Error(ErrorKind::InvalidArgument, "CpMap: dimensions must be positive");
  adjoint_identity_ = CMatrix::Zero(in_dim, in_dim);
  for (const auto& k : kraus_) {
    if (k.rows() != out_dim || k.cols() != in_dim) {
      std::ostringstream os;
      os << "CpMap: Kraus operator is " << k.rows() << "x" << k.cols() << ", expected " << out_dim << "x" << in_dim;
      throw Error(ErrorKind::DimensionMismatch, os.str());
    }
    adjoint_identity_ += k.adjoint() * k;
  }
  adjoint_identity_ = hermitian_part(adjoint_identity_);
  const double top = kraus_.empty() ? 0.0 : max_eigenvalue(adjoint_identity_);
  if (top > 1.0 + kMapTol) {
    std::ostringstream os;
    os << "CpMap: map is trace-increasing (largest eigenvalue of sum K^dagger K is " << top << ")";
    throw Error(ErrorKind::InvalidArgument, os.str());
  }
  trace_preserving_ =
      (adjoint_identity_ - CMatrix::Identity(in_dim, in_dim)).cwiseAbs().maxCoeff() <= kMapTol;
}

CpMap CpMap::identity(int dim) { return CpMap({CMatrix::Identity(dim, dim)}, dim, dim); }

CMatrix CpMap::apply(const CMatrix& x) const {
  if (x.rows() != in_dim_ || x.cols() != in_dim_) {
    std::ostringstream os;
    os << "apply_cp_map: operand is " << x.rows() << "x" << x.cols() << ", map input dimension is " << in_dim_;
    throw Error(ErrorKind::DimensionMismatch, os.str());
  }
  CMatrix out = CMatrix::Zero(out_dim_, out_dim_);
  for (const auto& k : kraus_) out.noalias() += k * x * k.adjoint();
  return out;
}

CMatrix CpMap::adjoint(const CMatrix& y) const {
  if (y.rows() != out_dim_ || y.cols() != out_dim_) {
    std::ostringstream os;
    os << "adjoint_cp_map: operand is " << y.rows() << "x" << y.cols() << ", map output dimension is " << out_dim_;
    throw Error(ErrorKind::DimensionMismatch, os.str());
  }
  CMatrix out = CMatrix::Zero(in_dim_, in_dim_);
  for (const auto& k : kraus_) out.noalias() += k.adjoint() * y * k;
  return out;
}

CpMap CpMap::compose_after(const CpMap& first) const {
  if (first.out_dim() != in_dim_) {
    throw Error(ErrorKind::DimensionMismatch, "CpMap::compose_after: dimensions do not chain");
  }
  std::vector<CMatrix> ops;
  ops.reserve(kraus_.size() * first.kraus().size());
  for (const auto& outer : kraus_) {
    for (const auto& inner : first.kraus()) ops.push_back(outer * inner);
  }
  return CpMap(std::move(ops), first.in_dim(), out_dim_);
}

DensityOperator apply_cp_map(const CpMap& m, const DensityOperator& rho) {
  return DensityOperator(hermitian_part(m.apply(rho.matrix())));
}

HermitianMatrix apply_cp_map(const CpMap& m, const HermitianMatrix& x) { return m.apply(x); }

HermitianMatrix adjoint_cp_map(const CpMap& m, const HermitianMatrix& x) { return m.adjoint(x); }

CpMap build_postprocessing_map(const std::vector<Announcement>& announcements, int key_dim) {
  if (announcements.empty()) throw Error(ErrorKind::InvalidArgument, "postprocessing map: no announcements");
  if (key_dim < 1) throw Error(ErrorKind::InvalidArgument, "postprocessing map: key register dimension must be positive");

  int alice_dim = -1;
  int bob_dim = -1;
  for (const auto& a : announcements) {
    if (a.entries.empty()) throw Error(ErrorKind::InvalidArgument, "postprocessing map: announcement without outcomes");
    if (a.bob_filter.rows() == 0 || a.bob_filter.rows() != a.bob_filter.cols()) {
      throw Error(ErrorKind::DimensionMismatch, "postprocessing map: Bob's filter must be square");
    }
    if (bob_dim < 0) bob_dim = static_cast<int>(a.bob_filter.rows());
    if (a.bob_filter.rows() != bob_dim) {
      throw Error(ErrorKind::DimensionMismatch, "postprocessing map: inconsistent Bob dimensions");
    }
    if (!(a.probability >= 0.0 && a.probability <= 1.0)) {
      throw Error(ErrorKind::InvalidArgument, "postprocessing map: announcement probability outside [0, 1]");
    }
    for (const auto& e : a.entries) {
      if (alice_dim < 0) alice_dim = static_cast<int>(e.alice_element.rows());
      if (e.alice_element.rows() != alice_dim || e.alice_element.cols() != alice_dim) {
        throw Error(ErrorKind::DimensionMismatch, "postprocessing map: inconsistent Alice dimensions");
      }
      if (e.key_value < 0 || e.key_value >= key_dim) {
        throw Error(ErrorKind::InvalidArgument, "postprocessing map: key value outside key register");
      }
    }
  }

  const int s_dim = static_cast<int>(announcements.size());
  const int in_dim = alice_dim * bob_dim;
  const int out_dim = key_dim * in_dim * s_dim;
  std::vector<CMatrix> kraus;
  for (int s = 0; s < s_dim; ++s) {
    const Announcement& a = announcements[s];
    CMatrix completeness = CMatrix::Zero(alice_dim, alice_dim);
    for (const auto& e : a.entries) {
      require_hermitian(e.alice_element, "postprocessing map: POVM element");
      if (min_eigenvalue(e.alice_element) < -kMapTol) {
        throw Error(ErrorKind::NotPositive, "postprocessing map: POVM element is not PSD");
      }
      completeness += e.alice_element;
    }
    if (max_eigenvalue(completeness) > 1.0 + kMapTol) {
      std::ostringstream os;
      os << "postprocessing map: POVM elements of announcement " << s << " sum above the identity";
      throw Error(ErrorKind::InvalidArgument, os.str());
    }
    if (a.probability == 0.0) continue;

    CMatrix g = CMatrix::Zero(out_dim, in_dim);
    const CMatrix s_ket = ket(s_dim, s) * std::sqrt(a.probability);
    for (const auto& e : a.entries) {
      const CMatrix body = kron(psd_sqrt(e.alice_element), a.bob_filter);
      g += kron(kron(ket(key_dim, e.key_value), body), s_ket);
    }
    kraus.push_back(std::move(g));
  }
  // A map with every announcement at zero weight is the zero map.
  return CpMap(std::move(kraus), in_dim, out_dim);
}

RVector expected_frequency(const CMatrix& rho, const std::vector<CMatrix>& observables) {
  if (observables.empty()) throw Error(ErrorKind::InvalidArgument, "expected_frequency: empty observable set");
  const auto d = rho.rows();
  CMatrix total = CMatrix::Zero(d, d);
  RVector out(static_cast<Eigen::Index>(observables.size()));
  for (std::size_t i = 0; i < observables.size(); ++i) {
    const CMatrix& g = observables[i];
    if (g.rows() != d || g.cols() != d) {
      throw Error(ErrorKind::DimensionMismatch, "expected_frequency: observable dimension differs from state");
    }
    require_hermitian(g, "expected_frequency: observable");
    if (min_eigenvalue(g) < -kMapTol) throw Error(ErrorKind::NotPositive, "expected_frequency: observable is not PSD");
    total += g;
    out(static_cast<Eigen::Index>(i)) = trace_product(rho, g).real();
  }
  if ((total - CMatrix::Identity(d, d)).cwiseAbs().maxCoeff() > kMapTol) {
    throw Error(ErrorKind::InvalidArgument, "expected_frequency: observables do not sum to the identity");
  }
  return out;
}

double binary_entropy(double p) {
  if (p <= 0.0 || p >= 1.0) return 0.0;
  return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

std::vector<CMatrix> hermitian_basis(int d) {
  std::vector<CMatrix> basis;
  basis.reserve(static_cast<std::size_t>(d) * d);
  const double r = 1.0 / std::sqrt(2.0);
  for (int k = 0; k < d; ++k) {
    CMatrix e = CMatrix::Zero(d, d);
    e(k, k) = 1.0;
    basis.push_back(e);
  }
  for (int k = 0; k < d; ++k) {
    for (int l = k + 1; l < d; ++l) {
      CMatrix sym = CMatrix::Zero(d, d);
      sym(k, l) = r;
      sym(l, k) = r;
      basis.push_back(sym);
      CMatrix anti = CMatrix::Zero(d, d);
      anti(k, l) = Complex(0.0, -r);
      anti(l, k) = Complex(0.0, r);
      basis.push_back(anti);
    }
  }
  return basis;
}

namespace {

// Partial trace over the second factor of an (a x b)-dimensional operator.
CMatrix trace_out_second(const CMatrix& m, int a, int b) {
  CMatrix out = CMatrix::Zero(a, a);
  for (int i = 0; i < a; ++i) {
    for (int j = 0; j < a; ++j) out(i, j) = m.block(i * b, j * b, b, b).trace();
  }
  return out;
}

}  // namespace

ProtocolInstance bb84_pm_instance(double depolarization, double loss, const Bb84Options& options) {
  if (!(depolarization >= 0.0 && depolarization <= 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "bb84_pm_instance: depolarization must lie in [0, 1]");
  }
  if (!(loss >= 0.0 && loss < 1.0)) throw Error(ErrorKind::InvalidArgument, "bb84_pm_instance: loss must lie in [0, 1)");
  const double pa = options.alice_z_prob;
  const double qz = options.bob_z_prob;
  if (!(pa > 0.0 && pa < 1.0) || !(qz > 0.0 && qz < 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "bb84_pm_instance: basis probabilities must lie in (0, 1)");
  }
  const double qx = 1.0 - qz;

  RegisterDims dims;  // R = 2, A = 4, B = 3 (qubit + vacuum), S = 2
  const int da = dims.alice;
  const int db = dims.bob;
  const double s2 = 1.0 / std::sqrt(2.0);

  // Signal states H, V, D, A and their priors.
  std::vector<CVector> signals(4, CVector::Zero(2));
  signals[0](0) = 1.0;
  signals[1](1) = 1.0;
  signals[2] << s2, s2;
  signals[3] << s2, -s2;
  const double priors[4] = {pa / 2, pa / 2, (1 - pa) / 2, (1 - pa) / 2};

  // Source replacement |Phi> = sum_x sqrt(p_x) |x>_A |phi_x>_A'.
  CVector phi = CVector::Zero(da * 2);
  for (int x = 0; x < 4; ++x) {
    for (int q = 0; q < 2; ++q) phi(x * 2 + q) += std::sqrt(priors[x]) * signals[x](q);
  }

  // Loss: embed the qubit into qubit + vacuum; then depolarize the surviving qubit.
  std::vector<CMatrix> loss_kraus;
  {
    CMatrix keep = CMatrix::Zero(db, 2);
    keep(0, 0) = std::sqrt(1.0 - loss);
    keep(1, 1) = std::sqrt(1.0 - loss);
    loss_kraus.push_back(keep);
    for (int q = 0; q < 2; ++q) {
      CMatrix lost = CMatrix::Zero(db, 2);
      lost(2, q) = std::sqrt(loss);
      loss_kraus.push_back(lost);
    }
  }
  const CpMap loss_channel(loss_kraus, 2, db);

  std::vector<CMatrix> depol_kraus;
  {
    const double p = depolarization;
    CMatrix k0 = CMatrix::Zero(db, db);
    k0(0, 0) = std::sqrt(1.0 - 0.75 * p);
    k0(1, 1) = std::sqrt(1.0 - 0.75 * p);
    k0(2, 2) = 1.0;
    depol_kraus.push_back(k0);
    CMatrix px = CMatrix::Zero(db, db), py = CMatrix::Zero(db, db), pz = CMatrix::Zero(db, db);
    px(0, 1) = 1.0;
    px(1, 0) = 1.0;
    py(0, 1) = Complex(0, -1);
    py(1, 0) = Complex(0, 1);
    pz(0, 0) = 1.0;
    pz(1, 1) = -1.0;
    for (const CMatrix* pauli : {&px, &py, &pz}) depol_kraus.push_back(std::sqrt(p / 4.0) * *pauli);
  }
  const CpMap depol_channel(depol_kraus, db, db);
  const CpMap channel = depol_channel.compose_after(loss_channel);

  std::vector<CMatrix> extended;
  for (const auto& k : channel.kraus()) extended.push_back(kron(CMatrix::Identity(da, da), k));
  const CpMap full_channel(extended, da * 2, da * db);
  const CMatrix rho_ideal = hermitian_part(full_channel.apply(phi * phi.adjoint()));
  const CMatrix rho_a = hermitian_part(trace_out_second(rho_ideal, da, db));

  // Bob's POVM on qubit + vacuum.
  CVector plus = CVector::Zero(db), minus = CVector::Zero(db);
  plus(0) = s2;
  plus(1) = s2;
  minus(0) = s2;
  minus(1) = -s2;
  std::vector<CMatrix> bob_povm = {
      qz * projector(ket(db, 0).col(0)), qz * projector(ket(db, 1).col(0)),
      qx * projector(plus),              qx * projector(minus),
      projector(ket(db, 2).col(0)),
  };
  const char* bob_labels[5] = {"Z0", "Z1", "X0", "X1", "none"};
  const char* alice_labels[4] = {"H", "V", "D", "A"};

  auto alice_proj = [&](int x) { return projector(ket(da, x).col(0)); };

  // Postprocessing: keep rounds where both used the same basis and Bob detected.
  CMatrix qubit = CMatrix::Zero(db, db);
  qubit(0, 0) = 1.0;
  qubit(1, 1) = 1.0;
  std::vector<Announcement> announcements(2);
  announcements[0].bob_filter = std::sqrt(qz) * qubit;
  announcements[0].entries = {{alice_proj(0), 0}, {alice_proj(1), 1}};
  announcements[1].bob_filter = std::sqrt(qx) * qubit;
  announcements[1].entries = {{alice_proj(2), 0}, {alice_proj(3), 1}};
  CpMap gmap = build_postprocessing_map(announcements, dims.key);

  PinchingMap zmap(dims.key, dims.alice * dims.bob * dims.announce);

  std::vector<EqualityObservable> eq;
  for (const CMatrix& e : hermitian_basis(da)) {
    eq.push_back({kron(e, CMatrix::Identity(db, db)), trace_product(e, rho_a).real()});
  }

  std::vector<CMatrix> pe;
  std::vector<std::string> labels;
  if (options.statistics == StatisticsMode::Full) {
    for (int x = 0; x < 4; ++x) {
      for (int y = 0; y < 5; ++y) {
        pe.push_back(kron(alice_proj(x), bob_povm[y]));
        labels.push_back(std::string(alice_labels[x]) + "_" + bob_labels[y]);
      }
    }
  } else {
    // Bob outcome index for "same bit, same basis" given Alice's state x.
    const int correct[4] = {0, 1, 2, 3};
    const int wrong[4] = {1, 0, 3, 2};
    CMatrix zc = CMatrix::Zero(da * db, da * db), ze = zc, xc = zc, xe = zc, other = zc;
    for (int x = 0; x < 4; ++x) {
      const bool z_state = x < 2;
      for (int y = 0; y < 5; ++y) {
        const CMatrix term = kron(alice_proj(x), bob_povm[y]);
        if (y == correct[x]) {
          (z_state ? zc : xc) += term;
        } else if (y == wrong[x]) {
          (z_state ? ze : xe) += term;
        } else {
          other += term;
        }
      }
    }
    pe = {zc, ze, xc, xe, other};
    labels = {"Z_correct", "Z_error", "X_correct", "X_error", "other"};
  }
  const RVector freq = expected_frequency(rho_ideal, pe);

  // H(Z_A | Y_B, basis) on sifted, detected rounds.
  double sifted = 0.0;
  double cond_entropy = 0.0;
  for (int basis = 0; basis < 2; ++basis) {
    double joint[2][2];
    for (int xb = 0; xb < 2; ++xb) {
      for (int yb = 0; yb < 2; ++yb) {
        const CMatrix obs = kron(alice_proj(2 * basis + xb), bob_povm[2 * basis + yb]);
        joint[xb][yb] = std::max(trace_product(rho_ideal, obs).real(), 0.0);
        sifted += joint[xb][yb];
      }
    }
    for (int yb = 0; yb < 2; ++yb) {
      const double py_ = joint[0][yb] + joint[1][yb];
      for (int xb = 0; xb < 2; ++xb) {
        if (joint[xb][yb] > 0.0) cond_entropy -= joint[xb][yb] * std::log2(joint[xb][yb] / py_);
      }
    }
  }
  const double hzy = sifted > 0.0 ? cond_entropy / sifted : 0.0;

  ProtocolInstance inst{
      .name = "bb84-pm",
      .depolarization = depolarization,
      .loss = loss,
      .dims = dims,
      .rho_ideal = DensityOperator(rho_ideal),
      .alice_marginal = rho_a,
      .gmap = gmap,
      .zmap = zmap,
      .equality_observables = std::move(eq),
      .pe_observables = std::move(pe),
      .pe_labels = std::move(labels),
      .ideal_frequencies = freq,
      .hzy = hzy,
      .sift_probability = gmap.apply(rho_ideal).trace().real(),
  };
  return inst;
}

}  // namespace renyikey
