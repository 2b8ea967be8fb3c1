#include <doctest.h>

#include <cmath>

#include "renyikey/protocol.hpp"
#include "renyikey/serialize.hpp"
#include "support.hpp"

using namespace renyikey;
using renyikey::testing::Rng;

namespace {

double max_abs(const CMatrix& m) { return m.cwiseAbs().maxCoeff(); }

double freq_of(const ProtocolInstance& inst, const std::string& label) {
  for (std::size_t i = 0; i < inst.pe_labels.size(); ++i) {
    if (inst.pe_labels[i] == label) return inst.ideal_frequencies(static_cast<int>(i));
  }
  FAIL("missing label " << label);
  return 0.0;
}

// QBER in one basis from the Full statistics: errors over detected, matched rounds.
double qber(const ProtocolInstance& inst, bool z_basis) {
  const std::string s0 = z_basis ? "H" : "D", s1 = z_basis ? "V" : "A";
  const std::string b0 = z_basis ? "Z0" : "X0", b1 = z_basis ? "Z1" : "X1";
  const double ok = freq_of(inst, s0 + "_" + b0) + freq_of(inst, s1 + "_" + b1);
  const double err = freq_of(inst, s0 + "_" + b1) + freq_of(inst, s1 + "_" + b0);
  return err / (ok + err);
}

CMatrix basis_projector(int d, int i) {
  CMatrix p = CMatrix::Zero(d, d);
  p(i, i) = 1.0;
  return p;
}

}  // namespace

TEST_SUITE("protocol") {
  TEST_CASE("DensityOperator invariants") {
    CHECK_NOTHROW(DensityOperator(CMatrix::Identity(3, 3) / 3.0));
    CHECK(DensityOperator::maximally_mixed(4).trace() == doctest::Approx(1.0));
    CHECK_THROWS_AS(DensityOperator(CMatrix::Identity(2, 2)), Error);  // trace 2
    CMatrix neg = CMatrix::Zero(2, 2);
    neg(0, 0) = 1.1;
    neg(1, 1) = -0.1;
    CHECK_THROWS_AS(DensityOperator{neg}, Error);
    CMatrix skew = CMatrix::Identity(2, 2) / 2.0;
    skew(0, 1) = 0.1;
    CHECK_THROWS_AS(DensityOperator{skew}, Error);
  }

  TEST_CASE("identity and depolarizing maps") {
    Rng rng(21);
    const CMatrix rho = rng.density(3);
    CHECK(max_abs(CpMap::identity(3).apply(rho) - rho) < 1e-15);
    CHECK(max_abs(CpMap::identity(3).adjoint(rho) - rho) < 1e-15);

    // Full depolarization maps I/2 to itself.
    std::vector<CMatrix> k;
    CMatrix x(2, 2), y(2, 2), z(2, 2);
    x << 0, 1, 1, 0;
    y << 0, Complex(0, -1), Complex(0, 1), 0;
    z << 1, 0, 0, -1;
    k.push_back(0.5 * CMatrix::Identity(2, 2));
    for (const CMatrix& p : {x, y, z}) k.push_back(0.5 * p);
    const CpMap depol(k, 2, 2);
    CHECK(depol.trace_preserving());
    const CMatrix half = CMatrix::Identity(2, 2) / 2.0;
    CHECK(max_abs(depol.apply(half) - half) < 1e-15);
  }

  TEST_CASE("random CPTP maps preserve trace and satisfy adjoint duality") {
    Rng rng(22);
    for (int trial = 0; trial < 20; ++trial) {
      const int in = rng.integer(2, 6), out = rng.integer(2, 6);
      const CpMap m = rng.channel(in, out, rng.integer(1, 4));
      REQUIRE(m.trace_preserving());
      CHECK(max_abs(m.adjoint_identity() - CMatrix::Identity(in, in)) <= 1e-12);
      const CMatrix rho = rng.density(in);
      const CMatrix out_rho = m.apply(rho);
      CHECK(std::abs(out_rho.trace().real() - 1.0) <= 1e-12);
      CHECK(eig_hermitian(hermitian_part(out_rho)).values(0) >= -1e-12);
      const HermitianMatrix x = rng.hermitian(out);
      CHECK(std::abs(trace_product(x, out_rho) - trace_product(m.adjoint(x), rho)) <= 1e-11);
      CHECK(max_abs(m.adjoint(CMatrix::Identity(out, out)) - CMatrix::Identity(in, in)) <= 1e-12);
    }
  }

  TEST_CASE("CpMap rejects inconsistent Kraus lists") {
    CHECK_THROWS_AS(CpMap({CMatrix::Identity(2, 3)}, 2, 2), Error);
    CHECK_THROWS_AS(CpMap({CMatrix::Identity(2, 2) * 1.5}, 2, 2), Error);  // trace increasing
    Rng rng(23);
    CHECK_THROWS_AS(apply_cp_map(rng.channel(2, 3, 1), HermitianMatrix(CMatrix::Identity(3, 3))), Error);
  }

  TEST_CASE("postprocessing map: classical copy") {
    Announcement a;
    a.bob_filter = CMatrix::Identity(1, 1);
    a.entries = {{basis_projector(2, 0), 0}, {basis_projector(2, 1), 1}};
    const CpMap g = build_postprocessing_map({a}, 2);
    CHECK(g.in_dim() == 2);
    CHECK(g.out_dim() == 4);
    Rng rng(24);
    const CMatrix rho = rng.density(2);
    const CMatrix out = g.apply(rho);
    CHECK(std::abs(out.trace().real() - 1.0) < 1e-14);
    // Key register copies A's computational basis value.
    CHECK(std::abs(out(0, 0) - rho(0, 0)) < 1e-15);
    CHECK(std::abs(out(3, 3) - rho(1, 1)) < 1e-15);
  }

  TEST_CASE("postprocessing map: zero-probability announcement contributes nothing") {
    Announcement keep;
    keep.probability = 0.5;
    keep.bob_filter = CMatrix::Identity(2, 2);
    keep.entries = {{basis_projector(2, 0), 0}, {basis_projector(2, 1), 1}};
    Announcement dead = keep;
    dead.probability = 0.0;
    const CpMap both = build_postprocessing_map({keep, dead}, 2);
    const CpMap alone = build_postprocessing_map({keep}, 2);
    Rng rng(25);
    const CMatrix rho = rng.density(4);
    const CMatrix ob = both.apply(rho);
    const CMatrix oa = alone.apply(rho);
    CHECK(std::abs(ob.trace() - oa.trace()) < 1e-15);
    CHECK(both.kraus().size() == 1);
  }

  TEST_CASE("postprocessing map rejects overcomplete POVMs") {
    Announcement a;
    a.bob_filter = CMatrix::Identity(1, 1);
    a.entries = {{CMatrix::Identity(2, 2), 0}, {basis_projector(2, 1), 1}};
    CHECK_THROWS_AS(build_postprocessing_map({a}, 2), Error);
    a.entries = {{basis_projector(2, 0), 2}};
    CHECK_THROWS_AS(build_postprocessing_map({a}, 2), Error);
  }

  TEST_CASE("expected_frequency") {
    Rng rng(26);
    const int d = 4;
    std::vector<CMatrix> meas;
    const CMatrix u = rng.unitary(d);
    for (int i = 0; i < d; ++i) meas.push_back(u.col(i) * u.col(i).adjoint());
    const RVector uniform = expected_frequency(CMatrix::Identity(d, d) / d, meas);
    for (int i = 0; i < d; ++i) CHECK(uniform(i) == doctest::Approx(0.25));

    const CMatrix rho = rng.density(d);
    const RVector f = expected_frequency(rho, meas);
    for (int i = 0; i < d; ++i) CHECK(std::abs(f(i) - (u.col(i).adjoint() * rho * u.col(i))(0, 0).real()) < 1e-14);
    CHECK(f.sum() == doctest::Approx(1.0).epsilon(1e-12));

    meas.pop_back();
    CHECK_THROWS_AS(expected_frequency(rho, meas), Error);
  }

  TEST_CASE("hermitian_basis is orthonormal") {
    const auto basis = hermitian_basis(3);
    REQUIRE(basis.size() == 9);
    for (std::size_t i = 0; i < basis.size(); ++i) {
      CHECK(hermiticity_defect(basis[i]) == 0.0);
      for (std::size_t j = 0; j < basis.size(); ++j) {
        CHECK(std::abs(trace_product(basis[i], basis[j]) - (i == j ? 1.0 : 0.0)) < 1e-14);
      }
    }
  }

  TEST_CASE("binary_entropy") {
    CHECK(binary_entropy(0.0) == 0.0);
    CHECK(binary_entropy(1.0) == 0.0);
    CHECK(binary_entropy(0.5) == doctest::Approx(1.0));
    CHECK(binary_entropy(0.01) == doctest::Approx(0.08079313589591117).epsilon(1e-14));
  }

  TEST_CASE("BB84: noiseless channel") {
    const ProtocolInstance inst = bb84_pm_instance(0.0, 0.0);
    CHECK(qber(inst, true) == doctest::Approx(0.0));
    CHECK(qber(inst, false) == doctest::Approx(0.0));
    CHECK(inst.hzy == doctest::Approx(0.0));
    CHECK(inst.sift_probability == doctest::Approx(0.5));
  }

  TEST_CASE("BB84: depolarization gives QBER p/2 in both bases") {
    for (double p : {0.01, 0.02, 0.04, 0.2}) {
      const ProtocolInstance inst = bb84_pm_instance(p, 0.0);
      CHECK(qber(inst, true) == doctest::Approx(p / 2).epsilon(1e-12));
      CHECK(qber(inst, false) == doctest::Approx(p / 2).epsilon(1e-12));
      CHECK(inst.hzy == doctest::Approx(binary_entropy(p / 2)).epsilon(1e-12));
    }
  }

  TEST_CASE("BB84: loss shows up only as no-detection events") {
    for (double loss : {0.1, 0.5, 0.9}) {
      const ProtocolInstance inst = bb84_pm_instance(0.0, loss);
      double none = 0.0;
      for (const char* a : {"H", "V", "D", "A"}) none += freq_of(inst, std::string(a) + "_none");
      CHECK(none == doctest::Approx(loss).epsilon(1e-12));
      CHECK(qber(inst, true) == doctest::Approx(0.0));
      CHECK(inst.hzy == doctest::Approx(0.0));
    }
  }

  TEST_CASE("BB84: sifting probability matches basis enumeration") {
    for (double pa : {0.5, 0.7}) {
      for (double qz : {0.5, 0.6}) {
        for (double loss : {0.0, 0.3}) {
          Bb84Options opts;
          opts.alice_z_prob = pa;
          opts.bob_z_prob = qz;
          const ProtocolInstance inst = bb84_pm_instance(0.05, loss, opts);
          const double expect = (pa * qz + (1 - pa) * (1 - qz)) * (1 - loss);
          CHECK(inst.sift_probability == doctest::Approx(expect).epsilon(1e-12));
          CHECK(inst.gmap.apply(inst.rho_ideal.matrix()).trace().real() == doctest::Approx(expect).epsilon(1e-12));
        }
      }
    }
  }

  TEST_CASE("BB84 instance invariants") {
    for (auto mode : {StatisticsMode::Full, StatisticsMode::Coarse}) {
      Bb84Options opts;
      opts.statistics = mode;
      const ProtocolInstance inst = bb84_pm_instance(0.03, 0.2, opts);
      CHECK(inst.pe_observables.size() == (mode == StatisticsMode::Full ? 20u : 5u));
      CHECK(inst.pe_labels.size() == inst.pe_observables.size());
      CHECK(inst.ideal_frequencies.minCoeff() >= 0.0);
      CHECK(inst.ideal_frequencies.sum() == doctest::Approx(1.0).epsilon(1e-12));
      const RVector again = expected_frequency(inst.rho_ideal.matrix(), inst.pe_observables);
      CHECK((again - inst.ideal_frequencies).cwiseAbs().maxCoeff() == 0.0);
      for (const auto& eq : inst.equality_observables) {
        CHECK(std::abs(trace_product(eq.observable, inst.rho_ideal.matrix()).real() - eq.value) <= 1e-10);
      }
      const double tr = inst.gmap.apply(inst.rho_ideal.matrix()).trace().real();
      CHECK(tr > 0.0);
      CHECK(tr <= 1.0);
      // Z o G(rho) has no coherence between key values.
      const CMatrix zg = inst.zmap.apply(inst.gmap.apply(inst.rho_ideal.matrix()));
      const int half = static_cast<int>(zg.rows()) / 2;
      CHECK(max_abs(zg.block(0, half, half, half)) == 0.0);
      // Adjoint duality for the constructed map.
      Rng rng(27);
      const HermitianMatrix x = rng.hermitian(inst.dims.output());
      const CMatrix rho = rng.density(inst.dims.input());
      CHECK(std::abs(trace_product(x, inst.gmap.apply(rho)) - trace_product(inst.gmap.adjoint(x), rho)) <= 1e-11);
    }
  }

  TEST_CASE("BB84 rejects out-of-range parameters") {
    CHECK_THROWS_AS(bb84_pm_instance(-0.1, 0.0), Error);
    CHECK_THROWS_AS(bb84_pm_instance(0.0, 1.0), Error);
    Bb84Options opts;
    opts.bob_z_prob = 1.0;
    CHECK_THROWS_AS(bb84_pm_instance(0.0, 0.0, opts), Error);
  }

  TEST_CASE("protocol serialization round trip") {
    Bb84Options opts;
    opts.statistics = StatisticsMode::Coarse;
    const ProtocolInstance inst = bb84_pm_instance(0.02, 0.1, opts);
    const std::string text = protocol_to_json(inst);
    const ProtocolInstance back = protocol_from_json(text);
    CHECK(back.name == inst.name);
    CHECK(back.dims.output() == inst.dims.output());
    CHECK(back.hzy == inst.hzy);
    CHECK(back.sift_probability == inst.sift_probability);
    CHECK(back.pe_labels == inst.pe_labels);
    CHECK((back.ideal_frequencies - inst.ideal_frequencies).cwiseAbs().maxCoeff() == 0.0);
    CHECK(max_abs(back.rho_ideal.matrix() - inst.rho_ideal.matrix()) == 0.0);
    Rng rng(28);
    const CMatrix rho = rng.density(inst.dims.input());
    CHECK(max_abs(back.gmap.apply(rho) - inst.gmap.apply(rho)) == 0.0);
    CHECK(protocol_to_json(back) == text);
    CHECK_THROWS_AS(protocol_from_json("{\"dims\": 3}"), Error);
  }
}
