#include <doctest.h>

#include <cmath>
#include <numbers>

#include "renyikey/objective.hpp"
#include "support.hpp"

using namespace renyikey;
using renyikey::testing::classical_renyi;
using renyikey::testing::random_objective;
using renyikey::testing::Rng;

namespace {

double max_abs(const CMatrix& m) { return m.cwiseAbs().maxCoeff(); }

double directional(const HermitianMatrix& grad, const CMatrix& dir) { return trace_product(dir, grad).real(); }

}  // namespace

TEST_SUITE("objective") {
  TEST_CASE("RenyiParams relations") {
    for (double alpha : {1.0005, 1.01, 1.3, 1.5, 2.0}) {
      const RenyiParams p = RenyiParams::from_alpha(alpha);
      CHECK(p.alpha * p.beta == doctest::Approx(1.0));
      CHECK(1.0 / p.alpha + 1.0 / p.gamma == doctest::Approx(2.0));
      CHECK(p.mu > 0.0);
      CHECK(p.mu <= 0.5);
      CHECK(p.mu == doctest::Approx((1 - p.beta) / (2 * p.beta)));
      CHECK(p.L == doctest::Approx(std::sin(std::numbers::pi * p.mu) / std::numbers::pi));
    }
    CHECK_THROWS_AS(RenyiParams::from_alpha(1.0), Error);
    CHECK_THROWS_AS(RenyiParams::from_alpha(2.5), Error);
  }

  TEST_CASE("divergence closed forms") {
    Rng rng(31);
    const CMatrix rho = rng.density(3);
    CHECK(std::abs(renyi_divergence(rho, rho, 0.75)) <= 1e-12);
    CHECK(q_beta(rho, rho, 0.75) == doctest::Approx(1.0).epsilon(1e-12));

    CMatrix zero = CMatrix::Zero(2, 2);
    zero(0, 0) = 1.0;
    CHECK(renyi_divergence(zero, CMatrix::Identity(2, 2) / 2.0, 0.75) == doctest::Approx(1.0).epsilon(1e-14));

    RVector p(2), q(2);
    p << 0.5, 0.5;
    q << 0.25, 0.75;
    for (double beta : {0.55, 0.75, 0.95}) {
      const CMatrix rp = p.cast<Complex>().asDiagonal();
      const CMatrix rq = q.cast<Complex>().asDiagonal();
      CHECK(std::abs(renyi_divergence(rp, rq, beta) - classical_renyi(p, q, beta)) <= 1e-12);
      double qs = 0.0;
      for (int i = 0; i < 2; ++i) qs += std::pow(p(i), beta) * std::pow(q(i), 1 - beta);
      CHECK(std::abs(q_beta(rp, rq, beta) - qs) <= 1e-14);
    }
  }

  TEST_CASE("divergence frozen high-precision values") {
    // 40-digit evaluation of the definition.
    CMatrix rho(2, 2), sigma(2, 2);
    rho << 0.6, Complex(0.1, 0.05), Complex(0.1, -0.05), 0.4;
    sigma << 0.5, Complex(0, -0.2), Complex(0, 0.2), 0.5;
    CHECK(std::abs(renyi_divergence(rho, sigma, 0.75) - 0.1895251494034440867) <= 1e-13);
    CHECK(std::abs(renyi_divergence(rho, sigma, 0.55) - 0.13776808899290488546) <= 1e-13);
    CHECK(std::abs(renyi_divergence(rho, sigma, 0.95) - 0.24034465559631283612) <= 1e-13);
    CHECK(std::abs(q_beta(rho, sigma, 0.75) - 0.9676912436674857276) <= 1e-14);
  }

  TEST_CASE("q_beta and divergence are consistent on subnormalized pairs") {
    Rng rng(32);
    for (int trial = 0; trial < 20; ++trial) {
      const int d = rng.integer(2, 8);
      const CMatrix rho = rng.density(d) * rng.uniform(0.2, 1.0);
      const CMatrix sigma = rng.density(d);
      const double beta = rng.uniform(0.5, 0.99);
      const double d_beta = renyi_divergence(rho, sigma, beta);
      CHECK(std::abs(std::exp2((beta - 1) * d_beta) * rho.trace().real() - q_beta(rho, sigma, beta)) <= 1e-10);
    }
  }

  TEST_CASE("support violation is rejected") {
    CMatrix rho = CMatrix::Identity(2, 2) / 2.0;
    CMatrix sigma = CMatrix::Zero(2, 2);
    sigma(0, 0) = 1.0;
    CHECK_THROWS_AS(renyi_divergence(rho, sigma, 0.75), Error);
  }

  TEST_CASE("pinching data processing and order monotonicity") {
    Rng rng(33);
    for (int trial = 0; trial < 30; ++trial) {
      const int rest = rng.integer(1, 4);
      const PinchingMap z(rng.unitary(2), rest);
      const CMatrix rho = rng.density(2 * rest), sigma = rng.density(2 * rest);
      double last = -1.0;
      for (double beta : {0.55, 0.65, 0.75, 0.85, 0.95}) {
        const double full = renyi_divergence(rho, sigma, beta);
        CHECK(renyi_divergence(z.apply(rho), z.apply(sigma), beta) <= full + 1e-12);
        CHECK(full >= last - 1e-12);
        last = full;
      }
    }
  }

  TEST_CASE("perturb_map") {
    Rng rng(34);
    const CpMap g = rng.channel(3, 6, 2);
    const double eps = 1e-3;
    const CpMap ge = perturb_map(g, eps);
    const PerturbedObjective obj(g, PinchingMap(2, 3), RenyiParams::from_alpha(1.5), eps);
    for (int trial = 0; trial < 10; ++trial) {
      const CMatrix rho = rng.density(3, 1);
      const CMatrix out = ge.apply(rho);
      const double tr = g.apply(rho).trace().real();
      CHECK(max_abs(out - obj.channel(rho)) <= 1e-14);
      CHECK(max_abs(out - g.apply(rho)) <= eps * (1.0 + 1.0 / 6.0) + 1e-15);
      CHECK(eig_hermitian(hermitian_part(out)).values(0) >= eps * tr / 6.0 * (1 - 1e-10));
      const HermitianMatrix y = rng.hermitian(6);
      CHECK(max_abs(ge.adjoint(y) - obj.channel_adjoint(y)) <= 1e-13);
    }
    const CMatrix rho = rng.density(3);
    const CMatrix near_one = perturb_map(g, 1.0 - 1e-12).apply(rho);
    CHECK(max_abs(near_one - CMatrix::Identity(6, 6) / 6.0) <= 1e-12);
    CHECK_THROWS_AS(perturb_map(g, 0.0), Error);
    CHECK_THROWS_AS(perturb_map(g, 1.0), Error);
  }

  TEST_CASE("objective matches the divergence composition") {
    Rng rng(35);
    for (int trial = 0; trial < 20; ++trial) {
      const int d = rng.integer(2, 6);
      const double beta = rng.uniform(0.5, 0.99);
      const PerturbedObjective obj = random_objective(rng, d, beta);
      const CMatrix rho = rng.density(d);
      const CMatrix g = hermitian_part(obj.channel(rho));
      const double expect = g.trace().real() * renyi_divergence(g, obj.zmap().apply(g), beta);
      const auto ev = obj.evaluate(rho);
      CHECK(std::abs(ev.value - expect) <= 1e-12);
      CHECK(ev.value >= -1e-14);
      CHECK(hermiticity_defect(ev.gradient) <= 1e-12);
    }
  }

  TEST_CASE("objective vanishes on pinching fixed points") {
    Rng rng(36);
    // G copies a classical register: output is already block diagonal in the key.
    Announcement a;
    a.bob_filter = CMatrix::Identity(1, 1);
    CMatrix p0 = CMatrix::Zero(2, 2), p1 = CMatrix::Zero(2, 2);
    p0(0, 0) = 1.0;
    p1(1, 1) = 1.0;
    a.entries = {{p0, 0}, {p1, 1}};
    const CpMap g = build_postprocessing_map({a}, 2);
    const PerturbedObjective obj(g, PinchingMap(2, 2), RenyiParams::from_alpha(1.3));
    const CMatrix diag = rng.diagonal_density(2);
    CHECK(std::abs(obj.value(diag)) <= 1e-12);
  }

  TEST_CASE("noiseless BB84 objective tends to the sifting probability") {
    const ProtocolInstance inst = bb84_pm_instance(0.0, 0.0);
    for (double alpha : {1.1, 1.5, 2.0}) {
      const RenyiParams params = RenyiParams::from_alpha(alpha);
      const double f6 = PerturbedObjective(inst.gmap, inst.zmap, params, 1e-6).value(inst.rho_ideal.matrix());
      const double f8 = PerturbedObjective(inst.gmap, inst.zmap, params, 1e-8).value(inst.rho_ideal.matrix());
      const double target = inst.sift_probability * 1.0;
      // the bias decays like eps^beta
      const double ratio = std::abs(f6 - target) / std::abs(f8 - target);
      CHECK(std::abs(std::log(ratio) / std::log(100.0) - params.beta) <= 0.02);
      CHECK(std::abs(f8 - target) <= 1e-4);
    }
  }

  TEST_CASE("gradient matches central differences") {
    Rng rng(37);
    for (double beta : {0.55, 0.75, 0.95}) {
      for (int d : {4, 8}) {
        const PerturbedObjective obj = random_objective(rng, d, beta);
        for (int trial = 0; trial < 3; ++trial) {
          const CMatrix rho = rng.density(d), tau = rng.density(d);
          const double analytic = directional(obj.gradient(rho), tau - rho);
          const double fd = finite_diff_gradient(DensityOperator(rho), DensityOperator(tau), obj, 1e-5);
          CHECK(std::abs(analytic - fd) <= 1e-6 * std::abs(analytic));
        }
      }
    }
  }

  TEST_CASE("finite_diff_gradient on known functionals") {
    Rng rng(38);
    const CMatrix rho = rng.density(3), tau = rng.density(3);
    auto constant = [](const CMatrix&) { return 4.2; };
    CHECK(finite_diff_gradient(constant, rho, tau, 1e-4) == 0.0);
    auto purity = [](const CMatrix& x) { return (x * x).trace().real(); };
    const double exact = 2.0 * trace_product(rho, tau - rho).real();
    CHECK(std::abs(finite_diff_gradient(purity, rho, tau, 1e-3) - exact) <= 1e-10);
    CHECK_THROWS_AS(finite_diff_gradient(purity, rho, tau, 0.0), Error);
  }

  TEST_CASE("objective is convex along segments") {
    Rng rng(39);
    for (int trial = 0; trial < 10; ++trial) {
      const int d = rng.integer(2, 6);
      const PerturbedObjective obj = random_objective(rng, d, rng.uniform(0.5, 0.99));
      const CMatrix r0 = rng.density(d), r1 = rng.density(d);
      const double f0 = obj.value(r0), f1 = obj.value(r1);
      for (double lam : {0.1, 0.3, 0.5, 0.7, 0.9}) {
        CHECK(obj.value((1 - lam) * r0 + lam * r1) <= (1 - lam) * f0 + lam * f1 + 1e-9);
      }
    }
  }

  TEST_CASE("objective rejects mismatched dimensions") {
    Rng rng(40);
    const PerturbedObjective obj = random_objective(rng, 3, 0.75);
    CHECK_THROWS_AS(obj.value(CMatrix::Identity(4, 4) / 4.0), Error);
    CHECK_THROWS_AS(PerturbedObjective(rng.channel(3, 6, 1), PinchingMap(2, 2), RenyiParams::from_alpha(1.5)), Error);
  }
}
