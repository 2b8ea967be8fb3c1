#include <doctest.h>

#include <Eigen/Eigenvalues>

#include "renyikey/sdp.hpp"

using namespace renyikey;

namespace {

sdp::Problem min_eigenvalue_problem(const RMatrix& c) {
  sdp::Problem p;
  p.psd_dims = {static_cast<int>(c.rows())};
  p.c_psd = {c};
  sdp::Row trace;
  trace.psd = {RMatrix::Identity(c.rows(), c.cols())};
  trace.rhs = 1.0;
  p.rows = {trace};
  return p;
}

}  // namespace

TEST_SUITE("sdp") {
  TEST_CASE("min <C, X> over unit-trace PSD X is lambda_min(C)") {
    RMatrix c(3, 3);
    c << 2, 1, 0, 1, 3, 1, 0, 1, -1;
    const sdp::Solution s = sdp::solve(min_eigenvalue_problem(c));
    REQUIRE(s.usable());
    const double lmin = Eigen::SelfAdjointEigenSolver<RMatrix>(c).eigenvalues()(0);
    CHECK(s.primal_objective == doctest::Approx(lmin).epsilon(1e-9));
    CHECK(s.dual_objective == doctest::Approx(lmin).epsilon(1e-9));
    CHECK(s.y(0) == doctest::Approx(lmin).epsilon(1e-9));
    CHECK(s.primal_residual <= 1e-9);
    CHECK(s.dual_residual <= 1e-9);
  }

  TEST_CASE("mixed LP and PSD blocks") {
    // min x1 + 2 x2  s.t.  x1 + x2 = 1,  Tr X - x2 = 0.5
    sdp::Problem q;
    q.psd_dims = {2};
    q.lp_dim = 2;
    q.c_psd = {RMatrix::Zero(2, 2)};
    q.c_lp = RVector(2);
    q.c_lp << 1, 2;
    sdp::Row a;
    a.psd = {RMatrix()};
    a.lp = RVector(2);
    a.lp << 1, 1;
    a.rhs = 1.0;
    sdp::Row b;
    b.psd = {RMatrix::Identity(2, 2)};
    b.lp = RVector(2);
    b.lp << 0, -1;
    b.rhs = 0.5;
    q.rows = {a, b};
    const sdp::Solution s = sdp::solve(q);
    REQUIRE(s.usable());
    CHECK(s.primal_objective == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(s.x_lp(0) == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(std::abs(s.x_lp(1)) <= 1e-8);
    CHECK(std::abs(s.primal_objective - s.dual_objective) <= 1e-9);
  }

  TEST_CASE("primal infeasibility is detected") {
    RMatrix c = RMatrix::Identity(2, 2);
    sdp::Problem p = min_eigenvalue_problem(c);
    p.rows[0].rhs = -1.0;
    const sdp::Solution s = sdp::solve(p);
    CHECK(s.status == sdp::Status::PrimalInfeasible);
    CHECK_FALSE(s.usable());
  }

  TEST_CASE("dual slack is PSD at the optimum") {
    RMatrix c(4, 4);
    c << 1, 0.2, 0, 0.1, 0.2, -0.5, 0.3, 0, 0, 0.3, 0.7, 0.4, 0.1, 0, 0.4, 0.2;
    const sdp::Solution s = sdp::solve(min_eigenvalue_problem(c));
    REQUIRE(s.usable());
    const RMatrix z = c - s.y(0) * RMatrix::Identity(4, 4);
    CHECK(Eigen::SelfAdjointEigenSolver<RMatrix>(z).eigenvalues()(0) >= -1e-9);
  }

  TEST_CASE("validate rejects malformed problems") {
    sdp::Problem p = min_eigenvalue_problem(RMatrix::Identity(2, 2));
    p.rows[0].psd = {RMatrix::Identity(3, 3)};
    CHECK_THROWS_AS(p.validate(), Error);
    sdp::Problem q = min_eigenvalue_problem(RMatrix::Identity(2, 2));
    q.c_psd.clear();
    CHECK_THROWS_AS(sdp::solve(q), Error);
  }

  TEST_CASE("status names") {
    CHECK(std::string(sdp::to_string(sdp::Status::Optimal)) == "optimal");
    CHECK(std::string(sdp::to_string(sdp::Status::PrimalInfeasible)).size() > 0);
  }
}
