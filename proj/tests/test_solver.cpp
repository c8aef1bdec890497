#include <doctest.h>

#include <random>

#include "marisac/conic.hpp"
#include "marisac/hermitian.hpp"
#include "oracles.hpp"

using namespace marisac;

namespace {

// symmetric n x n variable: x holds svec(X) directly
ConicProgram symmetric_var_program(int n) {
  ConicProgram p(svec_dim(n));
  PsdConstraint blk;
  blk.dim = n;
  blk.coeffs = Mat::Identity(svec_dim(n), svec_dim(n));
  blk.offset = Vec::Zero(svec_dim(n));
  p.psd.push_back(blk);
  return p;
}

Vec trace_row_symmetric(int n) {
  Vec row = Vec::Zero(svec_dim(n));
  for (int i = 0; i < n; ++i) row[svec_index(i, i, n)] = 1.0;
  return row;
}

}  // namespace

TEST_CASE("svec round trip preserves inner products") {
  auto g = oracles::rng(7);
  std::normal_distribution<double> n01(0.0, 1.0);
  for (int n : {1, 2, 5}) {
    Mat a(n, n), b(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        a(i, j) = n01(g);
        b(i, j) = n01(g);
      }
    }
    a = (0.5 * (a + a.transpose())).eval();
    b = (0.5 * (b + b.transpose())).eval();
    CHECK((smat(svec(a), n) - a).norm() < 1e-14);
    CHECK(svec(a).dot(svec(b)) == doctest::Approx((a * b).trace()).epsilon(1e-12));
  }
}

TEST_CASE("hermitian embedding: identity") {
  const CMat x = CMat::Identity(3, 3);
  CHECK((hermitian_to_real_embedding(x) - Mat::Identity(6, 6)).norm() < 1e-15);
}

TEST_CASE("hermitian embedding: pauli-like matrix has doubled +-1 eigenvalues") {
  CMat x(2, 2);
  x << Complex(0, 0), Complex(0, 1), Complex(0, -1), Complex(0, 0);
  const Mat y = hermitian_to_real_embedding(x);
  Eigen::SelfAdjointEigenSolver<Mat> eig(y);
  Vec ev = eig.eigenvalues();
  CHECK(ev[0] == doctest::Approx(-1.0));
  CHECK(ev[1] == doctest::Approx(-1.0));
  CHECK(ev[2] == doctest::Approx(1.0));
  CHECK(ev[3] == doctest::Approx(1.0));
}

TEST_CASE("hermitian embedding: eigenvalue multiset doubles, trace doubles, round trip") {
  auto g = oracles::rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + static_cast<int>(trial % 4);
    const CMat x = oracles::random_hermitian(g, n);
    const Mat y = hermitian_to_real_embedding(x);
    CHECK(y.trace() == doctest::Approx(2.0 * std::real(x.trace())).epsilon(1e-12));

    Eigen::SelfAdjointEigenSolver<CMat> ex(x);
    Eigen::SelfAdjointEigenSolver<Mat> ey(y);
    for (int i = 0; i < n; ++i) {
      CHECK(ey.eigenvalues()[2 * i] == doctest::Approx(ex.eigenvalues()[i]).epsilon(1e-10));
      CHECK(ey.eigenvalues()[2 * i + 1] == doctest::Approx(ex.eigenvalues()[i]).epsilon(1e-10));
    }
    CHECK((real_embedding_to_hermitian(y) - x).norm() < 1e-12 * std::max(1.0, x.norm()));
  }
  CHECK_THROWS_AS(hermitian_to_real_embedding(CMat::Random(3, 3)), std::invalid_argument);
}

TEST_CASE("leading_eigvec basics") {
  {
    CMat x = CMat::Zero(2, 2);
    x(0, 0) = 3.0;
    x(1, 1) = 1.0;
    auto [lmax, u] = leading_eigvec(x);
    CHECK(lmax == doctest::Approx(3.0));
    CHECK(std::abs(u[0]) == doctest::Approx(1.0));
  }
  {
    auto g = oracles::rng(3);
    CVec v(4);
    for (int i = 0; i < 4; ++i) v[i] = oracles::unit_complex(g) * oracles::uniform(g, 0.1, 2.0);
    const CMat x = v * v.adjoint();
    auto [lmax, u] = leading_eigvec(x);
    CHECK(lmax == doctest::Approx(v.squaredNorm()).epsilon(1e-10));
    CHECK(std::abs(Complex(u.adjoint() * (v / v.norm()))) == doctest::Approx(1.0).epsilon(1e-10));
  }
  {
    auto g = oracles::rng(4);
    for (int trial = 0; trial < 10; ++trial) {
      const CMat x = oracles::random_psd(g, 5);
      auto [lmax, u] = leading_eigvec(x);
      CHECK(u.norm() == doctest::Approx(1.0).epsilon(1e-12));
      CHECK((x * u - lmax * u).norm() <= 1e-8 * x.norm());
    }
  }
}

TEST_CASE("solve_sdp: min tr(X) with X11 pinned") {
  ConicProgram p = symmetric_var_program(3);
  p.objective = trace_row_symmetric(3);
  Vec pin = Vec::Zero(p.num_vars);
  pin[svec_index(0, 0, 3)] = 1.0;
  p.add_equality(pin, 1.0);
  const SolverReport rep = solve_sdp(p);
  REQUIRE(rep.status == SolveStatus::kOptimal);
  CHECK(rep.objective == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(rep.max_violation < 1e-6);
}

TEST_CASE("solve_sdp: max tr(CX) over trace ball equals lambda_max") {
  auto g = oracles::rng(21);
  std::normal_distribution<double> n01(0.0, 1.0);
  for (int trial = 0; trial < 8; ++trial) {
    const int n = 2 + trial % 3;
    Mat c(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) c(i, j) = n01(g);
    }
    c = (0.5 * (c + c.transpose())).eval();

    ConicProgram p = symmetric_var_program(n);
    p.maximize = true;
    p.objective = svec(c);  // tr(CX) = svec(C).svec(X)
    p.add_inequality(trace_row_symmetric(n), 1.0);
    const SolverReport rep = solve_sdp(p);
    REQUIRE(rep.status == SolveStatus::kOptimal);
    Eigen::SelfAdjointEigenSolver<Mat> eig(c);
    const double lmax = std::max(eig.eigenvalues().maxCoeff(), 0.0);
    CHECK(rep.objective == doctest::Approx(lmax).epsilon(1e-6));
  }
}

TEST_CASE("solve_sdp: random 2x2 against grid oracle") {
  auto g = oracles::rng(33);
  std::normal_distribution<double> n01(0.0, 1.0);
  for (int trial = 0; trial < 6; ++trial) {
    Mat c(2, 2);
    c << n01(g), 0.0, 0.0, n01(g);
    c(0, 1) = c(1, 0) = n01(g);

    ConicProgram p = symmetric_var_program(2);
    p.maximize = true;
    p.objective = svec(c);
    p.add_inequality(trace_row_symmetric(2), 1.0);
    const SolverReport rep = solve_sdp(p);
    REQUIRE(rep.status == SolveStatus::kOptimal);
    CHECK(rep.objective == doctest::Approx(oracles::max_trace_psd_2x2(c)).epsilon(2e-5));
  }
}

TEST_CASE("solve_sdp: infeasible and unbounded programs reported distinctly") {
  {
    // X PSD, X11 = -1 is impossible
    ConicProgram p = symmetric_var_program(2);
    p.objective = trace_row_symmetric(2);
    Vec pin = Vec::Zero(p.num_vars);
    pin[svec_index(0, 0, 2)] = 1.0;
    p.add_equality(pin, -1.0);
    CHECK(solve_sdp(p).status == SolveStatus::kInfeasible);
  }
  {
    // conflicting scalar bounds: x <= -1, x >= 0 (as 1x1 PSD)
    ConicProgram p(1);
    p.objective[0] = 1.0;
    p.add_inequality(Vec::Ones(1), -1.0);
    PsdConstraint blk;
    blk.dim = 1;
    blk.coeffs = Mat::Identity(1, 1);
    blk.offset = Vec::Zero(1);
    p.psd.push_back(blk);
    CHECK(solve_sdp(p).status == SolveStatus::kInfeasible);
  }
  {
    // maximize x with only x >= 0
    ConicProgram p(1);
    p.maximize = true;
    p.objective[0] = 1.0;
    p.add_lower_bound(Vec::Ones(1), 0.0);
    const auto rep = solve_sdp(p);
    CHECK(rep.status == SolveStatus::kUnbounded);
  }
}

TEST_CASE("solve_sdp: hermitian variable via embedding") {
  // max tr(CX) s.t. tr(X) <= 1, X hermitian PSD -> lambda_max(C)
  auto g = oracles::rng(55);
  for (int trial = 0; trial < 5; ++trial) {
    const int n = 2 + trial % 3;
    const CMat c = oracles::random_hermitian(g, n);
    HermitianVariable var{n, 0};
    ConicProgram p(var.param_count());
    p.maximize = true;
    p.objective = var.trace_row(c, p.num_vars);
    p.add_inequality(var.trace_row(p.num_vars), 1.0);
    p.psd.push_back(embedded_psd_block(p.num_vars, {{&var, 1.0}}, CMat()));
    const SolverReport rep = solve_sdp(p);
    REQUIRE(rep.status == SolveStatus::kOptimal);
    Eigen::SelfAdjointEigenSolver<CMat> eig(c);
    const double lmax = std::max(eig.eigenvalues().maxCoeff(), 0.0);
    CHECK(rep.objective == doctest::Approx(lmax).epsilon(1e-6));
    // recovered matrix is PSD and hermitian by construction
    const CMat x = var.value(rep.solution);
    Eigen::SelfAdjointEigenSolver<CMat> ex(x);
    CHECK(ex.eigenvalues().minCoeff() > -1e-7);
  }
}

TEST_CASE("solve_qcp: epigraph examples") {
  {
    ConicProgram p(1);
    p.maximize = true;
    p.objective[0] = 1.0;
    p.add_inequality(Vec::Ones(1), 3.0);
    const auto rep = solve_qcp(p);
    REQUIRE(rep.status == SolveStatus::kOptimal);
    CHECK(rep.objective == doctest::Approx(3.0).epsilon(1e-7));
  }
  {
    // max chi s.t. chi <= 1 - |t - t0|^2, t free -> chi = 1 at t = t0
    const Vec2 t0(0.7, -0.3);
    ConicProgram p(3);  // t1 t2 chi
    p.maximize = true;
    p.objective[2] = 1.0;
    QuadraticConstraint q;
    q.quadratic = Mat::Zero(3, 3);
    q.quadratic(0, 0) = q.quadratic(1, 1) = 1.0;
    q.linear = Vec::Zero(3);
    q.linear[0] = -2.0 * t0.x();
    q.linear[1] = -2.0 * t0.y();
    q.linear[2] = 1.0;
    q.rhs = 1.0 - t0.squaredNorm();
    p.quadratic.push_back(q);
    const auto rep = solve_qcp(p);
    REQUIRE(rep.status == SolveStatus::kOptimal);
    CHECK(rep.objective == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(rep.solution[0] == doctest::Approx(t0.x()).epsilon(1e-4));
    CHECK(rep.solution[1] == doctest::Approx(t0.y()).epsilon(1e-4));
  }
}

TEST_CASE("solve_qcp: random concave-quadratic instances against grid search") {
  auto g = oracles::rng(77);
  for (int trial = 0; trial < 5; ++trial) {
    // max chi s.t. chi <= q_i(t) for three random concave quadratics, |t| <= 1 box
    std::vector<oracles::Quad2D> quads;
    for (int i = 0; i < 3; ++i) {
      oracles::Quad2D q;
      q.delta = oracles::uniform(g, 0.5, 4.0);
      q.lin = Vec2(oracles::uniform(g, -1, 1), oracles::uniform(g, -1, 1));
      q.constant = oracles::uniform(g, 0.0, 2.0);
      quads.push_back(q);
    }
    ConicProgram p(3);
    p.maximize = true;
    p.objective[2] = 1.0;
    for (const auto& q : quads) {
      QuadraticConstraint qc;  // chi - q(t) <= 0
      qc.quadratic = Mat::Zero(3, 3);
      qc.quadratic(0, 0) = qc.quadratic(1, 1) = 0.5 * q.delta;
      qc.linear = Vec::Zero(3);
      qc.linear[0] = -q.lin.x();
      qc.linear[1] = -q.lin.y();
      qc.linear[2] = 1.0;
      qc.rhs = q.constant;
      p.quadratic.push_back(qc);
    }
    for (int i = 0; i < 2; ++i) {
      Vec row = Vec::Zero(3);
      row[i] = 1.0;
      p.add_inequality(row, 1.0);
      p.add_inequality(-row, 1.0);
    }
    const auto rep = solve_qcp(p);
    REQUIRE(rep.status == SolveStatus::kOptimal);

    double best = -1e300;
    const int grid = 400;
    for (int ix = 0; ix <= grid; ++ix) {
      for (int iy = 0; iy <= grid; ++iy) {
        const Vec2 t(-1.0 + 2.0 * ix / grid, -1.0 + 2.0 * iy / grid);
        double val = 1e300;
        for (const auto& q : quads) val = std::min(val, q.value(t));
        best = std::max(best, val);
      }
    }
    CHECK(rep.objective == doctest::Approx(best).epsilon(2e-3));
    CHECK(rep.max_violation < 1e-6);
  }
}

TEST_CASE("property: optimal solves satisfy constraints within 1e-6 when re-checked") {
  auto g = oracles::rng(91);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 3;
    const CMat c = oracles::random_hermitian(g, n);
    HermitianVariable var{n, 0};
    ConicProgram p(var.param_count());
    p.maximize = true;
    p.objective = var.trace_row(c, p.num_vars);
    p.add_inequality(var.trace_row(p.num_vars), oracles::uniform(g, 0.5, 3.0));
    // a couple of random linear functionals pinned
    const CMat f = oracles::random_hermitian(g, n);
    p.add_inequality(var.trace_row(f, p.num_vars), oracles::uniform(g, 0.1, 1.0));
    p.psd.push_back(embedded_psd_block(p.num_vars, {{&var, 1.0}}, CMat()));
    const SolverReport rep = solve_sdp(p);
    REQUIRE(rep.status == SolveStatus::kOptimal);
    CHECK(rep.max_violation <= 1e-6);
    // complex-domain re-check
    const CMat x = var.value(rep.solution);
    Eigen::SelfAdjointEigenSolver<CMat> eig(x);
    CHECK(eig.eigenvalues().minCoeff() >= -1e-6);
  }
}
