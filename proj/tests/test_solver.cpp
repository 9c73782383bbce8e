// SPDX-License-Identifier: Apache-2.0

#include "fdci/solver.hpp"

#include <doctest.h>

#include <random>

using namespace fdci::conic;

namespace {

ConicBlock identity_block(ConeType cone, const VarSpan& s, const VectorXd& offset, int psd_dim = 0) {
  ConicBlock b;
  b.cone = cone;
  b.rows = static_cast<int>(offset.size());
  b.psd_dim = psd_dim;
  b.vars.resize(s.size);
  for (int i = 0; i < s.size; ++i) b.vars[i] = s.start + i;
  b.coeffs = MatrixXd::Identity(b.rows, s.size);
  b.offset = offset;
  return b;
}

}  // namespace

TEST_CASE("1-D LP: min x s.t. x >= 3") {
  ConicProblem p;
  auto xs = p.add_variables("x", 1);
  p.add_cost(xs.start, 1.0);
  VectorXd off(1);
  off << -3.0;
  p.add_block(identity_block(ConeType::NonNeg, xs, off));
  auto sol = solve(p);
  REQUIRE(sol.status == SolveStatus::Optimal);
  CHECK(sol.x[0] == doctest::Approx(3.0).epsilon(1e-7));
  CHECK(sol.objective == doctest::Approx(3.0).epsilon(1e-7));
}

TEST_CASE("norm epigraph: min t s.t. ||(1,2)|| <= t") {
  ConicProblem p;
  auto ts = p.add_variables("t", 1);
  p.add_cost(ts.start, 1.0);
  ConicBlock b;
  b.cone = ConeType::Soc;
  b.rows = 3;
  b.vars = {ts.start};
  b.coeffs = MatrixXd::Zero(3, 1);
  b.coeffs(0, 0) = 1.0;
  b.offset.resize(3);
  b.offset << 0.0, 1.0, 2.0;
  p.add_block(b);
  auto sol = solve(p);
  REQUIRE(sol.status == SolveStatus::Optimal);
  CHECK(sol.objective == doctest::Approx(std::sqrt(5.0)).epsilon(1e-7));
}

TEST_CASE("PSD floor: min tr(X) s.t. X >= I2") {
  ConicProblem p;
  auto xs = p.add_variables("X", svec_dim(2));
  // X parameterized directly by its svec; objective = tr = svec(I).x
  p.add_cost(xs, svec(MatrixXd::Identity(2, 2)));
  // X - I in PSD
  p.add_block(identity_block(ConeType::Psd, xs, svec(-MatrixXd::Identity(2, 2)), 2));
  // X itself PSD (keeps problem bounded in all directions)
  p.add_block(identity_block(ConeType::Psd, xs, VectorXd::Zero(3), 2));
  auto sol = solve(p);
  REQUIRE(sol.status == SolveStatus::Optimal);
  CHECK(sol.objective == doctest::Approx(2.0).epsilon(1e-6));
}

TEST_CASE("rotated cone: min u s.t. ||(1,2)||^2 <= u * 1") {
  ConicProblem p;
  auto us = p.add_variables("u", 1);
  p.add_cost(us.start, 1.0);
  ConicBlock b;
  b.cone = ConeType::RotatedSoc;
  b.rows = 4;
  b.vars = {us.start};
  b.coeffs = MatrixXd::Zero(4, 1);
  b.coeffs(0, 0) = 1.0;
  b.offset.resize(4);
  b.offset << 0.0, 1.0, 1.0, 2.0;
  p.add_block(b);
  auto sol = solve(p);
  REQUIRE(sol.status == SolveStatus::Optimal);
  CHECK(sol.objective == doctest::Approx(5.0).epsilon(1e-7));
}

TEST_CASE("equalities: min x+2y s.t. x+y=1, x,y >= 0") {
  ConicProblem p;
  auto xs = p.add_variables("xy", 2);
  p.add_cost(xs.start, 1.0);
  p.add_cost(xs.start + 1, 2.0);
  BlockBuilder eq(ConeType::Zero, 2, "sum");
  RowBuilder r(2);
  r.set(0, 1.0).set(1, 1.0);
  eq.add_row(r.coeffs(), -1.0);
  p.add_block(eq.build());
  p.add_block(identity_block(ConeType::NonNeg, xs, VectorXd::Zero(2)));
  auto sol = solve(p);
  REQUIRE(sol.status == SolveStatus::Optimal);
  CHECK(sol.objective == doctest::Approx(1.0).epsilon(1e-7));
  CHECK(sol.x[0] == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("infeasible LP yields certificate-backed status") {
  ConicProblem p;
  auto xs = p.add_variables("x", 1);
  p.add_cost(xs.start, 1.0);
  VectorXd off(1);
  off << -3.0;
  p.add_block(identity_block(ConeType::NonNeg, xs, off));  // x >= 3
  BlockBuilder ub(ConeType::NonNeg, 1, "ub");
  RowBuilder r(1);
  r.set(0, -1.0);
  ub.add_row(r.coeffs(), 2.0);  // 2 - x >= 0
  p.add_block(ub.build());
  auto sol = solve(p);
  CHECK(sol.status == SolveStatus::Infeasible);
}

TEST_CASE("unbounded LP detected") {
  ConicProblem p;
  auto xs = p.add_variables("x", 1);
  p.add_cost(xs.start, 1.0);
  BlockBuilder ub(ConeType::NonNeg, 1, "ub");
  RowBuilder r(1);
  r.set(0, -1.0);
  ub.add_row(r.coeffs(), 0.0);  // -x >= 0
  p.add_block(ub.build());
  auto sol = solve(p);
  CHECK(sol.status == SolveStatus::Unbounded);
}

TEST_CASE("largest eigenvalue via LMI") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g;
  for (int rep = 0; rep < 5; ++rep) {
    const int d = 3 + static_cast<int>(rng() % 3);
    MatrixXd M(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) M(i, j) = g(rng);
    const MatrixXd S = (M + M.transpose()) / 2;
    ConicProblem p;
    auto ts = p.add_variables("t", 1);
    p.add_cost(ts.start, 1.0);
    ConicBlock b;
    b.cone = ConeType::Psd;
    b.psd_dim = d;
    b.rows = svec_dim(d);
    b.vars = {ts.start};
    b.coeffs = svec(MatrixXd::Identity(d, d));
    b.offset = svec(-S);
    p.add_block(b);
    auto sol = solve(p);
    REQUIRE(sol.status == SolveStatus::Optimal);
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(S, Eigen::EigenvaluesOnly);
    CHECK(sol.objective == doctest::Approx(es.eigenvalues().maxCoeff()).epsilon(1e-6));
  }
}

TEST_CASE("projection onto affine set matches closed form") {
  std::mt19937_64 rng(13);
  std::normal_distribution<double> g;
  for (int rep = 0; rep < 5; ++rep) {
    const int n = 6, k = 2;
    VectorXd a(n);
    MatrixXd B(k, n);
    VectorXd d(k);
    for (int i = 0; i < n; ++i) a[i] = g(rng);
    for (int i = 0; i < k; ++i) {
      d[i] = g(rng);
      for (int j = 0; j < n; ++j) B(i, j) = g(rng);
    }
    // min t s.t. ||x - a|| <= t, B x = d
    ConicProblem p;
    auto xs = p.add_variables("x", n);
    auto ts = p.add_variables("t", 1);
    p.add_cost(ts.start, 1.0);
    BlockBuilder eq(ConeType::Zero, n + 1, "affine");
    for (int i = 0; i < k; ++i) {
      RowBuilder r(n + 1);
      for (int j = 0; j < n; ++j) r.set(xs.start + j, B(i, j));
      eq.add_row(r.coeffs(), -d[i]);
    }
    p.add_block(eq.build());
    BlockBuilder soc(ConeType::Soc, n + 1, "dist");
    {
      RowBuilder r(n + 1);
      r.set(ts.start, 1.0);
      soc.add_row(r.coeffs(), 0.0);
    }
    for (int j = 0; j < n; ++j) {
      RowBuilder r(n + 1);
      r.set(xs.start + j, 1.0);
      soc.add_row(r.coeffs(), -a[j]);
    }
    p.add_block(soc.build());

    auto sol = solve(p);
    REQUIRE(sol.status == SolveStatus::Optimal);
    const VectorXd xstar =
        a + B.transpose() * (B * B.transpose()).ldlt().solve(d - B * a);
    CHECK(sol.objective == doctest::Approx((xstar - a).norm()).epsilon(1e-6));
    CHECK((sol.x.head(n) - xstar).norm() < 1e-5 * (1 + xstar.norm()));
  }
}

TEST_CASE("round trip: objective recomputed from x matches") {
  ConicProblem p;
  auto xs = p.add_variables("x", 3);
  p.add_cost(xs.start, 1.0);
  p.add_cost(xs.start + 1, 0.5);
  p.add_cost(xs.start + 2, 2.0);
  VectorXd off(3);
  off << -1.0, -2.0, -0.5;
  p.add_block(identity_block(ConeType::NonNeg, xs, off));
  auto sol = solve(p);
  REQUIRE(sol.status == SolveStatus::Optimal);
  CHECK(p.cost(sol.x) == doctest::Approx(sol.objective).epsilon(1e-8));
  CHECK(p.worst_residual(sol.x) <= 1e-7);
}

TEST_CASE("mixed cones in one problem") {
  // min x0 + tr(X)  s.t.  x0 >= 1, ||(x0, 1)|| <= x1, X >= diag(x0, 1)
  ConicProblem p;
  auto xs = p.add_variables("x", 2);
  auto Xs = p.add_variables("X", svec_dim(2));
  p.add_cost(xs.start, 1.0);
  p.add_cost(Xs, svec(MatrixXd::Identity(2, 2)));
  {
    BlockBuilder bb(ConeType::NonNeg, p.num_vars(), "lb");
    RowBuilder r(p.num_vars());
    r.set(xs.start, 1.0);
    bb.add_row(r.coeffs(), -1.0);
    p.add_block(bb.build());
  }
  {
    BlockBuilder bb(ConeType::Soc, p.num_vars(), "soc");
    RowBuilder h(p.num_vars());
    h.set(xs.start + 1, 1.0);
    bb.add_row(h.coeffs(), 0.0);
    RowBuilder t1(p.num_vars());
    t1.set(xs.start, 1.0);
    bb.add_row(t1.coeffs(), 0.0);
    bb.add_row(RowBuilder(p.num_vars()).coeffs(), 1.0);
    p.add_block(bb.build());
  }
  {
    BlockBuilder bb(ConeType::Psd, p.num_vars(), "lmi");
    MatrixXd E00 = MatrixXd::Zero(2, 2);
    E00(0, 0) = 1.0;
    // rows of svec(X - diag(x0, 1))
    const VectorXd sX1 = svec(MatrixXd::Identity(2, 2) - MatrixXd::Identity(2, 2));
    for (int rrow = 0; rrow < 3; ++rrow) {
      RowBuilder r(p.num_vars());
      r.set(Xs.start + rrow, 1.0);
      const VectorXd e0 = svec(E00);
      VectorXd dia(3);
      dia = svec(MatrixXd::Identity(2, 2));
      r.add(xs.start, -e0[rrow]);
      double off = -(dia[rrow] - e0[rrow]);  // constant part -diag(0,1)
      bb.add_row(r.coeffs(), off);
    }
    bb.set_psd_dim(2);
    p.add_block(bb.build());
  }
  auto sol = solve(p);
  REQUIRE(sol.status == SolveStatus::Optimal);
  // at optimum x0 = 1, X = diag(1,1): objective 1 + 2 = 3
  CHECK(sol.objective == doctest::Approx(3.0).epsilon(1e-6));
  CHECK(p.worst_residual(sol.x) <= 1e-7);
}

TEST_CASE("badly scaled data is handled by equilibration") {
  ConicProblem p;
  auto xs = p.add_variables("x", 1);
  p.add_cost(xs.start, 1.0);
  VectorXd off(1);
  off << -1e6;
  p.add_block(identity_block(ConeType::NonNeg, xs, off));
  auto sol = solve(p);
  REQUIRE(sol.status == SolveStatus::Optimal);
  CHECK(sol.objective == doctest::Approx(1e6).epsilon(1e-7));
}

TEST_CASE("LP duality sanity: boxed LP equals closed form") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.5, 2.0);
  const int n = 8;
  ConicProblem p;
  auto xs = p.add_variables("x", n);
  VectorXd c(n), l(n);
  for (int i = 0; i < n; ++i) {
    c[i] = u(rng);
    l[i] = u(rng);
    p.add_cost(xs.start + i, c[i]);
  }
  p.add_block(identity_block(ConeType::NonNeg, xs, -l));
  auto sol = solve(p);
  REQUIRE(sol.status == SolveStatus::Optimal);
  CHECK(sol.objective == doctest::Approx(c.dot(l)).epsilon(1e-7));
}
