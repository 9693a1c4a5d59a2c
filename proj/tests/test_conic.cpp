// Copyright 2025 The PEPForge Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>
#include <random>

#include "doctest.h"
#include "pepforge/conic.hpp"

namespace pc = pepforge::conic;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

// rhs - Mx in cone; append helpers keep the tests close to math notation.
void add_row(pc::ConeProgram* p, int row, std::vector<std::pair<int, double>> coeffs,
             double rhs = 0.0) {
  for (auto [col, val] : coeffs) p->rows.push_back({row, col, val});
  if (rhs != 0.0) p->rhs.emplace_back(row, rhs);
}

MatrixXd random_spd(int n, unsigned seed) {
  std::mt19937 gen(seed);
  std::normal_distribution<double> dist;
  MatrixXd B(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) B(i, j) = dist(gen);
  return B * B.transpose() + n * MatrixXd::Identity(n, n);
}

}  // namespace

TEST_SUITE("conic") {
  TEST_CASE("svec smat round trip is an isometry") {
    std::mt19937 gen(7);
    std::normal_distribution<double> dist;
    const int n = 10;
    MatrixXd A(n, n), B(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j <= i; ++j) {
        A(i, j) = A(j, i) = dist(gen);
        B(i, j) = B(j, i) = dist(gen);
      }
    VectorXd va = pepforge::conic::svec(A), vb = pepforge::conic::svec(B);
    double frob = (A * B.transpose()).trace();
    CHECK(std::abs(va.dot(vb) - frob) <= 1e-12 * std::abs(frob));
    MatrixXd back = pepforge::conic::smat(va);
    CHECK((back - A).norm() <= 1e-12 * A.norm());
    CHECK(pepforge::conic::svec_side(55) == 10);
    CHECK(pepforge::conic::svec_side(54) == -1);
  }

  TEST_CASE("one nonnegative variable") {
    // min x s.t. x >= 0: row is 0 - (-x) = x in nonneg cone
    pc::ConeProgram p;
    p.nvar = 1;
    p.objective = {{0, 1.0}};
    add_row(&p, 0, {{0, -1.0}});
    p.cones = {{pc::ConeKind::nonneg, 0, 1}};
    auto sol = pc::solve(p, 1e-8);
    REQUIRE(sol.status == pc::SolveStatus::optimal);
    CHECK(std::abs(sol.x[0]) <= 1e-7);
    CHECK(std::abs(sol.primal_objective) <= 1e-7);
  }

  TEST_CASE("bounded linear program with equality") {
    // min -x1 - 2 x2  s.t.  x1 + x2 = 1, x >= 0  ->  x = (0, 1), obj -2
    pc::ConeProgram p;
    p.nvar = 2;
    p.objective = {{0, -1.0}, {1, -2.0}};
    add_row(&p, 0, {{0, 1.0}, {1, 1.0}}, 1.0);
    add_row(&p, 1, {{0, -1.0}});
    add_row(&p, 2, {{1, -1.0}});
    p.cones = {{pc::ConeKind::zero, 0, 1}, {pc::ConeKind::nonneg, 1, 2}};
    auto sol = pc::solve(p, 1e-8);
    REQUIRE(sol.status == pc::SolveStatus::optimal);
    CHECK(sol.x[0] == doctest::Approx(0.0).epsilon(1e-6));
    CHECK(sol.x[1] == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(sol.primal_objective == doctest::Approx(-2.0).epsilon(1e-7));
    CHECK(std::abs(sol.primal_objective - sol.dual_objective) <= 1e-6);
    // duals satisfy M'z + c = 0 and -rhs.z equals the optimal value
    CHECK(sol.z[0] == doctest::Approx(2.0).epsilon(1e-5));
    CHECK(sol.z[1] == doctest::Approx(1.0).epsilon(1e-4));
    CHECK(std::abs(sol.z[2]) <= 1e-5);
  }

  TEST_CASE("largest eigenvalue as a psd program") {
    // min t s.t. t I - M psd, M = diag(1, 2) rotated; answer lambda_max
    MatrixXd Q(2, 2);
    double th = 0.7;
    Q << std::cos(th), -std::sin(th), std::sin(th), std::cos(th);
    MatrixXd M = Q * Eigen::Vector2d(1.0, 2.0).asDiagonal() * Q.transpose();
    pc::ConeProgram p;
    p.nvar = 1;
    p.objective = {{0, 1.0}};
    // svec(tI - M) = t svec(I) - svec(M): rows are svec(M) - (-svec(I)) t... hold
    // rhs_k - (Mx)_k: rhs = -svec(M), coeff of t = -svec(I)
    VectorXd vm = pc::svec(M);
    VectorXd vi = pc::svec(MatrixXd::Identity(2, 2));
    for (int k = 0; k < 3; ++k) {
      p.rows.push_back({k, 0, -vi[k]});
      if (vm[k] != 0.0) p.rhs.emplace_back(k, -vm[k]);
    }
    p.cones = {{pc::ConeKind::psd, 0, 3}};
    auto sol = pc::solve(p, 1e-8);
    REQUIRE(sol.status == pc::SolveStatus::optimal);
    CHECK(sol.x[0] == doctest::Approx(2.0).epsilon(1e-7));
    // the psd dual block is the unit eigenvector outer product
    MatrixXd Zm = pc::smat(sol.z);
    CHECK(Zm.trace() == doctest::Approx(1.0).epsilon(1e-6));
    CHECK((Zm * M - 2.0 * Zm).norm() <= 1e-5);
  }

  TEST_CASE("second order cone projection") {
    // min t s.t. (t, x - a) in SOC, x free 2d, a = (3, 4): optimum t = 0 at x=a
    pc::ConeProgram p;
    p.nvar = 3;  // t, x1, x2
    p.objective = {{0, 1.0}};
    add_row(&p, 0, {{0, -1.0}});
    add_row(&p, 1, {{1, -1.0}}, 3.0 * -1.0);
    add_row(&p, 2, {{2, -1.0}}, 4.0 * -1.0);
    p.cones = {{pc::ConeKind::second_order, 0, 3}};
    auto sol = pc::solve(p, 1e-8);
    REQUIRE(sol.status == pc::SolveStatus::optimal);
    CHECK(std::abs(sol.x[0]) <= 1e-6);
    CHECK(sol.x[1] == doctest::Approx(3.0).epsilon(1e-6));
    CHECK(sol.x[2] == doctest::Approx(4.0).epsilon(1e-6));

    // anchored variant: min t s.t. (t, c - x) in SOC and x = 0 -> t = |c|
    pc::ConeProgram q;
    q.nvar = 3;
    q.objective = {{0, 1.0}};
    add_row(&q, 0, {{0, -1.0}});
    add_row(&q, 1, {{1, 1.0}}, 3.0);
    add_row(&q, 2, {{2, 1.0}}, 4.0);
    add_row(&q, 3, {{1, 1.0}});
    add_row(&q, 4, {{2, 1.0}});
    q.cones = {{pc::ConeKind::second_order, 0, 3}, {pc::ConeKind::zero, 3, 2}};
    auto sq = pc::solve(q, 1e-8);
    REQUIRE(sq.status == pc::SolveStatus::optimal);
    CHECK(sq.x[0] == doctest::Approx(5.0).epsilon(1e-7));
  }

  TEST_CASE("mixed cones agree on a least squares bound") {
    // min t s.t. t >= |x - a| (SOC), x >= b elementwise, a = (1,1), b = (2,3)
    // optimum x = b, t = |b - a| = sqrt(5)
    pc::ConeProgram p;
    p.nvar = 3;
    p.objective = {{0, 1.0}};
    add_row(&p, 0, {{0, -1.0}});
    add_row(&p, 1, {{1, -1.0}}, -1.0);
    add_row(&p, 2, {{2, -1.0}}, -1.0);
    add_row(&p, 3, {{1, -1.0}}, -2.0);
    add_row(&p, 4, {{2, -1.0}}, -3.0);
    p.cones = {{pc::ConeKind::second_order, 0, 3}, {pc::ConeKind::nonneg, 3, 2}};
    auto sol = pc::solve(p, 1e-8);
    REQUIRE(sol.status == pc::SolveStatus::optimal);
    CHECK(sol.x[0] == doctest::Approx(std::sqrt(5.0)).epsilon(1e-6));
    CHECK(sol.x[1] == doctest::Approx(2.0).epsilon(1e-6));
    CHECK(sol.x[2] == doctest::Approx(3.0).epsilon(1e-6));
  }

  TEST_CASE("infeasible program is flagged") {
    // x >= 1 and -x >= 0 cannot hold together
    pc::ConeProgram p;
    p.nvar = 1;
    p.objective = {{0, 1.0}};
    add_row(&p, 0, {{0, -1.0}}, -1.0);
    add_row(&p, 1, {{0, 1.0}});
    p.cones = {{pc::ConeKind::nonneg, 0, 2}};
    auto sol = pc::solve(p, 1e-8);
    CHECK(sol.status == pc::SolveStatus::infeasible);
  }

  TEST_CASE("unbounded program is flagged") {
    pc::ConeProgram p;
    p.nvar = 1;
    p.objective = {{0, -1.0}};
    add_row(&p, 0, {{0, -1.0}});
    p.cones = {{pc::ConeKind::nonneg, 0, 1}};
    auto sol = pc::solve(p, 1e-8);
    CHECK(sol.status == pc::SolveStatus::unbounded);
  }

  TEST_CASE("solver is deterministic") {
    MatrixXd Q(2, 2);
    Q << std::cos(0.3), -std::sin(0.3), std::sin(0.3), std::cos(0.3);
    MatrixXd M = Q * Eigen::Vector2d(0.5, 1.5).asDiagonal() * Q.transpose();
    pc::ConeProgram p;
    p.nvar = 1;
    p.objective = {{0, 1.0}};
    VectorXd vm = pc::svec(M), vi = pc::svec(MatrixXd::Identity(2, 2));
    for (int k = 0; k < 3; ++k) {
      p.rows.push_back({k, 0, -vi[k]});
      p.rhs.emplace_back(k, -vm[k]);
    }
    p.cones = {{pc::ConeKind::psd, 0, 3}};
    auto a = pc::solve(p, 1e-8);
    auto b = pc::solve(p, 1e-8);
    REQUIRE(a.status == pc::SolveStatus::optimal);
    CHECK(a.x[0] == b.x[0]);
    CHECK((a.z - b.z).norm() == 0.0);
    CHECK(a.iterations == b.iterations);
  }

  TEST_CASE("nesterov todd identities hold on random interior points") {
    // one block of each kind; s, z strictly interior by construction
    pc::ConeProgram p;
    p.nvar = 1;
    p.rows.push_back({0, 0, 1.0});
    p.cones = {{pc::ConeKind::nonneg, 0, 3},
               {pc::ConeKind::second_order, 3, 4},
               {pc::ConeKind::psd, 7, 10}};
    std::mt19937 gen(11);
    std::uniform_real_distribution<double> pos(0.5, 2.0);
    std::normal_distribution<double> dist;
    for (int rep = 0; rep < 5; ++rep) {
      VectorXd s(17), z(17);
      for (int i = 0; i < 3; ++i) {
        s[i] = pos(gen);
        z[i] = pos(gen);
      }
      for (auto* v : {&s, &z}) {
        VectorXd bar(3);
        for (int i = 0; i < 3; ++i) bar[i] = dist(gen);
        (*v)[3] = bar.norm() + pos(gen);
        (*v).segment(4, 3) = bar;
      }
      s.segment(7, 10) = pc::svec(random_spd(4, 100 + rep));
      z.segment(7, 10) = pc::svec(random_spd(4, 200 + rep));
      CHECK(pc::detail::nt_residual(p, s, z) <= 1e-10 * std::max(s.norm(), z.norm()));
    }
  }

  TEST_CASE("dump format is stable and parses back") {
    pc::ConeProgram p;
    p.nvar = 2;
    p.objective = {{0, 1.0}, {1, -0.5}};
    p.rows = {{0, 0, 1.0}, {1, 1, 0.3333333333333333}};
    p.rhs = {{0, 2.0}};
    p.cones = {{pc::ConeKind::zero, 0, 1}, {pc::ConeKind::nonneg, 1, 1}};
    std::string text = pc::dump(p);
    CHECK(text ==
          "CONEPROG v1\n"
          "VAR 2\n"
          "OBJ 0 1\n"
          "OBJ 1 -0.5\n"
          "ROW 0 0 1\n"
          "ROW 1 1 0.33333333333333331\n"
          "RHS 0 2\n"
          "CONE zero 0 1\n"
          "CONE nonneg 1 1\n");
    pc::ConeProgram q = pc::parse_dump(text);
    CHECK(pc::dump(q) == text);
    // unknown line kinds are ignored
    pc::ConeProgram r = pc::parse_dump("CONEPROG v1\nNOTE hello\nVAR 1\n");
    CHECK(r.nvar == 1);
    CHECK_THROWS(pc::parse_dump("bogus\n"));
  }

  TEST_CASE("tight tolerances still converge on a small sdp") {
    // min tr(C X) s.t. tr(X) = 1, X psd, C symmetric: answer lambda_min(C).
    // variables are svec(X)
    MatrixXd C(3, 3);
    C << 2, 1, 0, 1, 3, 1, 0, 1, 4;
    const int m = 6;
    pc::ConeProgram p;
    p.nvar = m;
    VectorXd vc = pc::svec(C), vi = pc::svec(MatrixXd::Identity(3, 3));
    for (int k = 0; k < m; ++k) p.objective.emplace_back(k, vc[k]);
    for (int k = 0; k < m; ++k) p.rows.push_back({0, k, vi[k]});
    p.rhs.emplace_back(0, 1.0);
    for (int k = 0; k < m; ++k) p.rows.push_back({1 + k, k, -1.0});
    p.cones = {{pc::ConeKind::zero, 0, 1}, {pc::ConeKind::psd, 1, m}};
    auto sol = pc::solve(p, 1e-10);
    REQUIRE(sol.status == pc::SolveStatus::optimal);
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(C);
    CHECK(sol.primal_objective ==
          doctest::Approx(es.eigenvalues().minCoeff()).epsilon(1e-8));
  }
}
