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

#ifndef PEPFORGE_CONIC_HPP_
#define PEPFORGE_CONIC_HPP_

#include <Eigen/Dense>
#include <string>
#include <utility>
#include <vector>

#include "pepforge/svec.hpp"

namespace pepforge::conic {

enum class ConeKind { zero, nonneg, second_order, psd };

// Half-open row span [start, start+len) of one cone block.
// psd blocks store svec rows: len = n(n+1)/2 for side n.
struct Cone {
  ConeKind kind = ConeKind::zero;
  int start = 0;
  int len = 0;
};

struct RowEntry {
  int row = 0;
  int col = 0;
  double val = 0.0;
};

// min c.x  subject to  rhs_k - (M x)_k lying in cone block k.
// zero blocks are equalities; all data sparse, rows partitioned by cones.
struct ConeProgram {
  int nvar = 0;
  std::vector<std::pair<int, double>> objective;
  std::vector<RowEntry> rows;
  std::vector<std::pair<int, double>> rhs;
  std::vector<Cone> cones;

  int row_count() const {
    int n = 0;
    for (const auto& c : cones) n += c.len;
    return n;
  }
};

enum class SolveStatus { optimal, infeasible, unbounded, numerical_failure };

const char* to_string(SolveStatus s);

struct ConicSolution {
  SolveStatus status = SolveStatus::numerical_failure;
  Eigen::VectorXd x;  // primal variables
  Eigen::VectorXd s;  // per-row slack (zero rows hold 0)
  Eigen::VectorXd z;  // per-row dual (zero rows hold equality multipliers)
  double primal_objective = 0.0;
  double dual_objective = 0.0;
  double gap = 0.0;
  int iterations = 0;
};

struct SolverOptions {
  double tol = 1e-8;
  int max_iterations = 100;
  // Static regularization added to the reduced KKT diagonal; the
  // numerical_failure retry contract bumps this.
  double diag_regularization = 0.0;
};

ConicSolution solve(const ConeProgram& prog, const SolverOptions& opts);
inline ConicSolution solve(const ConeProgram& prog, double tol) {
  SolverOptions o;
  o.tol = tol;
  return solve(prog, o);
}

// Line-oriented debug dump (header "CONEPROG v1"); format is fixed and
// golden-tested. parse_dump accepts dumps with unknown line kinds skipped.
std::string dump(const ConeProgram& prog);
ConeProgram parse_dump(const std::string& text);

namespace detail {
// White-box hook: residual of the Nesterov-Todd identities
// max(|W z - lambda|, |W^-T s - lambda|) for an interior pair, using the
// cone layout of `prog` (zero rows ignored).
double nt_residual(const ConeProgram& prog, const Eigen::VectorXd& s,
                   const Eigen::VectorXd& z);
}  // namespace detail

}  // namespace pepforge::conic

#endif  // PEPFORGE_CONIC_HPP_
