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

// Core data model for worst-case performance estimation of fixed-step
// first-order methods x_i = x_0 - sum_{k<i} alpha_{i,k} g_k over smooth
// (strongly) convex functions. Iterates and gradients live in a Gram space
// G = P'P; function values in a vector F. Everything here is plain data;
// assembly logic lives in assemble.hpp.

#ifndef PEPFORGE_TYPES_HPP_
#define PEPFORGE_TYPES_HPP_

#include <Eigen/Dense>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace pepforge::core {

// Index of the optimum in the extended index set {0..N, *}.
inline constexpr int kStar = -1;

enum class ScheduleKind { memoryless, full, cyclic };

const char* to_string(ScheduleKind k);

// Lower-triangular step coefficients alpha_{i,k}, 1 <= i <= N, 0 <= k < i,
// dimensionless (the method is applied to the L = 1 normalization; user
// facing quantities are rescaled on output). Row i-1 of coeffs has i entries.
struct StepSchedule {
  int N = 0;
  ScheduleKind kind = ScheduleKind::memoryless;
  int core_length = 0;  // cyclic only
  std::vector<std::vector<double>> coeffs;

  double alpha(int i, int k) const { return coeffs.at(i - 1).at(k); }

  // Throws std::invalid_argument on shape or kind-structure violations.
  void validate() const;

  // Memoryless schedule h_1..h_N: column k is constant alpha_{i,k} = h_{k+1}.
  static StepSchedule memoryless_steps(const std::vector<double>& h);
  // Full lower triangle given row by row.
  static StepSchedule full_triangle(const std::vector<std::vector<double>>& rows);
  // Cyclic repetition of a memoryless core over N = reps * core.size().
  static StepSchedule cyclic_steps(const std::vector<double>& core, int reps);
};

enum class OracleKind { exact, relatively_inexact };

// Function class: L-smooth, mu-strongly convex, optionally queried through a
// relatively inexact gradient oracle |d_i - g_i| <= epsilon |g_i|.
struct FunctionClassSpec {
  double L = 1.0;
  double mu = 0.0;
  double epsilon = 0.0;
  OracleKind oracle = OracleKind::exact;

  void validate() const;
};

enum class CriterionKind { final_objective_gap, final_distance_sq, min_gradient_norm_sq };

const char* to_string(CriterionKind k);

struct CriterionSpec {
  CriterionKind kind = CriterionKind::final_objective_gap;
};

enum class InitKind { distance_to_opt, objective_gap };

const char* to_string(InitKind k);

struct InitSpec {
  InitKind kind = InitKind::distance_to_opt;
  double R = 1.0;

  void validate() const;
};

// Column layout of the Gram basis P. Exact oracle: [g_0..g_N, x_0], m = N+2.
// Inexact oracle: [g_0..g_N, d_0..d_{N-1}, x_0], m = 2N+2. x_* = g_* = 0 and
// f_* = 0 need no columns.
struct GramLayout {
  int N = 0;
  bool inexact = false;

  int m() const { return inexact ? 2 * N + 2 : N + 2; }
  int gcol(int i) const {
    if (i < 0 || i > N) throw std::out_of_range("gradient index");
    return i;
  }
  int dcol(int i) const {
    if (!inexact) throw std::invalid_argument("exact layout has no d columns");
    if (i < 0 || i >= N) throw std::out_of_range("direction index");
    return N + 1 + i;
  }
  int xcol() const { return m() - 1; }
};

struct ConstraintTag {
  enum class Kind { interpolation, inexactness, initial, epigraph };
  Kind kind = Kind::initial;
  int i = 0;  // interpolation pair (i, j) with kStar for *, or the step index
  int j = 0;
};

// One scalar inequality  fcoef.F + tcoef*t + <smat(gvec), G>  <=  rhs.
// gvec uses the scaled lower-triangular vectorization of conic::svec.
struct LinearConstraint {
  Eigen::VectorXd fcoef;
  double tcoef = 0.0;
  Eigen::VectorXd gvec;
  double rhs = 0.0;
  ConstraintTag tag;
};

// The assembled maximization instance
//   max  b.F + <smat(cvec), G> + tobj*t   s.t.  constraints,  G psd,
// built in the L = 1, R = 1 normalization; multiply the optimal value by
// value_scale to express it in user units.
struct PepInstance {
  GramLayout layout;
  Eigen::VectorXd b;
  Eigen::VectorXd cvec;
  double tobj = 0.0;
  bool has_epigraph = false;
  std::vector<LinearConstraint> constraints;
  double value_scale = 1.0;

  int num_fvals() const { return layout.N + 1; }
};

// Multipliers certifying the worst-case bound: the slack matrix
//   S = tau*A_R - C + sum lambda_{ij} A_{ij} + sum eta_i E_i - sum sigma_k u_k u_k'
// must be psd and the function-value stationarity rows must vanish.
struct DualCertificate {
  double tau = 0.0;
  std::map<std::pair<int, int>, double> lambda;  // keys use kStar for *
  std::map<int, double> eta;
  std::map<int, double> sigma;
  Eigen::MatrixXd slack;
  double bound = 0.0;
};

struct TrajectoryPoint {
  Eigen::VectorXd x;
  Eigen::VectorXd g;
  double f = 0.0;
};

// Primal side of a solved instance: the Gram matrix, function values, the
// attained objective (instance units), and optionally the reconstructed
// low-dimensional trajectory (see extract_worst_case).
struct PrimalWitness {
  Eigen::MatrixXd G;
  Eigen::VectorXd F;
  double value = 0.0;
  StepSchedule schedule;
  GramLayout layout;
  std::vector<TrajectoryPoint> trajectory;
};

// Bundle describing one experiment; serializes to the JSON problem document.
struct ProblemSpec {
  StepSchedule schedule;
  FunctionClassSpec fclass;
  CriterionSpec criterion;
  InitSpec init;

  void validate() const;
};

// Factor converting an optimal value of the normalized (L=1, R=1) instance
// into user units for the given criterion/init combination.
double value_rescale(CriterionKind criterion, InitKind init, double L, double R);

}  // namespace pepforge::core

#endif  // PEPFORGE_TYPES_HPP_
