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

#ifndef PEPFORGE_ASSEMBLE_HPP_
#define PEPFORGE_ASSEMBLE_HPP_

#include <Eigen/Dense>
#include <vector>

#include "pepforge/conic.hpp"
#include "pepforge/types.hpp"

namespace pepforge::core {

// Coordinate vector of iterate x_i in the Gram basis: 1 at x_0's column and
// -alpha_{i,k} at the column of the direction used at step k (g_k for exact
// oracles, d_k for inexact ones). i = kStar gives x_* = 0.
Eigen::VectorXd h_vector(const StepSchedule& schedule, const GramLayout& layout,
                         int i);

struct Symbol {
  enum class Kind { gradient, direction, star };
  Kind kind = Kind::star;
  int index = 0;

  static Symbol grad(int i) { return {Kind::gradient, i}; }
  static Symbol dir(int i) { return {Kind::direction, i}; }
  static Symbol star() { return {Kind::star, 0}; }
};

// Canonical basis vector of a gradient or direction column; star maps to 0.
Eigen::VectorXd u_vector(const GramLayout& layout, Symbol s);

struct InterpolationRow {
  Eigen::MatrixXd A;      // m x m symmetric
  Eigen::VectorXd fcoef;  // length N+1; interpolability forces fcoef.F >= <A, G>
};

// Smooth strongly convex interpolation inequality for the ordered pair
// (i, j), i != j, both in {0..N, kStar}:
//   f_i - f_j >= <g_j, x_i - x_j>
//             + rho*( (1/L)|g_i - g_j|^2 + mu|x_i - x_j|^2
//                     - (2mu/L)<g_j - g_i, x_j - x_i> ),  rho = 1/(2(1 - mu/L)).
InterpolationRow interpolation_constraint(const FunctionClassSpec& fclass,
                                          const StepSchedule& schedule, int i,
                                          int j);

// E_i with Tr(E_i G) <= 0 encoding |d_i - g_i|^2 <= epsilon^2 |g_i|^2.
Eigen::MatrixXd inexactness_constraint(const GramLayout& layout, int i,
                                       double epsilon);

// Builds the full maximization instance in the L = 1, R = 1 normalization
// (mu and the step coefficients are scale free; value_scale restores user
// units). Constraint order: interpolation pairs in lexicographic order over
// (0..N, *), inexactness rows, the initial condition, epigraph rows.
PepInstance assemble_primal(const StepSchedule& schedule,
                            const FunctionClassSpec& fclass,
                            const CriterionSpec& criterion, const InitSpec& init);

// Conic form of the Lagrange dual over the multipliers
// (tau, lambda_{ij}, eta_i, sigma_k); minimizing the weighted initial
// condition subject to psd slack, stationarity and signs. Defined in the
// conic bridge translation unit.
conic::ConeProgram assemble_dual(const StepSchedule& schedule,
                                 const FunctionClassSpec& fclass,
                                 const CriterionSpec& criterion,
                                 const InitSpec& init);

// Factors G (eigenvalues <= rank_tol * lambda_max dropped) and reconstructs
// the worst-case trajectory in dimension rank(G); also stores it on the
// witness. Throws if G is indefinite beyond tolerance.
std::vector<TrajectoryPoint> extract_worst_case(PrimalWitness& witness,
                                                double rank_tol = 1e-6);

}  // namespace pepforge::core

#endif  // PEPFORGE_ASSEMBLE_HPP_
