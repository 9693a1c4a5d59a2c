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

// Translation between assembled performance-estimation instances and conic
// programs, plus solver-independent certificate verification. One conic
// solve of the encoded dual yields both the multipliers (primal variables)
// and the worst-case Gram matrix and function values (conic duals of the
// psd and equality blocks).

#ifndef PEPFORGE_BRIDGE_HPP_
#define PEPFORGE_BRIDGE_HPP_

#include "pepforge/assemble.hpp"
#include "pepforge/conic.hpp"
#include "pepforge/types.hpp"

namespace pepforge::bridge {

// Conic form of the multiplier problem
//   min  sum_v rhs_v x_v   s.t.  stationarity (zero cone), x >= 0,
//        S = sum_v x_v A_v - C  psd,
// with variable order: initial-condition multiplier tau first, then the
// interpolation multipliers in instance order, inexactness, epigraph.
conic::ConeProgram encode_dual(const core::PepInstance& inst);

// Inverse of encode_dual on constraint data (exact, bit level); tags are
// recovered from the fixed variable ordering. value_scale is not part of the
// encoding and resets to 1.
core::PepInstance decode_dual(const conic::ConeProgram& prog);

// Multiplier part of a solved encoded dual; bound is in user units
// (value_scale applied), slack is the solver-reported psd block.
core::DualCertificate decode_certificate(const core::PepInstance& inst,
                                         const conic::ConicSolution& sol);

// Worst-case side recovered from the conic dual: G from the psd block, F
// from the stationarity rows. value stays in instance (normalized) units.
core::PrimalWitness decode_witness(const core::PepInstance& inst,
                                   const conic::ConicSolution& sol,
                                   const core::StepSchedule& schedule);

struct VerifyReport {
  double min_eigenvalue = 0.0;       // of the recomputed slack matrix
  double stationarity_residual = 0.0;
  double sign_violation = 0.0;       // most negative multiplier, clamped at 0
  double simplex_residual = 0.0;     // |sum sigma - 1| for min-type criteria
  bool pass = false;
};

// Recomputes the slack matrix and stationarity rows from the problem data
// alone (no conic solve) and checks them against tol.
VerifyReport verify_certificate(const core::DualCertificate& cert,
                                const core::ProblemSpec& spec, double tol = 1e-6);

}  // namespace pepforge::bridge

#endif  // PEPFORGE_BRIDGE_HPP_
