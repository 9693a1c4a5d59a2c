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

// Method families and schedule transformations: memoryless and full
// fixed-step methods, their inexact-oracle variants, cyclic composition for
// linear-convergence regimes, and homogeneity rescaling of certified bounds.

#ifndef PEPFORGE_SCHEDULES_HPP_
#define PEPFORGE_SCHEDULES_HPP_

#include <string>
#include <vector>

#include "pepforge/designers.hpp"
#include "pepforge/types.hpp"

namespace pepforge::schedules {

// MGD: memoryless gradient descent, one free step per iteration.
// FULL: every lower-triangle coefficient free.
// IGD / FIGD: the same shapes queried through a relatively inexact oracle.
// CGD: a memoryless core of length N* repeated cyclically.
enum class Family { MGD, FULL, IGD, FIGD, CGD };

const char* to_string(Family f);
Family family_from_string(const std::string& s);

struct AlgorithmTemplate {
  Family family = Family::MGD;
  int N = 0;
  int core_length = 0;  // CGD only

  bool inexact() const { return family == Family::IGD || family == Family::FIGD; }
  core::ScheduleKind kind() const;
  // Size of the free-parameter mask: N for column-constant families,
  // N(N+1)/2 for full triangles, N* for cyclic cores.
  int num_free() const;

  void validate() const;
};

// Fills the family's structural mask with params; throws on length mismatch.
core::StepSchedule instantiate(const AlgorithmTemplate& tmpl,
                               const std::vector<double>& params);

// Inverse of instantiate on the mask (round-trips exactly); throws if the
// schedule does not have the template's shape.
std::vector<double> read_free(const AlgorithmTemplate& tmpl,
                              const core::StepSchedule& schedule);

// The step coefficients are dimensionless multiples of 1/L, so a schedule is
// invariant under rescaling; only certified values carry units.
core::StepSchedule rescale(const core::StepSchedule& schedule, double L, double R);

// Maps a bound certified at L = R = 1 to the(L, R) instance: gap-from-distance
// scales by L R^2, distance-from-distance by R^2, gap-from-gap by R,
// distance-from-gap by R/L, and the min-gradient criterion by L^2 R^2 or L R.
double rescale(double w_normalized, double L, double R,
               core::CriterionKind criterion, core::InitKind init);

// Per-cycle contraction of |x - x*|^2 over one pass of an N*-step core;
// powers of c certify the k-cycle bound c^k.
struct CyclicRate {
  double c = 0.0;
  int n_star = 0;
  bool contractive = false;  // c < 1
  std::vector<double> core;
  core::DualCertificate cert;
};

// Certifies c = worst_case(core, final_distance_sq, R = 1). Requires mu > 0;
// without strong convexity there is no linear convergence to certify.
CyclicRate cyclic_rate(const std::vector<double>& core,
                       const core::FunctionClassSpec& fclass, double tol = 1e-8);

// The classical optimal constant step 2/(L + mu), in 1/L units, replicated
// over a core of length n_star.
std::vector<double> constant_core(int n_star, const core::FunctionClassSpec& fclass);

// Optimizes the core with the sequential linearization designer on the
// N*-step distance-criterion instance, starting from constant_core.
CyclicRate optimize_core(int n_star, const core::FunctionClassSpec& fclass,
                         const designers::DesignConfig& config);

}  // namespace pepforge::schedules

#endif  // PEPFORGE_SCHEDULES_HPP_
