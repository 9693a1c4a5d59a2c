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

// Step-size designers: alternating minimization over (multipliers | steps),
// a first-order method on the sensitivity of the certified bound, and a
// sequential linearization method with a trust region. All three walk the
// space of schedules, certifying a worst-case bound at every visit.

#ifndef PEPFORGE_DESIGNERS_HPP_
#define PEPFORGE_DESIGNERS_HPP_

#include <Eigen/Dense>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "pepforge/bridge.hpp"
#include "pepforge/types.hpp"

namespace pepforge::designers {

// Spec combinations a designer cannot handle (e.g. the steps subproblem of
// alternating minimization when the slack matrix is quadratic in the steps).
struct UnsupportedSpecError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Conic solve failed after the tolerance-relaxation retry.
struct SolverFailureError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class DesignMethod { am, fom, slm };

const char* to_string(DesignMethod m);

struct DesignConfig {
  DesignMethod method = DesignMethod::slm;
  int T_max = 1000;
  double tol_w = 1e-7;      // bound-improvement threshold
  double tol_alpha = 1e-4;  // schedule-change threshold
  double D0 = 1.0;          // initial trust radius (slm)
  double beta0 = 0.5;       // fom step scale, beta_t = beta0 / sqrt(t)
  double solver_tol = 1e-8;

  void validate() const;
};

struct DesignIteration {
  double w = 0.0;
  core::StepSchedule schedule;
  // slm only
  double D = 0.0;
  double P = 0.0;
  bool accepted = false;
  bool has_trust_fields = false;
};

struct DesignReport {
  DesignMethod method = DesignMethod::slm;
  std::vector<DesignIteration> iterations;
  core::StepSchedule final_schedule;
  core::DualCertificate final_certificate;
  double final_w = 0.0;
  std::string termination;  // converged | iteration_cap | solver_failure
};

nlohmann::json report_to_json(const DesignReport& report);

// Free parameters of a schedule under its structural constraints:
// memoryless -> the N diagonal steps, full -> the whole lower triangle in
// row-major order, cyclic -> the core steps.
std::vector<double> free_parameters(const core::StepSchedule& schedule);
core::StepSchedule with_free_parameters(const core::StepSchedule& schedule,
                                        const std::vector<double>& params);

// One certified worst-case evaluation: a single conic solve of the encoded
// dual yields the bound (user units), the multiplier certificate and the
// Gram-side witness. Retries once with 10x tolerance and diagonal
// regularization 1e-10 on numerical failure, then throws SolverFailureError.
struct WorstCase {
  double w = 0.0;
  core::DualCertificate cert;
  core::PrimalWitness witness;
  core::PepInstance inst;
  conic::ConicSolution sol;
};

WorstCase worst_case(const core::ProblemSpec& spec, double tol = 1e-8);

// Sensitivity of the certified bound with respect to the free schedule
// parameters, in the units of the normalized instance: component f equals
// Tr(-G dS/dalpha_f) accumulated over the triangle entries tied to f. Valid
// as a gradient only where the bound is differentiable. The two-argument
// form reuses an existing solve.
Eigen::VectorXd dual_gradient(const core::ProblemSpec& spec, double tol = 1e-8);
Eigen::VectorXd dual_gradient_at(const core::ProblemSpec& spec,
                                 const WorstCase& solved);

// Steps subproblem of alternating minimization: with multipliers frozen,
// minimize the certified bound over (steps, tau). Requires the slack matrix
// to be affine in the steps (mu = 0 and a step-independent criterion);
// otherwise throws UnsupportedSpecError.
struct AmStep {
  core::StepSchedule schedule;
  double tau = 0.0;  // normalized-bound value attained by the new steps
};

AmStep am_schedule_subproblem(const core::DualCertificate& multipliers,
                              const core::ProblemSpec& spec,
                              double tol = 1e-8);

DesignReport run_am(const DesignConfig& config, const core::ProblemSpec& spec);
DesignReport run_fom(const DesignConfig& config, const core::ProblemSpec& spec);

// Concatenated decision vector (tau, lambda, eta, sigma, steps) with a fixed
// index map; the steps occupy the trailing free-parameter block.
struct DesignPoint {
  Eigen::VectorXd x;
  int num_pairs = 0;
  int num_eta = 0;
  int num_sigma = 0;
  int num_alpha = 0;

  int dim() const { return 1 + num_pairs + num_eta + num_sigma + num_alpha; }
  int alpha_offset() const { return 1 + num_pairs + num_eta + num_sigma; }
  Eigen::VectorXd alpha() const { return x.tail(num_alpha); }
};

DesignPoint make_design_point(const WorstCase& solved,
                              const core::ProblemSpec& spec);

// Linearized trust-region subproblem around `point`: minimize the predicted
// bound change subject to the linearized psd slack, stationarity and signs
// at point + dx, and 0.5 |dx|^2 <= D. dx = 0 is feasible, so the predicted
// change is never positive. Throws SolverFailureError if the conic solve
// fails (callers shrink D and retry).
Eigen::VectorXd slm_subproblem(const DesignPoint& point, double D,
                               const core::ProblemSpec& spec,
                               double tol = 1e-8);

// Radius/acceptance policy on the realized-over-predicted ratio.
struct TrustUpdate {
  double D = 0.0;
  bool accepted = false;
};

TrustUpdate trust_region_update(double P, double D);

DesignReport run_slm(const DesignConfig& config, const core::ProblemSpec& spec);

// Dispatch on config.method.
DesignReport run_design(const DesignConfig& config, const core::ProblemSpec& spec);

// Deterministic multi-start wrapper: perturbs the initial free parameters
// with uniform [0.5, 1.5] scaling draws from `seed` and keeps the best final
// bound. Start 0 uses the unperturbed initial schedule.
DesignReport run_design_multistart(const DesignConfig& config,
                                   const core::ProblemSpec& spec, int starts,
                                   unsigned seed = 2024);

}  // namespace pepforge::designers

#endif  // PEPFORGE_DESIGNERS_HPP_
