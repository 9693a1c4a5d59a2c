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
#include <vector>

#include "doctest.h"
#include "pepforge/bridge.hpp"
#include "pepforge/designers.hpp"
#include "pepforge/json_io.hpp"

namespace core = pepforge::core;
namespace designers = pepforge::designers;
namespace bridge = pepforge::bridge;

using core::CriterionKind;
using core::InitKind;
using core::StepSchedule;

namespace {

core::ProblemSpec make_spec(StepSchedule sched, double L, double mu, double eps,
                            CriterionKind crit, InitKind init, double R) {
  core::ProblemSpec spec;
  spec.schedule = std::move(sched);
  spec.fclass.L = L;
  spec.fclass.mu = mu;
  spec.fclass.epsilon = eps;
  spec.fclass.oracle =
      eps > 0 ? core::OracleKind::relatively_inexact : core::OracleKind::exact;
  spec.criterion.kind = crit;
  spec.init.kind = init;
  spec.init.R = R;
  return spec;
}

core::ProblemSpec gap_spec(const std::vector<double>& steps) {
  return make_spec(StepSchedule::memoryless_steps(steps), 1.0, 0.0, 0.0,
                   CriterionKind::final_objective_gap, InitKind::distance_to_opt,
                   1.0);
}

double bound_at(core::ProblemSpec spec, const std::vector<double>& params,
                double tol) {
  spec.schedule = designers::with_free_parameters(spec.schedule, params);
  return designers::worst_case(spec, tol).w;
}

// Independent derivative oracle: one-sided and central finite differences of
// the certified bound along one free parameter. The one-sided pair doubles
// as a kink detector; the certified bound is a max of analytic branches and
// is differentiable exactly where the two sides agree.
struct FdProbe {
  double forward = 0.0;
  double backward = 0.0;
  double central = 0.0;
  bool kink = false;
  bool ok = true;  // both probe solves reached the requested tolerance
};

FdProbe fd_probe(const core::ProblemSpec& spec, double w0, int coord, double h,
                 double tol) {
  std::vector<double> params = designers::free_parameters(spec.schedule);
  std::vector<double> up = params, dn = params;
  up[coord] += h;
  dn[coord] -= h;
  FdProbe p;
  double wu = 0.0, wd = 0.0;
  try {
    wu = bound_at(spec, up, tol);
    wd = bound_at(spec, dn, tol);
  } catch (const designers::SolverFailureError&) {
    p.ok = false;
    return p;
  }
  p.forward = (wu - w0) / h;
  p.backward = (w0 - wd) / h;
  p.central = (wu - wd) / (2 * h);
  p.kink = std::abs(p.forward - p.backward) >
           1e-3 * (1.0 + std::abs(p.forward) + std::abs(p.backward));
  return p;
}

}  // namespace

TEST_SUITE("designers") {

TEST_CASE("finite differences confirm the sensitivity at a reference point") {
  core::ProblemSpec spec = gap_spec({1.2, 1.4});
  designers::WorstCase solved = designers::worst_case(spec, 1e-10);
  Eigen::VectorXd grad = designers::dual_gradient_at(spec, solved);
  grad *= solved.inst.value_scale;
  for (int c = 0; c < 2; ++c) {
    FdProbe p = fd_probe(spec, solved.w, c, 1e-5, 1e-10);
    REQUIRE(p.ok);
    REQUIRE(!p.kink);
    CHECK(std::abs(grad[c] - p.central) / std::abs(p.central) <= 1e-4);
  }
}

TEST_CASE("finite differences confirm the bound sensitivity") {
  std::mt19937 gen(7);
  std::uniform_real_distribution<double> step(0.4, 1.6);
  const double fd_h = 1e-4;
  const double solve_tol = 1e-9;
  int clean = 0, kinks = 0;
  for (int rep = 0; rep < 20; ++rep) {
    StepSchedule sched;
    switch (rep % 4) {
      case 0: sched = StepSchedule::memoryless_steps({step(gen), step(gen)}); break;
      case 1:
        sched = StepSchedule::memoryless_steps({step(gen), step(gen), step(gen)});
        break;
      case 2:
        sched = StepSchedule::full_triangle({{step(gen)}, {step(gen), step(gen)}});
        break;
      default: sched = StepSchedule::cyclic_steps({step(gen), step(gen)}, 2); break;
    }
    CriterionKind crit = rep % 3 == 0   ? CriterionKind::final_objective_gap
                         : rep % 3 == 1 ? CriterionKind::final_distance_sq
                                        : CriterionKind::min_gradient_norm_sq;
    InitKind init = rep % 2 == 0 ? InitKind::distance_to_opt : InitKind::objective_gap;
    double mu = rep % 5 == 2 ? 0.25 : 0.0;
    // a distance criterion started from a pure objective gap is unbounded
    // for mu = 0 (flat functions start arbitrarily far away)
    if (crit == CriterionKind::final_distance_sq && init == InitKind::objective_gap)
      mu = 0.25;
    double eps = rep % 5 == 4 ? 0.2 : 0.0;
    double L = rep % 7 == 3 ? 2.0 : 1.0;
    core::ProblemSpec spec =
        make_spec(sched, L, mu * L, eps, crit, init, rep % 7 == 3 ? 1.5 : 1.0);
    CAPTURE(rep);
    designers::WorstCase solved;
    try {
      solved = designers::worst_case(spec, solve_tol);
    } catch (const designers::SolverFailureError&) {
      MESSAGE("base solve not clean at rep ", rep, "; skipped");
      continue;
    }
    REQUIRE(std::abs(solved.sol.gap) <= 1e-8);
    Eigen::VectorXd grad = designers::dual_gradient_at(spec, solved);
    // user-facing bound carries value_scale; the sensitivity must as well
    grad *= solved.inst.value_scale;
    std::vector<double> params = designers::free_parameters(spec.schedule);
    for (size_t c = 0; c < params.size(); ++c) {
      CAPTURE(c);
      FdProbe p = fd_probe(spec, solved.w, static_cast<int>(c), fd_h, solve_tol);
      if (!p.ok) {
        MESSAGE("probe solve not clean: rep ", rep, " coord ", c, "; skipped");
        continue;
      }
      if (p.kink) {
        ++kinks;
        MESSAGE("non-differentiable point skipped: rep ", rep, " coord ", c,
                " one-sided ", p.forward, " / ", p.backward);
        continue;
      }
      ++clean;
      double scale = std::max(std::abs(p.central), std::abs(grad[c]));
      // absolute floor covers finite-difference noise (solver tolerance / h)
      // on specs whose bound is schedule independent, where the slope is 0
      CHECK(std::abs(grad[c] - p.central) <= std::max(1e-4 * scale, 2e-5));
    }
  }
  // generic random schedules are differentiable almost everywhere
  CHECK(clean >= 3 * kinks);
  CHECK(clean >= 30);
}

TEST_CASE("certified bound wrapper matches the known one step values") {
  designers::WorstCase a = designers::worst_case(gap_spec({1.0}));
  CHECK(a.w == doctest::Approx(1.0 / 6.0).epsilon(1e-6));
  CHECK(bridge::verify_certificate(a.cert, gap_spec({1.0})).pass);
  CHECK(std::abs(a.witness.value * a.inst.value_scale - a.w) <= 1e-6);

  designers::WorstCase b = designers::worst_case(gap_spec({1.5}));
  CHECK(b.w == doctest::Approx(0.125).epsilon(1e-6));
  CHECK(bridge::verify_certificate(b.cert, gap_spec({1.5})).pass);
}

TEST_CASE("all zero multipliers make the sensitivity vanish") {
  core::ProblemSpec spec = gap_spec({1.1, 0.9});
  designers::WorstCase shell;
  shell.inst = core::assemble_primal(spec.schedule, spec.fclass, spec.criterion,
                                     spec.init);
  shell.witness.G =
      Eigen::MatrixXd::Identity(shell.inst.layout.m(), shell.inst.layout.m());
  Eigen::VectorXd grad = designers::dual_gradient_at(spec, shell);
  CHECK(grad.norm() == 0.0);
}

TEST_CASE("sensitivity at a designed optimum is small or flagged as a kink") {
  designers::DesignConfig cfg;
  cfg.method = designers::DesignMethod::slm;
  cfg.T_max = 200;
  designers::DesignReport rep = designers::run_slm(cfg, gap_spec({1.0}));
  core::ProblemSpec at = gap_spec({1.0});
  at.schedule = rep.final_schedule;
  designers::WorstCase solved = designers::worst_case(at);
  // wide bracket: the optimum may sit on a crossing of analytic branches,
  // where stationarity means zero lies between the one-sided slopes
  FdProbe p = fd_probe(at, solved.w, 0, 2e-2, 1e-9);
  if (p.kink) {
    MESSAGE("designed optimum sits on a kink; one-sided slopes ", p.forward,
            " / ", p.backward, " bracket zero");
    CHECK(p.forward >= -1e-4);   // climbing to the right
    CHECK(p.backward <= 1e-4);   // climbing to the left
  } else {
    Eigen::VectorXd grad = designers::dual_gradient_at(at, solved);
    CHECK(grad.norm() <= 1e-5);
  }
}

TEST_CASE("steps subproblem never worsens the frozen multiplier bound") {
  core::ProblemSpec spec = gap_spec({1.0});
  designers::WorstCase solved = designers::worst_case(spec);
  designers::AmStep step = designers::am_schedule_subproblem(solved.cert, spec);
  CHECK(step.tau * solved.inst.value_scale <= solved.w + 1e-7);
  CHECK(step.schedule.alpha(1, 0) > 1.0);  // moves toward the longer step
}

TEST_CASE("steps subproblem rejects quadratic step dependence") {
  core::ProblemSpec sc = make_spec(StepSchedule::memoryless_steps({1.0}), 1.0,
                                   0.1, 0.0, CriterionKind::final_distance_sq,
                                   InitKind::distance_to_opt, 1.0);
  designers::WorstCase solved = designers::worst_case(sc);
  CHECK_THROWS_AS(designers::am_schedule_subproblem(solved.cert, sc),
                  designers::UnsupportedSpecError);
  core::ProblemSpec mu_only = make_spec(StepSchedule::memoryless_steps({1.0}),
                                        1.0, 0.1, 0.0,
                                        CriterionKind::final_objective_gap,
                                        InitKind::distance_to_opt, 1.0);
  CHECK_THROWS_AS(
      designers::am_schedule_subproblem(designers::worst_case(mu_only).cert,
                                        mu_only),
      designers::UnsupportedSpecError);
  core::ProblemSpec dist_only = make_spec(StepSchedule::memoryless_steps({1.0}),
                                          1.0, 0.0, 0.0,
                                          CriterionKind::final_distance_sq,
                                          InitKind::distance_to_opt, 1.0);
  CHECK_THROWS_AS(
      designers::am_schedule_subproblem(designers::worst_case(dist_only).cert,
                                        dist_only),
      designers::UnsupportedSpecError);
}

TEST_CASE("steps subproblem needs multipliers that balance the objective") {
  core::ProblemSpec spec = gap_spec({1.0});
  core::DualCertificate zero;
  CHECK_THROWS_AS(designers::am_schedule_subproblem(zero, spec),
                  std::runtime_error);
}

TEST_CASE("alternating minimization improves and then fixes one step") {
  designers::DesignConfig cfg;
  cfg.method = designers::DesignMethod::am;
  cfg.T_max = 50;
  core::ProblemSpec spec = gap_spec({1.0});
  designers::DesignReport rep = designers::run_am(cfg, spec);
  CHECK(rep.final_w <= 1.0 / 6.0 + 1e-9);
  CHECK(rep.termination == "converged");
  for (size_t i = 1; i < rep.iterations.size(); ++i)
    CHECK(rep.iterations[i].w <= rep.iterations[i - 1].w + 1e-9);

  // restarting from the fixed point converges immediately, schedule intact
  core::ProblemSpec again = spec;
  again.schedule = rep.final_schedule;
  designers::DesignReport rerun = designers::run_am(cfg, again);
  CHECK(rerun.termination == "converged");
  CHECK(rerun.iterations.size() == 1);
  CHECK(std::abs(rerun.final_schedule.alpha(1, 0) -
                 rep.final_schedule.alpha(1, 0)) <= 1e-3);
}

TEST_CASE("alternating minimization stalls off the two step optimum") {
  designers::DesignConfig cfg;
  cfg.method = designers::DesignMethod::am;
  cfg.T_max = 100;
  core::ProblemSpec spec = gap_spec({1.0, 1.0});
  double w_init = designers::worst_case(spec).w;
  double w_opt = designers::worst_case(gap_spec({1.414, 1.877})).w;
  designers::DesignReport rep = designers::run_am(cfg, spec);
  CHECK(rep.final_w <= w_init + 1e-9);
  CHECK(rep.final_w > w_opt + 1e-3);  // strictly above the true minimum
}

TEST_CASE("bound gradient descent approaches the optimal one step") {
  designers::DesignConfig cfg;
  cfg.method = designers::DesignMethod::fom;
  cfg.T_max = 80;
  cfg.beta0 = 0.5;
  designers::DesignReport rep = designers::run_fom(cfg, gap_spec({1.0}));
  CHECK(rep.final_w <= 1.0 / 6.0);
  CHECK(rep.final_w <= 0.127);  // optimum is 0.125
  double best = rep.iterations.front().w;
  for (const auto& it : rep.iterations) best = std::min(best, it.w);
  CHECK(rep.final_w == best);
  CHECK(rep.iterations.size() <= 80);
}

TEST_CASE("zero step scale freezes the schedule") {
  designers::DesignConfig cfg;
  cfg.method = designers::DesignMethod::fom;
  cfg.beta0 = 0.0;
  cfg.T_max = 10;
  designers::DesignReport rep = designers::run_fom(cfg, gap_spec({1.3}));
  CHECK(rep.termination == "converged");
  CHECK(rep.iterations.size() == 1);
  CHECK(rep.final_schedule.alpha(1, 0) == 1.3);
}

TEST_CASE("trust region branch table") {
  designers::TrustUpdate a = designers::trust_region_update(0.95, 1.0);
  CHECK(a.D == 2.0);
  CHECK(a.accepted);
  designers::TrustUpdate b = designers::trust_region_update(0.05, 1.0);
  CHECK(b.D == 0.5);
  CHECK_FALSE(b.accepted);
  designers::TrustUpdate c = designers::trust_region_update(0.5, 1.0);
  CHECK(c.D == 1.0);
  CHECK(c.accepted);
}

TEST_CASE("collapsed trust region returns the zero step") {
  core::ProblemSpec spec = gap_spec({1.0});
  designers::WorstCase solved = designers::worst_case(spec);
  designers::DesignPoint point = designers::make_design_point(solved, spec);
  Eigen::VectorXd dx = designers::slm_subproblem(point, 0.0, spec);
  CHECK(dx.norm() == 0.0);
}

TEST_CASE("linearized subproblem predicts descent and grows the step") {
  core::ProblemSpec spec = gap_spec({1.0});
  designers::WorstCase solved = designers::worst_case(spec);
  designers::DesignPoint point = designers::make_design_point(solved, spec);
  Eigen::VectorXd dx = designers::slm_subproblem(point, 1.0, spec);
  CHECK(dx[0] <= 1e-10);                      // predicted change never positive
  CHECK(dx[point.alpha_offset()] > 0.0);      // toward the optimum at 1.5
  CHECK(dx.norm() <= std::sqrt(2.0) + 1e-6);  // trust region respected
}

TEST_CASE("sequential linearization finds the optimal one step schedule") {
  designers::DesignConfig cfg;
  cfg.method = designers::DesignMethod::slm;
  cfg.T_max = 200;
  designers::DesignReport rep = designers::run_slm(cfg, gap_spec({1.0}));
  CHECK(std::abs(rep.final_schedule.alpha(1, 0) - 1.5) <= 0.01);
  CHECK(std::abs(rep.final_w - 0.125) <= 1e-3);
  double last = 1e300;
  for (const auto& it : rep.iterations) {
    CHECK(it.has_trust_fields);
    CHECK(it.D > 0.0);
    if (it.accepted) {
      CHECK(it.w <= last + 1e-12);
      last = it.w;
    }
  }
}

TEST_CASE("sequential linearization matches the two step optimum") {
  designers::DesignConfig cfg;
  cfg.method = designers::DesignMethod::slm;
  cfg.T_max = 300;
  designers::DesignReport rep = designers::run_slm(cfg, gap_spec({1.0, 1.0}));
  CHECK(std::abs(rep.final_schedule.alpha(1, 0) - 1.414) <= 0.02);
  CHECK(std::abs(rep.final_schedule.alpha(2, 1) - 1.877) <= 0.02);
  CHECK(rep.final_w <= 0.0666);
}

TEST_CASE("six step design beats the exhaustive search reference") {
  designers::DesignConfig cfg;
  cfg.method = designers::DesignMethod::slm;
  designers::DesignReport rep = designers::run_design_multistart(
      cfg, gap_spec({1.0, 1.0, 1.0, 1.0, 1.0, 1.0}), 5);
  CHECK(rep.final_w <= 0.020098);
  CHECK(std::abs(rep.final_w - 0.019895) <= 0.02 * 0.019895);
}

TEST_CASE("designed schedules never lose to their initialization") {
  designers::DesignConfig cfg;
  cfg.method = designers::DesignMethod::slm;
  cfg.T_max = 40;
  std::vector<core::ProblemSpec> grid = {
      gap_spec({1.0}),
      gap_spec({0.7, 1.2}),
      make_spec(StepSchedule::memoryless_steps({1.0, 1.0}), 1.0, 0.2, 0.0,
                CriterionKind::final_objective_gap, InitKind::distance_to_opt,
                1.0),
      make_spec(StepSchedule::memoryless_steps({1.0, 1.0}), 1.0, 0.0, 0.0,
                CriterionKind::min_gradient_norm_sq, InitKind::objective_gap,
                1.0),
      make_spec(StepSchedule::memoryless_steps({1.0, 1.0}), 1.0, 0.0, 0.1,
                CriterionKind::min_gradient_norm_sq, InitKind::objective_gap,
                1.0),
      make_spec(StepSchedule::memoryless_steps({1.0, 1.0}), 1.0, 0.0, 0.0,
                CriterionKind::final_distance_sq, InitKind::distance_to_opt,
                1.0),
  };
  for (size_t i = 0; i < grid.size(); ++i) {
    CAPTURE(i);
    double w0 = designers::worst_case(grid[i]).w;
    designers::DesignReport rep = designers::run_slm(cfg, grid[i]);
    CHECK(rep.final_w <= w0 + 1e-9);
    CHECK(rep.termination != "solver_failure");
  }
}

TEST_CASE("multistart keeps the best run and is deterministic") {
  designers::DesignConfig cfg;
  cfg.method = designers::DesignMethod::slm;
  cfg.T_max = 60;
  core::ProblemSpec spec = gap_spec({1.0, 1.0});
  designers::DesignReport a = designers::run_design_multistart(cfg, spec, 3);
  designers::DesignReport b = designers::run_design_multistart(cfg, spec, 3);
  CHECK(a.final_w == b.final_w);
  designers::DesignReport single = designers::run_design(cfg, spec);
  CHECK(a.final_w <= single.final_w + 1e-12);
}

TEST_CASE("design reports serialize with method specific fields") {
  designers::DesignConfig cfg;
  cfg.method = designers::DesignMethod::slm;
  cfg.T_max = 15;
  designers::DesignReport rep = designers::run_slm(cfg, gap_spec({1.0}));
  nlohmann::json j = designers::report_to_json(rep);
  CHECK(j["method"] == "slm");
  CHECK(j["termination"].is_string());
  REQUIRE(j["iterations"].is_array());
  REQUIRE(!j["iterations"].empty());
  for (const auto& it : j["iterations"]) {
    CHECK(it.contains("w"));
    CHECK(it.contains("coeffs"));
    CHECK(it.contains("D"));
    CHECK(it.contains("P"));
    CHECK(it.contains("accepted"));
  }
  CHECK(j["final"]["N"] == 1);
  CHECK(j["final"]["kind"] == "memoryless");

  cfg.method = designers::DesignMethod::fom;
  cfg.T_max = 5;
  nlohmann::json jf =
      designers::report_to_json(designers::run_fom(cfg, gap_spec({1.0})));
  CHECK(jf["method"] == "fom");
  for (const auto& it : jf["iterations"]) {
    CHECK(!it.contains("D"));
    CHECK(!it.contains("P"));
  }
}

TEST_CASE("design configs reject nonsense") {
  designers::DesignConfig cfg;
  cfg.T_max = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = designers::DesignConfig{};
  cfg.tol_w = 0.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = designers::DesignConfig{};
  cfg.D0 = -1.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = designers::DesignConfig{};
  cfg.beta0 = -0.5;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("free parameter maps round trip every schedule family") {
  StepSchedule mem = StepSchedule::memoryless_steps({1.1, 0.9, 1.3});
  StepSchedule full = StepSchedule::full_triangle({{1.0}, {0.5, 1.5}});
  StepSchedule cyc = StepSchedule::cyclic_steps({0.8, 1.2}, 3);
  for (const StepSchedule& s : {mem, full, cyc}) {
    std::vector<double> p = designers::free_parameters(s);
    StepSchedule back = designers::with_free_parameters(s, p);
    CHECK(back.coeffs == s.coeffs);
    std::vector<double> q = p;
    for (auto& v : q) v += 0.25;
    StepSchedule moved = designers::with_free_parameters(s, q);
    CHECK(designers::free_parameters(moved) == q);
    moved.validate();
  }
  CHECK_THROWS_AS(designers::with_free_parameters(mem, {1.0}),
                  std::invalid_argument);
}

}  // TEST_SUITE
