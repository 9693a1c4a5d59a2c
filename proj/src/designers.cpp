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

#include <algorithm>
#include <cmath>
#include <random>
#include <utility>

#include "pepforge/assemble.hpp"
#include "pepforge/designers.hpp"
#include "pepforge/json_io.hpp"

namespace pepforge::designers {

using core::ConstraintTag;
using core::CriterionKind;
using core::GramLayout;
using core::InitKind;
using core::kStar;
using core::PepInstance;
using core::StepSchedule;
using Eigen::MatrixXd;
using Eigen::VectorXd;

const char* to_string(DesignMethod m) {
  switch (m) {
    case DesignMethod::am: return "am";
    case DesignMethod::fom: return "fom";
    case DesignMethod::slm: return "slm";
  }
  return "unknown";
}

void DesignConfig::validate() const {
  if (T_max < 1) throw std::invalid_argument("T_max must be at least 1");
  if (!(tol_w > 0) || !(tol_alpha > 0))
    throw std::invalid_argument("tolerances must be positive");
  if (!(D0 > 0)) throw std::invalid_argument("D0 must be positive");
  if (beta0 < 0) throw std::invalid_argument("beta0 must be nonnegative");
}

std::vector<double> free_parameters(const StepSchedule& schedule) {
  std::vector<double> p;
  switch (schedule.kind) {
    case core::ScheduleKind::memoryless:
      for (int k = 0; k < schedule.N; ++k) p.push_back(schedule.alpha(k + 1, k));
      break;
    case core::ScheduleKind::cyclic:
      for (int k = 0; k < schedule.core_length; ++k)
        p.push_back(schedule.alpha(k + 1, k));
      break;
    case core::ScheduleKind::full:
      for (int i = 1; i <= schedule.N; ++i)
        for (int k = 0; k < i; ++k) p.push_back(schedule.alpha(i, k));
      break;
  }
  return p;
}

StepSchedule with_free_parameters(const StepSchedule& schedule,
                                  const std::vector<double>& params) {
  switch (schedule.kind) {
    case core::ScheduleKind::memoryless:
      if (static_cast<int>(params.size()) != schedule.N)
        throw std::invalid_argument("parameter count mismatch");
      return StepSchedule::memoryless_steps(params);
    case core::ScheduleKind::cyclic: {
      if (static_cast<int>(params.size()) != schedule.core_length)
        throw std::invalid_argument("parameter count mismatch");
      return StepSchedule::cyclic_steps(params, schedule.N / schedule.core_length);
    }
    case core::ScheduleKind::full: {
      std::vector<std::vector<double>> rows;
      size_t at = 0;
      for (int i = 1; i <= schedule.N; ++i) {
        if (at + i > params.size())
          throw std::invalid_argument("parameter count mismatch");
        rows.emplace_back(params.begin() + at, params.begin() + at + i);
        at += i;
      }
      if (at != params.size())
        throw std::invalid_argument("parameter count mismatch");
      return StepSchedule::full_triangle(rows);
    }
  }
  throw std::invalid_argument("unknown schedule kind");
}

namespace {

core::FunctionClassSpec normalized_class(const core::FunctionClassSpec& c) {
  core::FunctionClassSpec n = c;
  n.mu = c.mu / c.L;
  n.L = 1.0;
  return n;
}

std::vector<std::pair<int, int>> interpolation_pairs(int N) {
  std::vector<int> iset;
  for (int i = 0; i <= N; ++i) iset.push_back(i);
  iset.push_back(kStar);
  std::vector<std::pair<int, int>> pairs;
  for (int i : iset)
    for (int j : iset)
      if (i != j) pairs.emplace_back(i, j);
  return pairs;
}

// Triangle entries (row, col) tied to each free parameter.
std::vector<std::vector<std::pair<int, int>>> tie_map(const StepSchedule& s) {
  std::vector<std::vector<std::pair<int, int>>> ties;
  switch (s.kind) {
    case core::ScheduleKind::memoryless:
      ties.resize(s.N);
      for (int k = 0; k < s.N; ++k)
        for (int i = k + 1; i <= s.N; ++i) ties[k].emplace_back(i, k);
      break;
    case core::ScheduleKind::cyclic:
      ties.resize(s.core_length);
      for (int k = 0; k < s.N; ++k)
        for (int i = k + 1; i <= s.N; ++i)
          ties[k % s.core_length].emplace_back(i, k);
      break;
    case core::ScheduleKind::full:
      for (int i = 1; i <= s.N; ++i)
        for (int k = 0; k < i; ++k) ties.push_back({{i, k}});
      break;
  }
  return ties;
}

int step_column(const GramLayout& lay, int k) {
  return lay.inexact ? lay.dcol(k) : lay.gcol(k);
}

// <G, dA_{i,j}/dalpha_{m,k}> without forming the matrix: the derivative of
// dh = h_i - h_j is sgn * e_col with sgn = -1 if i == m, +1 if j == m.
double pair_sensitivity(const MatrixXd& G, const core::FunctionClassSpec& norm,
                        const StepSchedule& sched, const GramLayout& lay, int i,
                        int j, int m, int k) {
  double sgn = i == m ? -1.0 : (j == m ? 1.0 : 0.0);
  if (sgn == 0.0) return 0.0;
  const double mu = norm.mu;
  const double rho = 1.0 / (2.0 * (1.0 - mu));
  const int col = step_column(lay, k);
  auto u_of = [&](int idx) {
    return core::u_vector(lay, idx == kStar ? core::Symbol::star()
                                            : core::Symbol::grad(idx));
  };
  VectorXd uj = u_of(j);
  VectorXd Gv = sgn * G.col(col);
  double val = uj.dot(Gv);
  if (mu != 0.0) {
    VectorXd du = u_of(i) - uj;
    VectorXd dh = core::h_vector(sched, lay, i) - core::h_vector(sched, lay, j);
    val += rho * mu * 2.0 * dh.dot(Gv) - 2.0 * mu * rho * du.dot(Gv);
  }
  return val;
}

// dA_{i,j}/dalpha_{m,k} as a matrix (subproblem assembly path).
MatrixXd pair_derivative(const core::FunctionClassSpec& norm,
                         const StepSchedule& sched, const GramLayout& lay, int i,
                         int j, int m, int k) {
  const int dim = lay.m();
  double sgn = i == m ? -1.0 : (j == m ? 1.0 : 0.0);
  if (sgn == 0.0) return MatrixXd::Zero(dim, dim);
  const double mu = norm.mu;
  const double rho = 1.0 / (2.0 * (1.0 - mu));
  VectorXd v = VectorXd::Zero(dim);
  v[step_column(lay, k)] = sgn;
  auto u_of = [&](int idx) {
    return core::u_vector(lay, idx == kStar ? core::Symbol::star()
                                            : core::Symbol::grad(idx));
  };
  VectorXd uj = u_of(j);
  MatrixXd D = 0.5 * (uj * v.transpose() + v * uj.transpose());
  if (mu != 0.0) {
    VectorXd du = u_of(i) - uj;
    VectorXd dh = core::h_vector(sched, lay, i) - core::h_vector(sched, lay, j);
    D += rho * mu * (v * dh.transpose() + dh * v.transpose());
    D -= mu * rho * (du * v.transpose() + v * du.transpose());
  }
  return D;
}

// Variable index of each instance constraint in the multiplier block of a
// DesignPoint (and of the encoded dual): initial first, rest in order.
std::vector<int> multiplier_index(const PepInstance& inst) {
  std::vector<int> idx(inst.constraints.size());
  int next = 1;
  for (size_t c = 0; c < inst.constraints.size(); ++c)
    idx[c] = inst.constraints[c].tag.kind == ConstraintTag::Kind::initial ? 0
                                                                          : next++;
  return idx;
}

core::ProblemSpec with_schedule(const core::ProblemSpec& spec,
                                const StepSchedule& sched) {
  core::ProblemSpec s = spec;
  s.schedule = sched;
  return s;
}

void ensure_affine_in_steps(const core::ProblemSpec& spec) {
  if (spec.fclass.mu > 0)
    throw UnsupportedSpecError(
        "steps subproblem: strong convexity makes the slack matrix quadratic "
        "in the steps");
  if (spec.criterion.kind == CriterionKind::final_distance_sq)
    throw UnsupportedSpecError(
        "steps subproblem: the final-distance criterion is quadratic in the "
        "steps");
}

}  // namespace

WorstCase worst_case(const core::ProblemSpec& spec, double tol) {
  spec.validate();
  WorstCase out;
  out.inst = core::assemble_primal(spec.schedule, spec.fclass, spec.criterion,
                                   spec.init);
  conic::ConeProgram prog = bridge::encode_dual(out.inst);
  conic::SolverOptions opts;
  opts.tol = tol;
  out.sol = conic::solve(prog, opts);
  if (out.sol.status == conic::SolveStatus::numerical_failure) {
    opts.tol = tol * 10;
    opts.diag_regularization = 1e-10;
    out.sol = conic::solve(prog, opts);
  }
  if (out.sol.status == conic::SolveStatus::numerical_failure)
    throw SolverFailureError("worst-case solve failed after relaxed retry");
  if (out.sol.status != conic::SolveStatus::optimal)
    throw std::runtime_error(std::string("worst-case dual reported ") +
                             conic::to_string(out.sol.status));
  out.cert = bridge::decode_certificate(out.inst, out.sol);
  out.witness = bridge::decode_witness(out.inst, out.sol, spec.schedule);
  out.w = out.cert.bound;
  return out;
}

VectorXd dual_gradient_at(const core::ProblemSpec& spec, const WorstCase& solved) {
  const StepSchedule& sched = spec.schedule;
  const GramLayout& lay = solved.inst.layout;
  core::FunctionClassSpec norm = normalized_class(spec.fclass);
  const MatrixXd& G = solved.witness.G;
  auto ties = tie_map(sched);
  auto pairs = interpolation_pairs(sched.N);
  VectorXd grad = VectorXd::Zero(ties.size());
  for (size_t f = 0; f < ties.size(); ++f) {
    double acc = 0.0;
    for (auto [m, k] : ties[f]) {
      for (auto [i, j] : pairs) {
        if (i != m && j != m) continue;
        auto it = solved.cert.lambda.find({i, j});
        if (it == solved.cert.lambda.end() || it->second == 0.0) continue;
        acc -= it->second * pair_sensitivity(G, norm, sched, lay, i, j, m, k);
      }
      if (spec.criterion.kind == CriterionKind::final_distance_sq && m == sched.N) {
        // criterion matrix h_N h_N' differentiates to -(e h' + h e')
        VectorXd hN = core::h_vector(sched, lay, sched.N);
        acc -= 2.0 * G.col(step_column(lay, k)).dot(hN);
      }
    }
    grad[f] = acc;
  }
  return grad;
}

VectorXd dual_gradient(const core::ProblemSpec& spec, double tol) {
  WorstCase solved = worst_case(spec, tol);
  return dual_gradient_at(spec, solved);
}

AmStep am_schedule_subproblem(const core::DualCertificate& multipliers,
                              const core::ProblemSpec& spec, double tol) {
  ensure_affine_in_steps(spec);
  const StepSchedule& sched = spec.schedule;
  PepInstance inst = core::assemble_primal(spec.schedule, spec.fclass,
                                           spec.criterion, spec.init);
  const GramLayout& lay = inst.layout;
  core::FunctionClassSpec norm = normalized_class(spec.fclass);
  auto ties = tie_map(sched);
  const int nfree = static_cast<int>(ties.size());
  const int svlen = conic::svec_len(lay.m());

  auto mult_of = [&](const ConstraintTag& tag) -> double {
    switch (tag.kind) {
      case ConstraintTag::Kind::initial: return 0.0;  // tau is the variable
      case ConstraintTag::Kind::interpolation: {
        auto it = multipliers.lambda.find({tag.i, tag.j});
        return it == multipliers.lambda.end() ? 0.0 : it->second;
      }
      case ConstraintTag::Kind::inexactness: {
        auto it = multipliers.eta.find(tag.i);
        return it == multipliers.eta.end() ? 0.0 : it->second;
      }
      case ConstraintTag::Kind::epigraph: {
        auto it = multipliers.sigma.find(tag.i);
        return it == multipliers.sigma.end() ? 0.0 : it->second;
      }
    }
    return 0.0;
  };

  // Stationarity rows carry no step variables; with the multipliers frozen
  // they must already hold (tau may appear via a functional init).
  VectorXd station = -inst.b;
  double tau_coef0 = 0.0;  // coefficient of tau in the f_0 row
  double simplex = -inst.tobj;
  VectorXd init_fcoef;
  for (const auto& c : inst.constraints) {
    if (c.tag.kind == ConstraintTag::Kind::initial) {
      init_fcoef = c.fcoef;
      tau_coef0 = c.fcoef.cwiseAbs().sum();
      continue;
    }
    station += mult_of(c.tag) * c.fcoef;
    simplex += mult_of(c.tag) * c.tcoef;
  }
  if (inst.has_epigraph && std::abs(simplex) > 1e-6)
    throw std::runtime_error(
        "steps subproblem infeasible: epigraph multipliers do not sum to one");

  // Slack S(tau, steps) = tau*A_R + sum_f step_f * K_f + K0 with the frozen
  // multipliers; K0 collects the step-free part (steps evaluated at zero).
  StepSchedule zero = sched;
  for (auto& row : zero.coeffs) std::fill(row.begin(), row.end(), 0.0);
  PepInstance inst0 = core::assemble_primal(zero, spec.fclass, spec.criterion,
                                            spec.init);
  VectorXd K0 = VectorXd::Zero(svlen);
  VectorXd aR = VectorXd::Zero(svlen);
  for (const auto& c : inst0.constraints) {
    if (c.tag.kind == ConstraintTag::Kind::initial)
      aR = c.gvec;
    else
      K0 += mult_of(c.tag) * c.gvec;
  }
  std::vector<VectorXd> K(nfree, VectorXd::Zero(svlen));
  for (size_t f = 0; f < ties.size(); ++f)
    for (auto [m, k] : ties[f])
      for (auto [i, j] : interpolation_pairs(sched.N)) {
        if (i != m && j != m) continue;
        double lam = mult_of({ConstraintTag::Kind::interpolation, i, j});
        if (lam == 0.0) continue;
        K[f] += lam * conic::svec(pair_derivative(norm, sched, lay, i, j, m, k));
      }

  conic::ConeProgram prog;
  prog.nvar = 1 + nfree;
  prog.objective = {{0, 1.0}};
  int row = 0;
  // stationarity rows that involve tau (functional init); the others are
  // constants and must vanish up to certificate tolerance
  for (int r = 0; r < inst.num_fvals(); ++r) {
    double coef = init_fcoef.size() ? init_fcoef[r] : 0.0;
    if (coef != 0.0) {
      prog.rows.push_back({row, 0, coef});
      if (-station[r] != 0.0) prog.rhs.emplace_back(row, -station[r]);
      ++row;
    } else if (std::abs(station[r]) > 1e-6) {
      throw std::runtime_error(
          "steps subproblem infeasible: stationarity cannot hold with the "
          "frozen multipliers");
    }
  }
  if (row > 0) prog.cones.push_back({conic::ConeKind::zero, 0, row});
  prog.rows.push_back({row, 0, -1.0});  // tau >= 0
  prog.cones.push_back({conic::ConeKind::nonneg, row, 1});
  ++row;
  for (int q = 0; q < svlen; ++q) {
    if (aR[q] != 0.0) prog.rows.push_back({row + q, 0, -aR[q]});
    for (int f = 0; f < nfree; ++f)
      if (K[f][q] != 0.0) prog.rows.push_back({row + q, 1 + f, -K[f][q]});
    if (K0[q] != 0.0) prog.rhs.emplace_back(row + q, K0[q]);
  }
  prog.cones.push_back({conic::ConeKind::psd, row, svlen});

  conic::SolverOptions opts;
  opts.tol = tol;
  conic::ConicSolution sol = conic::solve(prog, opts);
  if (sol.status == conic::SolveStatus::numerical_failure) {
    opts.tol = tol * 10;
    opts.diag_regularization = 1e-10;
    sol = conic::solve(prog, opts);
  }
  if (sol.status == conic::SolveStatus::infeasible)
    throw std::runtime_error(
        "steps subproblem infeasible: stationarity cannot hold with the "
        "frozen multipliers");
  if (sol.status != conic::SolveStatus::optimal)
    throw SolverFailureError(std::string("steps subproblem reported ") +
                             conic::to_string(sol.status));
  AmStep out;
  std::vector<double> params(sol.x.data() + 1, sol.x.data() + 1 + nfree);
  out.schedule = with_free_parameters(sched, params);
  out.tau = sol.x[0];
  return out;
}

DesignReport run_am(const DesignConfig& config, const core::ProblemSpec& spec) {
  config.validate();
  ensure_affine_in_steps(spec);
  DesignReport report;
  report.method = DesignMethod::am;
  core::ProblemSpec cur = spec;
  try {
    WorstCase solved = worst_case(cur, config.solver_tol);
    double w_prev = solved.w;
    report.final_schedule = cur.schedule;
    report.final_certificate = solved.cert;
    report.final_w = solved.w;
    report.termination = "iteration_cap";
    for (int t = 0; t < config.T_max; ++t) {
      AmStep step = am_schedule_subproblem(solved.cert, cur, config.solver_tol);
      std::vector<double> before = free_parameters(cur.schedule);
      std::vector<double> after = free_parameters(step.schedule);
      double dalpha = 0.0;
      for (size_t i = 0; i < before.size(); ++i)
        dalpha = std::max(dalpha, std::abs(after[i] - before[i]));
      cur.schedule = step.schedule;
      solved = worst_case(cur, config.solver_tol);  // refresh multipliers
      DesignIteration it;
      it.w = solved.w;
      it.schedule = cur.schedule;
      report.iterations.push_back(it);
      report.final_schedule = cur.schedule;
      report.final_certificate = solved.cert;
      report.final_w = solved.w;
      double improvement = w_prev - solved.w;
      w_prev = solved.w;
      if (improvement < config.tol_w && dalpha < config.tol_alpha) {
        report.termination = "converged";
        break;
      }
    }
  } catch (const SolverFailureError&) {
    report.termination = "solver_failure";
  }
  return report;
}

DesignReport run_fom(const DesignConfig& config, const core::ProblemSpec& spec) {
  config.validate();
  DesignReport report;
  report.method = DesignMethod::fom;
  core::ProblemSpec cur = spec;
  try {
    WorstCase solved = worst_case(cur, config.solver_tol);
    DesignIteration first;
    first.w = solved.w;
    first.schedule = cur.schedule;
    report.iterations.push_back(first);
    WorstCase best = solved;
    StepSchedule best_schedule = cur.schedule;
    report.termination = "iteration_cap";
    if (config.beta0 == 0.0) report.termination = "converged";
    double w_prev = solved.w;
    for (int t = 1; t < config.T_max && config.beta0 > 0.0; ++t) {
      VectorXd g = dual_gradient_at(cur, solved);
      double beta = config.beta0 / std::sqrt(static_cast<double>(t));
      std::vector<double> params = free_parameters(cur.schedule);
      double dalpha = 0.0;
      for (size_t i = 0; i < params.size(); ++i) {
        double delta = beta * g[i];
        params[i] -= delta;
        dalpha = std::max(dalpha, std::abs(delta));
      }
      cur.schedule = with_free_parameters(cur.schedule, params);
      solved = worst_case(cur, config.solver_tol);
      DesignIteration it;
      it.w = solved.w;
      it.schedule = cur.schedule;
      report.iterations.push_back(it);
      if (solved.w < best.w) {
        best = solved;
        best_schedule = cur.schedule;
      }
      if (std::abs(w_prev - solved.w) < config.tol_w &&
          dalpha < config.tol_alpha) {
        report.termination = "converged";
        break;
      }
      w_prev = solved.w;
    }
    report.final_schedule = best_schedule;
    report.final_certificate = best.cert;
    report.final_w = best.w;
  } catch (const SolverFailureError&) {
    report.termination = "solver_failure";
  }
  return report;
}

DesignPoint make_design_point(const WorstCase& solved,
                              const core::ProblemSpec& spec) {
  DesignPoint pt;
  const int N = spec.schedule.N;
  auto pairs = interpolation_pairs(N);
  pt.num_pairs = static_cast<int>(pairs.size());
  pt.num_eta = solved.inst.layout.inexact ? N : 0;
  pt.num_sigma = solved.inst.has_epigraph ? N : 0;
  std::vector<double> params = free_parameters(spec.schedule);
  pt.num_alpha = static_cast<int>(params.size());
  pt.x = VectorXd::Zero(pt.dim());
  pt.x[0] = solved.cert.tau;
  int at = 1;
  for (auto [i, j] : pairs) {
    auto it = solved.cert.lambda.find({i, j});
    pt.x[at++] = it == solved.cert.lambda.end() ? 0.0 : it->second;
  }
  for (int i = 0; i < pt.num_eta; ++i) {
    auto it = solved.cert.eta.find(i);
    pt.x[at++] = it == solved.cert.eta.end() ? 0.0 : it->second;
  }
  for (int k = 1; k <= pt.num_sigma; ++k) {
    auto it = solved.cert.sigma.find(k);
    pt.x[at++] = it == solved.cert.sigma.end() ? 0.0 : it->second;
  }
  for (double p : params) pt.x[at++] = p;
  return pt;
}

VectorXd slm_subproblem(const DesignPoint& point, double D,
                        const core::ProblemSpec& spec, double tol) {
  if (D <= 0.0) return VectorXd::Zero(point.dim());
  std::vector<double> params(point.x.data() + point.alpha_offset(),
                             point.x.data() + point.dim());
  StepSchedule sched = with_free_parameters(spec.schedule, params);
  PepInstance inst =
      core::assemble_primal(sched, spec.fclass, spec.criterion, spec.init);
  const GramLayout& lay = inst.layout;
  core::FunctionClassSpec norm = normalized_class(spec.fclass);
  const int svlen = conic::svec_len(lay.m());
  const int nmult = 1 + point.num_pairs + point.num_eta + point.num_sigma;
  const int nvar = point.dim();
  std::vector<int> vindex = multiplier_index(inst);

  // dS/dalpha_f at the current point: interpolation terms plus, for the
  // final-distance criterion, the derivative of -C = -h_N h_N'.
  auto ties = tie_map(sched);
  std::vector<VectorXd> K(point.num_alpha, VectorXd::Zero(svlen));
  auto pairs = interpolation_pairs(sched.N);
  for (int f = 0; f < point.num_alpha; ++f) {
    for (auto [m, k] : ties[f]) {
      for (size_t p = 0; p < pairs.size(); ++p) {
        double lam = point.x[1 + static_cast<int>(p)];
        if (lam == 0.0) continue;
        auto [i, j] = pairs[p];
        if (i != m && j != m) continue;
        K[f] += lam * conic::svec(
                          pair_derivative(norm, sched, lay, i, j, m, k));
      }
      if (spec.criterion.kind == CriterionKind::final_distance_sq &&
          m == sched.N) {
        VectorXd hN = core::h_vector(sched, lay, sched.N);
        VectorXd e = VectorXd::Zero(lay.m());
        e[step_column(lay, k)] = 1.0;
        K[f] += conic::svec(MatrixXd(e * hN.transpose() + hN * e.transpose()));
      }
    }
  }

  // current slack and stationarity residuals from the instance data
  VectorXd svec_S = -inst.cvec;
  VectorXd station = inst.b;
  double simplex = inst.tobj;
  for (size_t c = 0; c < inst.constraints.size(); ++c) {
    double x = point.x[vindex[c]];
    svec_S += x * inst.constraints[c].gvec;
    station -= x * inst.constraints[c].fcoef;
    simplex -= x * inst.constraints[c].tcoef;
  }

  conic::ConeProgram prog;
  prog.nvar = nvar;
  prog.objective = {{0, 1.0}};
  int row = 0;
  // stationarity at point + dx (linear, hence exact)
  for (int r = 0; r < inst.num_fvals(); ++r) {
    for (size_t c = 0; c < inst.constraints.size(); ++c)
      if (inst.constraints[c].fcoef[r] != 0.0)
        prog.rows.push_back({row, vindex[c], inst.constraints[c].fcoef[r]});
    if (station[r] != 0.0) prog.rhs.emplace_back(row, station[r]);
    ++row;
  }
  if (inst.has_epigraph) {
    for (size_t c = 0; c < inst.constraints.size(); ++c)
      if (inst.constraints[c].tcoef != 0.0)
        prog.rows.push_back({row, vindex[c], inst.constraints[c].tcoef});
    if (simplex != 0.0) prog.rhs.emplace_back(row, simplex);
    ++row;
  }
  prog.cones.push_back({conic::ConeKind::zero, 0, row});
  // signs of the multipliers at point + dx
  for (int v = 0; v < nmult; ++v) {
    prog.rows.push_back({row, v, -1.0});
    if (point.x[v] != 0.0) prog.rhs.emplace_back(row, point.x[v]);
    ++row;
  }
  prog.cones.push_back({conic::ConeKind::nonneg, row - nmult, nmult});
  // trust region |dx| <= sqrt(2 D)
  prog.rhs.emplace_back(row, std::sqrt(2.0 * D));
  for (int v = 0; v < nvar; ++v) prog.rows.push_back({row + 1 + v, v, -1.0});
  prog.cones.push_back({conic::ConeKind::second_order, row, nvar + 1});
  row += nvar + 1;
  // linearized slack psd
  for (size_t c = 0; c < inst.constraints.size(); ++c) {
    const VectorXd& gv = inst.constraints[c].gvec;
    for (int q = 0; q < svlen; ++q)
      if (gv[q] != 0.0) prog.rows.push_back({row + q, vindex[c], -gv[q]});
  }
  for (int f = 0; f < point.num_alpha; ++f)
    for (int q = 0; q < svlen; ++q)
      if (K[f][q] != 0.0)
        prog.rows.push_back({row + q, nmult + f, -K[f][q]});
  for (int q = 0; q < svlen; ++q)
    if (svec_S[q] != 0.0) prog.rhs.emplace_back(row + q, svec_S[q]);
  prog.cones.push_back({conic::ConeKind::psd, row, svlen});

  conic::SolverOptions opts;
  opts.tol = tol;
  conic::ConicSolution sol = conic::solve(prog, opts);
  if (sol.status != conic::SolveStatus::optimal) {
    opts.tol = tol * 10;
    opts.diag_regularization = 1e-10;
    sol = conic::solve(prog, opts);
  }
  if (sol.status != conic::SolveStatus::optimal)
    throw SolverFailureError(std::string("linearized subproblem reported ") +
                             conic::to_string(sol.status));
  return sol.x;
}

TrustUpdate trust_region_update(double P, double D) {
  if (P >= 0.9) return {2.0 * D, true};
  if (P <= 0.1) return {0.5 * D, false};
  return {D, true};
}

DesignReport run_slm(const DesignConfig& config, const core::ProblemSpec& spec) {
  config.validate();
  DesignReport report;
  report.method = DesignMethod::slm;
  core::ProblemSpec cur = spec;
  report.final_schedule = cur.schedule;
  report.termination = "iteration_cap";
  try {
    WorstCase solved = worst_case(cur, config.solver_tol);
    DesignPoint point = make_design_point(solved, cur);
    double D = config.D0;
    report.final_certificate = solved.cert;
    report.final_w = solved.w;
    for (int t = 0; t < config.T_max; ++t) {
      VectorXd dx;
      try {
        dx = slm_subproblem(point, D, cur, config.solver_tol);
      } catch (const SolverFailureError&) {
        D *= 0.5;  // shrink and retry next round
        if (D < 1e-12) {
          report.termination = "converged";
          break;
        }
        continue;
      }
      double predicted = dx[0] * solved.inst.value_scale;
      if (std::abs(predicted) <= 1e-14) {
        report.termination = "converged";
        break;
      }
      VectorXd alpha_new = point.alpha() + dx.tail(point.num_alpha);
      std::vector<double> params(alpha_new.data(),
                                 alpha_new.data() + alpha_new.size());
      StepSchedule trial_schedule = with_free_parameters(cur.schedule, params);
      WorstCase trial;
      try {
        trial = worst_case(with_schedule(cur, trial_schedule),
                           config.solver_tol);
      } catch (const SolverFailureError&) {
        // unevaluable trial point: treat like a rejected step
        D *= 0.5;
        if (D < 1e-12) {
          report.termination = "converged";
          break;
        }
        continue;
      }
      double realized = trial.w - solved.w;
      double P = realized / predicted;
      TrustUpdate tu = trust_region_update(P, D);
      D = tu.D;
      DesignIteration it;
      it.has_trust_fields = true;
      it.D = D;
      it.P = P;
      it.accepted = tu.accepted;
      double dalpha = dx.tail(point.num_alpha).lpNorm<Eigen::Infinity>();
      if (tu.accepted) {
        cur.schedule = trial_schedule;
        solved = trial;
        point = make_design_point(solved, cur);  // refresh on acceptance only
        report.final_schedule = cur.schedule;
        report.final_certificate = solved.cert;
        report.final_w = solved.w;
      }
      it.w = solved.w;
      it.schedule = cur.schedule;
      report.iterations.push_back(it);
      if (tu.accepted && std::abs(realized) < config.tol_w &&
          dalpha < config.tol_alpha) {
        report.termination = "converged";
        break;
      }
      if (D < 1e-12) {
        report.termination = "converged";
        break;
      }
    }
  } catch (const SolverFailureError&) {
    report.termination = "solver_failure";
  }
  return report;
}

DesignReport run_design(const DesignConfig& config, const core::ProblemSpec& spec) {
  switch (config.method) {
    case DesignMethod::am: return run_am(config, spec);
    case DesignMethod::fom: return run_fom(config, spec);
    case DesignMethod::slm: return run_slm(config, spec);
  }
  throw std::invalid_argument("unknown design method");
}

DesignReport run_design_multistart(const DesignConfig& config,
                                   const core::ProblemSpec& spec, int starts,
                                   unsigned seed) {
  if (starts < 1) throw std::invalid_argument("starts must be at least 1");
  std::mt19937 gen(seed);
  std::uniform_real_distribution<double> draw(0.5, 1.5);
  DesignReport best;
  bool have = false;
  for (int s = 0; s < starts; ++s) {
    core::ProblemSpec attempt = spec;
    if (s > 0) {
      std::vector<double> params = free_parameters(spec.schedule);
      for (auto& p : params) p *= draw(gen);
      attempt.schedule = with_free_parameters(spec.schedule, params);
    }
    DesignReport rep = run_design(config, attempt);
    if (!have || (rep.termination != "solver_failure" &&
                  rep.final_w < best.final_w)) {
      best = rep;
      have = true;
    }
  }
  return best;
}

nlohmann::json report_to_json(const DesignReport& report) {
  nlohmann::json j;
  j["method"] = to_string(report.method);
  j["iterations"] = nlohmann::json::array();
  for (const auto& it : report.iterations) {
    nlohmann::json e;
    e["w"] = it.w;
    e["coeffs"] = it.schedule.coeffs;
    if (it.has_trust_fields) {
      e["D"] = it.D;
      e["P"] = it.P;
      e["accepted"] = it.accepted;
    }
    j["iterations"].push_back(e);
  }
  j["final"] = core::schedule_to_json(report.final_schedule);
  j["termination"] = report.termination;
  return j;
}

}  // namespace pepforge::designers
