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
#include <stdexcept>

#include "pepforge/assemble.hpp"

namespace pepforge::core {

using Eigen::MatrixXd;
using Eigen::VectorXd;

const char* to_string(ScheduleKind k) {
  switch (k) {
    case ScheduleKind::memoryless: return "memoryless";
    case ScheduleKind::full: return "full";
    case ScheduleKind::cyclic: return "cyclic";
  }
  return "unknown";
}

const char* to_string(CriterionKind k) {
  switch (k) {
    case CriterionKind::final_objective_gap: return "gap";
    case CriterionKind::final_distance_sq: return "dist";
    case CriterionKind::min_gradient_norm_sq: return "min_grad";
  }
  return "unknown";
}

const char* to_string(InitKind k) {
  switch (k) {
    case InitKind::distance_to_opt: return "dist";
    case InitKind::objective_gap: return "gap";
  }
  return "unknown";
}

void StepSchedule::validate() const {
  if (N <= 0) throw std::invalid_argument("iteration count must be positive");
  if (static_cast<int>(coeffs.size()) != N)
    throw std::invalid_argument("coeffs must have one row per iteration");
  for (int i = 1; i <= N; ++i) {
    if (static_cast<int>(coeffs[i - 1].size()) != i)
      throw std::invalid_argument("row i of coeffs must have i entries");
  }
  if (kind == ScheduleKind::memoryless || kind == ScheduleKind::cyclic) {
    for (int k = 0; k < N; ++k)
      for (int i = k + 2; i <= N; ++i)
        if (alpha(i, k) != alpha(k + 1, k))
          throw std::invalid_argument(
              "memoryless columns must be constant below the diagonal");
  }
  if (kind == ScheduleKind::cyclic) {
    if (core_length <= 0 || N % core_length != 0)
      throw std::invalid_argument("N must be a multiple of the cyclic core length");
    for (int k = 0; k + core_length < N; ++k)
      if (alpha(k + core_length + 1, k + core_length) != alpha(k + 1, k))
        throw std::invalid_argument("cyclic core must repeat with its period");
  } else if (core_length != 0) {
    throw std::invalid_argument("core_length is reserved for cyclic schedules");
  }
}

StepSchedule StepSchedule::memoryless_steps(const std::vector<double>& h) {
  StepSchedule s;
  s.N = static_cast<int>(h.size());
  s.kind = ScheduleKind::memoryless;
  for (int i = 1; i <= s.N; ++i) {
    std::vector<double> row(i);
    for (int k = 0; k < i; ++k) row[k] = h[k];
    s.coeffs.push_back(std::move(row));
  }
  s.validate();
  return s;
}

StepSchedule StepSchedule::full_triangle(const std::vector<std::vector<double>>& rows) {
  StepSchedule s;
  s.N = static_cast<int>(rows.size());
  s.kind = ScheduleKind::full;
  s.coeffs = rows;
  s.validate();
  return s;
}

StepSchedule StepSchedule::cyclic_steps(const std::vector<double>& core, int reps) {
  std::vector<double> h;
  for (int r = 0; r < reps; ++r) h.insert(h.end(), core.begin(), core.end());
  StepSchedule s = memoryless_steps(h);
  s.kind = ScheduleKind::cyclic;
  s.core_length = static_cast<int>(core.size());
  s.validate();
  return s;
}

void FunctionClassSpec::validate() const {
  if (!(L > 0) || !std::isfinite(L)) throw std::invalid_argument("L must be positive");
  if (!(mu >= 0) || !(mu < L))
    throw std::invalid_argument("mu must satisfy 0 <= mu < L");
  if (oracle == OracleKind::exact) {
    if (epsilon != 0.0)
      throw std::invalid_argument("exact oracle requires epsilon = 0");
  } else {
    if (!(epsilon > 0) || !(epsilon < 1))
      throw std::invalid_argument("inexact oracle requires 0 < epsilon < 1");
  }
}

void InitSpec::validate() const {
  if (!(R > 0)) throw std::invalid_argument("R must be positive");
}

void ProblemSpec::validate() const {
  schedule.validate();
  fclass.validate();
  init.validate();
  if (criterion.kind == CriterionKind::min_gradient_norm_sq && schedule.N < 1)
    throw std::invalid_argument("min_grad criterion needs at least one step");
}

double value_rescale(CriterionKind criterion, InitKind init, double L, double R) {
  // Units: gap ~ L*|x|^2, dist ~ |x|^2, min_grad ~ L^2*|x|^2; a distance init
  // fixes |x| = R, a functional init fixes L*|x|^2 = R, i.e. |x|^2 = R/L.
  double xsq = init == InitKind::distance_to_opt ? R * R : R / L;
  switch (criterion) {
    case CriterionKind::final_objective_gap: return L * xsq;
    case CriterionKind::final_distance_sq: return xsq;
    case CriterionKind::min_gradient_norm_sq: return L * L * xsq;
  }
  return 1.0;
}

VectorXd h_vector(const StepSchedule& schedule, const GramLayout& layout, int i) {
  VectorXd h = VectorXd::Zero(layout.m());
  if (i == kStar) return h;
  if (i < 0 || i > layout.N) throw std::out_of_range("iterate index");
  h[layout.xcol()] = 1.0;
  for (int k = 0; k < i; ++k) {
    int col = layout.inexact ? layout.dcol(k) : layout.gcol(k);
    h[col] -= schedule.alpha(i, k);
  }
  return h;
}

VectorXd u_vector(const GramLayout& layout, Symbol s) {
  VectorXd u = VectorXd::Zero(layout.m());
  switch (s.kind) {
    case Symbol::Kind::star: break;
    case Symbol::Kind::gradient: u[layout.gcol(s.index)] = 1.0; break;
    case Symbol::Kind::direction: u[layout.dcol(s.index)] = 1.0; break;
  }
  return u;
}

namespace {

VectorXd u_of(const GramLayout& layout, int i) {
  return u_vector(layout, i == kStar ? Symbol::star() : Symbol::grad(i));
}

MatrixXd sym(const MatrixXd& X) { return 0.5 * (X + X.transpose()); }

}  // namespace

InterpolationRow interpolation_constraint(const FunctionClassSpec& fclass,
                                          const StepSchedule& schedule, int i,
                                          int j) {
  if (i == j) throw std::invalid_argument("interpolation pair must have i != j");
  auto check = [&](int v) {
    if (v != kStar && (v < 0 || v > schedule.N))
      throw std::out_of_range("interpolation index");
  };
  check(i);
  check(j);
  GramLayout layout{schedule.N, fclass.oracle == OracleKind::relatively_inexact};
  const double L = fclass.L, mu = fclass.mu;
  const double rho = 1.0 / (2.0 * (1.0 - mu / L));
  VectorXd ui = u_of(layout, i), uj = u_of(layout, j);
  VectorXd hi = h_vector(schedule, layout, i), hj = h_vector(schedule, layout, j);
  VectorXd du = ui - uj, dh = hi - hj;
  InterpolationRow row;
  row.A = sym(uj * dh.transpose()) + (rho / L) * du * du.transpose() +
          rho * mu * dh * dh.transpose() -
          (2.0 * mu * rho / L) * sym(du * dh.transpose());
  row.fcoef = VectorXd::Zero(schedule.N + 1);
  if (i != kStar) row.fcoef[i] += 1.0;
  if (j != kStar) row.fcoef[j] -= 1.0;
  return row;
}

MatrixXd inexactness_constraint(const GramLayout& layout, int i, double epsilon) {
  VectorXd ug = u_vector(layout, Symbol::grad(i));
  VectorXd ud = u_vector(layout, Symbol::dir(i));  // throws on exact layout
  VectorXd diff = ud - ug;
  return diff * diff.transpose() - epsilon * epsilon * ug * ug.transpose();
}

PepInstance assemble_primal(const StepSchedule& schedule,
                            const FunctionClassSpec& fclass,
                            const CriterionSpec& criterion, const InitSpec& init) {
  ProblemSpec{schedule, fclass, criterion, init}.validate();
  const int N = schedule.N;
  PepInstance inst;
  inst.layout = GramLayout{N, fclass.oracle == OracleKind::relatively_inexact};
  const int m = inst.layout.m();
  const int svlen = conic::svec_len(m);
  inst.value_scale = value_rescale(criterion.kind, init.kind, fclass.L, init.R);

  // normalized copy: L = 1 keeps mu/L, epsilon is scale free already
  FunctionClassSpec norm = fclass;
  norm.mu = fclass.mu / fclass.L;
  norm.L = 1.0;

  inst.b = VectorXd::Zero(N + 1);
  inst.cvec = VectorXd::Zero(svlen);
  switch (criterion.kind) {
    case CriterionKind::final_objective_gap:
      inst.b[N] = 1.0;
      break;
    case CriterionKind::final_distance_sq: {
      VectorXd hN = h_vector(schedule, inst.layout, N);
      inst.cvec = conic::svec(MatrixXd(hN * hN.transpose()));
      break;
    }
    case CriterionKind::min_gradient_norm_sq:
      inst.has_epigraph = true;
      inst.tobj = 1.0;
      break;
  }

  std::vector<int> iset;
  for (int i = 0; i <= N; ++i) iset.push_back(i);
  iset.push_back(kStar);
  for (int i : iset) {
    for (int j : iset) {
      if (i == j) continue;
      InterpolationRow row = interpolation_constraint(norm, schedule, i, j);
      LinearConstraint c;
      c.fcoef = -row.fcoef;  // <A, G> - fcoef.F <= 0
      c.gvec = conic::svec(row.A);
      c.rhs = 0.0;
      c.tag = {ConstraintTag::Kind::interpolation, i, j};
      inst.constraints.push_back(std::move(c));
    }
  }
  if (inst.layout.inexact) {
    for (int i = 0; i < N; ++i) {
      LinearConstraint c;
      c.fcoef = VectorXd::Zero(N + 1);
      c.gvec = conic::svec(inexactness_constraint(inst.layout, i, fclass.epsilon));
      c.rhs = 0.0;
      c.tag = {ConstraintTag::Kind::inexactness, i, 0};
      inst.constraints.push_back(std::move(c));
    }
  }
  {
    LinearConstraint c;
    c.fcoef = VectorXd::Zero(N + 1);
    c.gvec = VectorXd::Zero(svlen);
    c.rhs = 1.0;  // normalized radius
    if (init.kind == InitKind::distance_to_opt) {
      VectorXd e = VectorXd::Zero(m);
      e[inst.layout.xcol()] = 1.0;
      c.gvec = conic::svec(MatrixXd(e * e.transpose()));
    } else {
      c.fcoef[0] = 1.0;  // f_0 - f_* <= R
    }
    c.tag = {ConstraintTag::Kind::initial, 0, 0};
    inst.constraints.push_back(std::move(c));
  }
  if (inst.has_epigraph) {
    for (int k = 1; k <= N; ++k) {
      VectorXd uk = u_of(inst.layout, k);
      LinearConstraint c;
      c.fcoef = VectorXd::Zero(N + 1);
      c.tcoef = 1.0;  // t - |g_k|^2 <= 0
      c.gvec = -conic::svec(MatrixXd(uk * uk.transpose()));
      c.rhs = 0.0;
      c.tag = {ConstraintTag::Kind::epigraph, k, 0};
      inst.constraints.push_back(std::move(c));
    }
  }
  return inst;
}

std::vector<TrajectoryPoint> extract_worst_case(PrimalWitness& witness,
                                                double rank_tol) {
  const GramLayout& layout = witness.layout;
  const int m = layout.m();
  if (witness.G.rows() != m || witness.G.cols() != m)
    throw std::invalid_argument("witness Gram dimension mismatch");
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(sym(witness.G));
  VectorXd ev = es.eigenvalues();
  double top = std::max(0.0, ev.maxCoeff());
  if (ev.minCoeff() < -std::max(rank_tol * std::max(top, 1.0), 1e-12))
    throw std::invalid_argument("witness Gram matrix is indefinite");
  std::vector<int> keep;
  for (int k = 0; k < m; ++k)
    if (ev[k] > rank_tol * top) keep.push_back(k);
  const int d = std::max<int>(1, keep.size());
  // rows of P: one spatial dimension per retained eigenvector
  MatrixXd P = MatrixXd::Zero(d, m);
  for (size_t r = 0; r < keep.size(); ++r)
    P.row(r) = std::sqrt(ev[keep[r]]) * es.eigenvectors().col(keep[r]).transpose();
  witness.trajectory.clear();
  for (int i = 0; i <= layout.N; ++i) {
    TrajectoryPoint pt;
    pt.x = P * h_vector(witness.schedule, layout, i);
    pt.g = P * u_of(layout, i);
    pt.f = witness.F[i];
    witness.trajectory.push_back(std::move(pt));
  }
  return witness.trajectory;
}

}  // namespace pepforge::core
