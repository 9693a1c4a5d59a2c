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
#include <stdexcept>

#include "pepforge/bridge.hpp"

namespace pepforge::bridge {

using core::ConstraintTag;
using core::PepInstance;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

// Variable order of the encoded dual: initial row first, then the remaining
// constraints in instance order. Returns variable index per constraint.
std::vector<int> variable_order(const PepInstance& inst) {
  std::vector<int> var(inst.constraints.size());
  int next = 1;
  for (size_t v = 0; v < inst.constraints.size(); ++v) {
    if (inst.constraints[v].tag.kind == ConstraintTag::Kind::initial)
      var[v] = 0;
    else
      var[v] = next++;
  }
  if (next != static_cast<int>(inst.constraints.size()))
    throw std::invalid_argument("instance must have exactly one initial row");
  return var;
}

}  // namespace

conic::ConeProgram encode_dual(const PepInstance& inst) {
  const int nf = inst.num_fvals();
  const int svlen = conic::svec_len(inst.layout.m());
  const int zero_len = nf + (inst.has_epigraph ? 1 : 0);
  const int nvar = static_cast<int>(inst.constraints.size());
  std::vector<int> var = variable_order(inst);

  conic::ConeProgram prog;
  prog.nvar = nvar;
  const int nn0 = zero_len;          // nonneg rows, one per variable
  const int psd0 = zero_len + nvar;  // psd block
  prog.cones = {{conic::ConeKind::zero, 0, zero_len},
                {conic::ConeKind::nonneg, nn0, nvar},
                {conic::ConeKind::psd, psd0, svlen}};

  for (size_t ci = 0; ci < inst.constraints.size(); ++ci) {
    const auto& c = inst.constraints[ci];
    const int v = var[ci];
    if (c.rhs != 0.0) prog.objective.emplace_back(v, c.rhs);
    for (int r = 0; r < nf; ++r)
      if (c.fcoef[r] != 0.0) prog.rows.push_back({r, v, c.fcoef[r]});
    if (inst.has_epigraph && c.tcoef != 0.0)
      prog.rows.push_back({nf, v, c.tcoef});
    prog.rows.push_back({nn0 + v, v, -1.0});
    for (int q = 0; q < svlen; ++q)
      if (c.gvec[q] != 0.0) prog.rows.push_back({psd0 + q, v, -c.gvec[q]});
  }
  for (int r = 0; r < nf; ++r)
    if (inst.b[r] != 0.0) prog.rhs.emplace_back(r, inst.b[r]);
  if (inst.has_epigraph && inst.tobj != 0.0) prog.rhs.emplace_back(nf, inst.tobj);
  for (int q = 0; q < svlen; ++q)
    if (inst.cvec[q] != 0.0) prog.rhs.emplace_back(psd0 + q, -inst.cvec[q]);
  return prog;
}

PepInstance decode_dual(const conic::ConeProgram& prog) {
  // locate the three blocks
  int zero_len = -1, nn_start = -1, nn_len = -1, psd_start = -1, psd_len = -1;
  for (const auto& c : prog.cones) {
    switch (c.kind) {
      case conic::ConeKind::zero: zero_len = c.len; break;
      case conic::ConeKind::nonneg: nn_start = c.start, nn_len = c.len; break;
      case conic::ConeKind::psd: psd_start = c.start, psd_len = c.len; break;
      default: throw std::invalid_argument("unexpected cone kind in encoded dual");
    }
  }
  if (zero_len < 0 || nn_len != prog.nvar || psd_len < 0)
    throw std::invalid_argument("program is not an encoded dual");
  const int m = conic::svec_side(psd_len);

  // recover (N, oracle, epigraph) from the block shapes
  int N = -1;
  bool inexact = false, epigraph = false;
  for (bool inx : {false, true}) {
    int cand = inx ? (m - 2) / 2 : m - 2;
    if (cand < 1 || (inx && 2 * cand + 2 != m)) continue;
    int pairs = (cand + 2) * (cand + 1);
    int base = 1 + pairs + (inx ? cand : 0);
    if (zero_len == cand + 1 && prog.nvar == base) {
      N = cand, inexact = inx, epigraph = false;
    } else if (zero_len == cand + 2 && prog.nvar == base + cand) {
      N = cand, inexact = inx, epigraph = true;
    }
  }
  if (N < 0) throw std::invalid_argument("encoded dual has inconsistent shape");

  PepInstance inst;
  inst.layout = {N, inexact};
  inst.has_epigraph = epigraph;
  const int nf = N + 1;

  MatrixXd M = MatrixXd::Zero(prog.row_count(), prog.nvar);
  VectorXd rhs = VectorXd::Zero(prog.row_count());
  for (const auto& e : prog.rows) M(e.row, e.col) += e.val;
  for (const auto& [r, v] : prog.rhs) rhs[r] += v;
  VectorXd obj = VectorXd::Zero(prog.nvar);
  for (const auto& [v, val] : prog.objective) obj[v] += val;

  inst.b = rhs.head(nf);
  inst.tobj = epigraph ? rhs[nf] : 0.0;
  inst.cvec = -rhs.segment(psd_start, psd_len);

  auto take = [&](int v, ConstraintTag tag) {
    core::LinearConstraint c;
    c.fcoef = M.block(0, v, nf, 1);
    c.tcoef = epigraph ? M(nf, v) : 0.0;
    c.gvec = -M.block(psd_start, v, psd_len, 1);
    c.rhs = obj[v];
    c.tag = tag;
    inst.constraints.push_back(std::move(c));
  };
  int v = 1;
  std::vector<int> iset;
  for (int i = 0; i <= N; ++i) iset.push_back(i);
  iset.push_back(core::kStar);
  for (int i : iset)
    for (int j : iset) {
      if (i == j) continue;
      take(v++, {ConstraintTag::Kind::interpolation, i, j});
    }
  if (inexact)
    for (int i = 0; i < N; ++i) take(v++, {ConstraintTag::Kind::inexactness, i, 0});
  take(0, {ConstraintTag::Kind::initial, 0, 0});
  if (epigraph)
    for (int k = 1; k <= N; ++k) take(v++, {ConstraintTag::Kind::epigraph, k, 0});
  return inst;
}

core::DualCertificate decode_certificate(const PepInstance& inst,
                                         const conic::ConicSolution& sol) {
  std::vector<int> var = variable_order(inst);
  core::DualCertificate cert;
  for (size_t ci = 0; ci < inst.constraints.size(); ++ci) {
    const auto& tag = inst.constraints[ci].tag;
    double x = sol.x[var[ci]];
    switch (tag.kind) {
      case ConstraintTag::Kind::initial: cert.tau = x; break;
      case ConstraintTag::Kind::interpolation: cert.lambda[{tag.i, tag.j}] = x; break;
      case ConstraintTag::Kind::inexactness: cert.eta[tag.i] = x; break;
      case ConstraintTag::Kind::epigraph: cert.sigma[tag.i] = x; break;
    }
  }
  const int svlen = conic::svec_len(inst.layout.m());
  const int psd0 = sol.s.size() - svlen;
  cert.slack = conic::smat(sol.s.segment(psd0, svlen));
  cert.bound = inst.value_scale * sol.primal_objective;
  return cert;
}

core::PrimalWitness decode_witness(const PepInstance& inst,
                                   const conic::ConicSolution& sol,
                                   const core::StepSchedule& schedule) {
  core::PrimalWitness w;
  w.schedule = schedule;
  w.layout = inst.layout;
  const int nf = inst.num_fvals();
  const int svlen = conic::svec_len(inst.layout.m());
  const int psd0 = sol.z.size() - svlen;
  w.G = conic::smat(sol.z.segment(psd0, svlen));
  w.F = -sol.z.head(nf);
  w.value = sol.dual_objective;
  return w;
}

VerifyReport verify_certificate(const core::DualCertificate& cert,
                                const core::ProblemSpec& spec, double tol) {
  PepInstance inst =
      core::assemble_primal(spec.schedule, spec.fclass, spec.criterion, spec.init);
  VerifyReport rep;

  auto multiplier = [&](const ConstraintTag& tag) -> double {
    switch (tag.kind) {
      case ConstraintTag::Kind::initial: return cert.tau;
      case ConstraintTag::Kind::interpolation: {
        auto it = cert.lambda.find({tag.i, tag.j});
        return it == cert.lambda.end() ? 0.0 : it->second;
      }
      case ConstraintTag::Kind::inexactness: {
        auto it = cert.eta.find(tag.i);
        return it == cert.eta.end() ? 0.0 : it->second;
      }
      case ConstraintTag::Kind::epigraph: {
        auto it = cert.sigma.find(tag.i);
        return it == cert.sigma.end() ? 0.0 : it->second;
      }
    }
    return 0.0;
  };

  MatrixXd S = -conic::smat(inst.cvec);
  VectorXd station = -inst.b;
  double simplex = -inst.tobj;
  double worst_sign = 0.0;
  for (const auto& c : inst.constraints) {
    double x = multiplier(c.tag);
    worst_sign = std::min(worst_sign, x);
    S += x * conic::smat(c.gvec);
    station += x * c.fcoef;
    simplex += x * c.tcoef;
  }
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(0.5 * (S + S.transpose()),
                                             Eigen::EigenvaluesOnly);
  rep.min_eigenvalue = es.eigenvalues().minCoeff();
  rep.stationarity_residual = station.lpNorm<Eigen::Infinity>();
  rep.sign_violation = worst_sign;
  rep.simplex_residual = inst.has_epigraph ? std::abs(simplex) : 0.0;
  rep.pass = rep.min_eigenvalue >= -tol && rep.stationarity_residual <= tol &&
             rep.sign_violation >= -tol && rep.simplex_residual <= tol;
  return rep;
}

}  // namespace pepforge::bridge

namespace pepforge::core {

conic::ConeProgram assemble_dual(const StepSchedule& schedule,
                                 const FunctionClassSpec& fclass,
                                 const CriterionSpec& criterion,
                                 const InitSpec& init) {
  return bridge::encode_dual(assemble_primal(schedule, fclass, criterion, init));
}

}  // namespace pepforge::core
