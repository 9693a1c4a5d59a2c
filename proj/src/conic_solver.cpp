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

// Dense homogeneous self-dual interior-point method for programs over
// products of zero, nonnegative, second-order and PSD cones, with
// Nesterov-Todd scaling and a Mehrotra predictor-corrector step.
//
// Model:  min c.x  s.t.  A x = b  (zero rows),  G x + s = h,  s in K.
// The embedding tracks (x, y, z, s, tau, kappa); every iteration factors
// the reduced KKT system [G' W^-1 W^-T G, A'; A, 0] once and reuses it for
// all right-hand sides, with one round of iterative refinement against the
// unreduced 3x3 system.

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "pepforge/conic.hpp"

namespace pepforge::conic {

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::optimal: return "optimal";
    case SolveStatus::infeasible: return "infeasible";
    case SolveStatus::unbounded: return "unbounded";
    case SolveStatus::numerical_failure: return "numerical_failure";
  }
  return "unknown";
}

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct BlockLayout {
  int l = 0;                  // total nonneg rows
  std::vector<int> q;         // second-order block dims
  std::vector<int> p;         // psd block sides
  std::vector<int> q_start;   // offsets into the internal cone vector
  std::vector<int> p_start;
  int cdim = 0;
  int degree = 0;
  std::vector<int> eq_rows;    // program rows of the zero blocks, in order
  std::vector<int> cone_rows;  // program row of each internal cone row
};

BlockLayout build_layout(const ConeProgram& prog) {
  BlockLayout lay;
  std::vector<Cone> cones = prog.cones;
  std::sort(cones.begin(), cones.end(),
            [](const Cone& a, const Cone& b) { return a.start < b.start; });
  int expect = 0;
  for (const auto& c : cones) {
    if (c.start != expect || c.len <= 0)
      throw std::invalid_argument("cone spans must partition the rows");
    expect += c.len;
  }
  // nonneg section first, preserving program order within the section
  for (const auto& c : cones) {
    if (c.kind == ConeKind::nonneg) {
      for (int r = c.start; r < c.start + c.len; ++r) lay.cone_rows.push_back(r);
      lay.l += c.len;
    }
  }
  for (const auto& c : cones) {
    switch (c.kind) {
      case ConeKind::zero:
        for (int r = c.start; r < c.start + c.len; ++r) lay.eq_rows.push_back(r);
        break;
      case ConeKind::nonneg:
        break;
      case ConeKind::second_order:
        lay.q_start.push_back(static_cast<int>(lay.cone_rows.size()));
        lay.q.push_back(c.len);
        for (int r = c.start; r < c.start + c.len; ++r) lay.cone_rows.push_back(r);
        break;
      case ConeKind::psd: {
        int side = svec_side(c.len);
        if (side < 0) throw std::invalid_argument("psd cone length not triangular");
        lay.p_start.push_back(static_cast<int>(lay.cone_rows.size()));
        lay.p.push_back(side);
        for (int r = c.start; r < c.start + c.len; ++r) lay.cone_rows.push_back(r);
        break;
      }
    }
  }
  lay.cdim = static_cast<int>(lay.cone_rows.size());
  lay.degree = lay.l + static_cast<int>(lay.q.size());
  for (int side : lay.p) lay.degree += side;
  return lay;
}

// J-reflection (u0, -u_bar) of a second-order block.
VectorXd jref(const VectorXd& u) {
  VectorXd r = -u;
  r[0] = u[0];
  return r;
}

struct Scaling {
  bool identity = true;
  VectorXd w;  // nonneg
  struct Soc {
    double beta = 1.0;
    VectorXd v;
  };
  std::vector<Soc> soc;
  std::vector<MatrixXd> r, rti;
  VectorXd lambda;
};

enum class WOp { W, WT, Winv, WinvT };

class ConeOps {
 public:
  explicit ConeOps(const BlockLayout& lay) : lay_(lay) {}

  VectorXd e() const {
    VectorXd v = VectorXd::Zero(lay_.cdim);
    v.head(lay_.l).setOnes();
    for (size_t k = 0; k < lay_.q.size(); ++k) v[lay_.q_start[k]] = 1.0;
    for (size_t k = 0; k < lay_.p.size(); ++k) {
      int n = lay_.p[k], off = lay_.p_start[k];
      for (int j = 0; j < n; ++j) v[off + svec_index(n, j, j)] = 1.0;
    }
    return v;
  }

  double min_eig(const VectorXd& u) const {
    double me = std::numeric_limits<double>::infinity();
    if (lay_.l > 0) me = std::min(me, u.head(lay_.l).minCoeff());
    for (size_t k = 0; k < lay_.q.size(); ++k) {
      auto blk = u.segment(lay_.q_start[k], lay_.q[k]);
      me = std::min(me, blk[0] - blk.tail(lay_.q[k] - 1).norm());
    }
    for (size_t k = 0; k < lay_.p.size(); ++k) {
      MatrixXd U = smat(u.segment(lay_.p_start[k], svec_len(lay_.p[k])));
      Eigen::SelfAdjointEigenSolver<MatrixXd> es(U, Eigen::EigenvaluesOnly);
      me = std::min(me, es.eigenvalues().minCoeff());
    }
    return me;
  }

  // Largest step bound: lambda + t*u stays in the cone for t <= 1/result
  // (result 0 means unbounded). lambda must be interior; psd lambda diagonal.
  double max_coeff(const VectorXd& lambda, const VectorXd& u) const {
    double m = 0.0;
    for (int i = 0; i < lay_.l; ++i) m = std::max(m, -u[i] / lambda[i]);
    for (size_t k = 0; k < lay_.q.size(); ++k) {
      auto lb = lambda.segment(lay_.q_start[k], lay_.q[k]);
      auto ub = u.segment(lay_.q_start[k], lay_.q[k]);
      int n = lay_.q[k];
      double a = ub[0] * ub[0] - ub.tail(n - 1).squaredNorm();
      double b = 2.0 * (lb[0] * ub[0] - lb.tail(n - 1).dot(ub.tail(n - 1)));
      double c = lb[0] * lb[0] - lb.tail(n - 1).squaredNorm();
      // smallest positive root of a t^2 + b t + c = 0, c > 0
      double t = std::numeric_limits<double>::infinity();
      if (std::abs(a) < 1e-300) {
        if (b < 0) t = -c / b;
      } else {
        double disc = b * b - 4 * a * c;
        if (disc >= 0) {
          double sq = std::sqrt(disc);
          double r1 = (-b - sq) / (2 * a), r2 = (-b + sq) / (2 * a);
          if (r1 > r2) std::swap(r1, r2);
          if (r1 > 0)
            t = r1;
          else if (r2 > 0 && a < 0)
            t = r2;
        }
      }
      if (std::isfinite(t) && t > 0) m = std::max(m, 1.0 / t);
    }
    for (size_t k = 0; k < lay_.p.size(); ++k) {
      int n = lay_.p[k], off = lay_.p_start[k];
      VectorXd d(n);
      for (int j = 0; j < n; ++j) d[j] = 1.0 / std::sqrt(lambda[off + svec_index(n, j, j)]);
      MatrixXd U = smat(u.segment(off, svec_len(n)));
      MatrixXd M = d.asDiagonal() * U * d.asDiagonal();
      Eigen::SelfAdjointEigenSolver<MatrixXd> es(M, Eigen::EigenvaluesOnly);
      m = std::max(m, -es.eigenvalues().minCoeff());
    }
    return std::max(m, 0.0);
  }

  // Jordan product u o v.
  VectorXd jmul(const VectorXd& u, const VectorXd& v) const {
    VectorXd r(lay_.cdim);
    r.head(lay_.l) = u.head(lay_.l).cwiseProduct(v.head(lay_.l));
    for (size_t k = 0; k < lay_.q.size(); ++k) {
      int n = lay_.q[k], off = lay_.q_start[k];
      auto ub = u.segment(off, n);
      auto vb = v.segment(off, n);
      r[off] = ub.dot(vb);
      r.segment(off + 1, n - 1) = ub[0] * vb.tail(n - 1) + vb[0] * ub.tail(n - 1);
    }
    for (size_t k = 0; k < lay_.p.size(); ++k) {
      int n = lay_.p[k], off = lay_.p_start[k];
      MatrixXd U = smat(u.segment(off, svec_len(n)));
      MatrixXd V = smat(v.segment(off, svec_len(n)));
      MatrixXd P = 0.5 * (U * V + V * U);
      r.segment(off, svec_len(n)) = svec(P);
    }
    return r;
  }

  // Solve lambda o x = b with lambda the (diagonal) scaled point.
  VectorXd jdiv(const VectorXd& lambda, const VectorXd& b) const {
    VectorXd r(lay_.cdim);
    r.head(lay_.l) = b.head(lay_.l).cwiseQuotient(lambda.head(lay_.l));
    for (size_t k = 0; k < lay_.q.size(); ++k) {
      int n = lay_.q[k], off = lay_.q_start[k];
      auto lb = lambda.segment(off, n);
      auto bb = b.segment(off, n);
      double aa = lb[0] * lb[0] - lb.tail(n - 1).squaredNorm();
      double x0 = (lb[0] * bb[0] - lb.tail(n - 1).dot(bb.tail(n - 1))) / aa;
      r[off] = x0;
      r.segment(off + 1, n - 1) = (bb.tail(n - 1) - x0 * lb.tail(n - 1)) / lb[0];
    }
    for (size_t k = 0; k < lay_.p.size(); ++k) {
      int n = lay_.p[k], off = lay_.p_start[k];
      VectorXd d(n);
      for (int j = 0; j < n; ++j) d[j] = lambda[off + svec_index(n, j, j)];
      int idx = off;
      for (int j = 0; j < n; ++j) {
        for (int i = j; i < n; ++i) r[idx] = b[idx] * (2.0 / (d[i] + d[j])), ++idx;
      }
    }
    return r;
  }

  VectorXd apply(const Scaling& W, const VectorXd& u, WOp op) const {
    if (W.identity) return u;
    VectorXd r(lay_.cdim);
    if (op == WOp::W || op == WOp::WT)
      r.head(lay_.l) = u.head(lay_.l).cwiseProduct(W.w);
    else
      r.head(lay_.l) = u.head(lay_.l).cwiseQuotient(W.w);
    for (size_t k = 0; k < lay_.q.size(); ++k) {
      int n = lay_.q[k], off = lay_.q_start[k];
      const auto& sc = W.soc[k];
      VectorXd ub = u.segment(off, n);
      if (op == WOp::W || op == WOp::WT) {
        r.segment(off, n) = sc.beta * (2.0 * sc.v * sc.v.dot(ub) - jref(ub));
      } else {
        VectorXd jv = jref(sc.v);
        r.segment(off, n) = (2.0 * jv * jv.dot(ub) - jref(ub)) / sc.beta;
      }
    }
    for (size_t k = 0; k < lay_.p.size(); ++k) {
      int n = lay_.p[k], off = lay_.p_start[k];
      MatrixXd U = smat(u.segment(off, svec_len(n)));
      const MatrixXd& rr = W.r[k];
      const MatrixXd& ri = W.rti[k];
      MatrixXd M;
      switch (op) {
        case WOp::W: M = rr.transpose() * U * rr; break;
        case WOp::WT: M = rr * U * rr.transpose(); break;
        case WOp::Winv: M = ri * U * ri.transpose(); break;
        case WOp::WinvT: M = ri.transpose() * U * ri; break;
      }
      r.segment(off, svec_len(n)) = svec(M);
    }
    return r;
  }

  bool compute_scaling(const VectorXd& s, const VectorXd& z, Scaling* W) const {
    W->identity = false;
    W->lambda.resize(lay_.cdim);
    W->w.resize(lay_.l);
    for (int i = 0; i < lay_.l; ++i) {
      if (s[i] <= 0 || z[i] <= 0) return false;
      W->w[i] = std::sqrt(s[i] / z[i]);
      W->lambda[i] = std::sqrt(s[i] * z[i]);
    }
    W->soc.clear();
    for (size_t k = 0; k < lay_.q.size(); ++k) {
      int n = lay_.q[k], off = lay_.q_start[k];
      VectorXd sb = s.segment(off, n), zb = z.segment(off, n);
      double a2 = sb[0] * sb[0] - sb.tail(n - 1).squaredNorm();
      double b2 = zb[0] * zb[0] - zb.tail(n - 1).squaredNorm();
      if (a2 <= 0 || b2 <= 0) return false;
      double a = std::sqrt(a2), b = std::sqrt(b2);
      VectorXd st = sb / a, zt = zb / b;
      double c = std::sqrt((1.0 + st.dot(zt)) / 2.0);
      if (!(c > 0)) return false;
      VectorXd vbar = (st + jref(zt)) / (2.0 * c);
      Scaling::Soc sc;
      sc.beta = std::sqrt(a / b);
      VectorXd v = vbar;
      v[0] += 1.0;
      sc.v = v / std::sqrt(2.0 * (vbar[0] + 1.0));
      W->soc.push_back(sc);
      // scaled point
      double d = 2.0 * c + st[0] + zt[0];
      VectorXd lb(n);
      lb[0] = c;
      lb.tail(n - 1) =
          ((c + zt[0]) / d) * st.tail(n - 1) + ((c + st[0]) / d) * zt.tail(n - 1);
      W->lambda.segment(off, n) = std::sqrt(a * b) * lb;
    }
    W->r.clear();
    W->rti.clear();
    for (size_t k = 0; k < lay_.p.size(); ++k) {
      int n = lay_.p[k], off = lay_.p_start[k];
      MatrixXd S = smat(s.segment(off, svec_len(n)));
      MatrixXd Z = smat(z.segment(off, svec_len(n)));
      Eigen::LLT<MatrixXd> ls(S), lz(Z);
      if (ls.info() != Eigen::Success || lz.info() != Eigen::Success) return false;
      MatrixXd Ls = ls.matrixL(), Lz = lz.matrixL();
      Eigen::JacobiSVD<MatrixXd> svd(Lz.transpose() * Ls,
                                     Eigen::ComputeFullU | Eigen::ComputeFullV);
      VectorXd lam = svd.singularValues();
      if (lam.minCoeff() <= 0) return false;
      VectorXd lam_sqrt = lam.cwiseSqrt();
      // r'Zr = L^-1 S r^-T... both scale to diag(lam); see NT scaling for psd
      MatrixXd r = Lz.transpose().triangularView<Eigen::Upper>().solve(
          MatrixXd(svd.matrixU() * lam_sqrt.asDiagonal()));
      MatrixXd rti = Lz * svd.matrixU() * lam_sqrt.cwiseInverse().asDiagonal();
      W->r.push_back(r);
      W->rti.push_back(rti);
      VectorXd lamv = VectorXd::Zero(svec_len(n));
      for (int j = 0; j < n; ++j) lamv[svec_index(n, j, j)] = lam[j];
      W->lambda.segment(off, svec_len(n)) = lamv;
    }
    return true;
  }

 private:
  const BlockLayout& lay_;
};

class KKT {
 public:
  KKT(const MatrixXd& A, const MatrixXd& G, const ConeOps& ops, double reg)
      : A_(A), G_(G), ops_(ops), reg_(reg) {}

  bool factor(const Scaling& W) {
    W_ = &W;
    const int n = static_cast<int>(G_.cols());
    const int neq = static_cast<int>(A_.rows());
    Ghat_.resize(G_.rows(), n);
    for (int j = 0; j < n; ++j) Ghat_.col(j) = ops_.apply(W, G_.col(j), WOp::WinvT);
    MatrixXd red = MatrixXd::Zero(n + neq, n + neq);
    red.topLeftCorner(n, n).selfadjointView<Eigen::Lower>().rankUpdate(
        Ghat_.transpose());
    red.topLeftCorner(n, n) =
        MatrixXd(red.topLeftCorner(n, n).selfadjointView<Eigen::Lower>());
    red.topLeftCorner(n, n).diagonal().array() += reg_;
    if (neq > 0) {
      red.topRightCorner(n, neq) = A_.transpose();
      red.bottomLeftCorner(neq, n) = A_;
      red.bottomRightCorner(neq, neq).diagonal().array() -= reg_;
    }
    lu_.compute(red);
    double rcond = lu_.rcond();
    return std::isfinite(rcond) && rcond > 1e-100;
  }

  // Solve the 3x3 system for (x, y, z) given (bx, by, bz), with `refine`
  // rounds of iterative refinement against the unreduced system.
  void solve3(const VectorXd& bx, const VectorXd& by, const VectorXd& bz,
              VectorXd* x, VectorXd* y, VectorXd* z, int refine = 1) const {
    solve_raw(bx, by, bz, x, y, z);
    for (int it = 0; it < refine; ++it) {
      VectorXd rx = bx - (A_.transpose() * *y + G_.transpose() * *z);
      VectorXd ry = by - A_ * *x;
      VectorXd wz = ops_.apply(*W_, ops_.apply(*W_, *z, WOp::W), WOp::WT);
      VectorXd rz = bz - (G_ * *x - wz);
      VectorXd dx, dy, dz;
      solve_raw(rx, ry, rz, &dx, &dy, &dz);
      *x += dx;
      *y += dy;
      *z += dz;
    }
  }

 private:
  void solve_raw(const VectorXd& bx, const VectorXd& by, const VectorXd& bz,
                 VectorXd* x, VectorXd* y, VectorXd* z) const {
    const int n = static_cast<int>(G_.cols());
    const int neq = static_cast<int>(A_.rows());
    VectorXd bzt = ops_.apply(*W_, bz, WOp::WinvT);
    VectorXd rhs(n + neq);
    rhs.head(n) = bx + Ghat_.transpose() * bzt;
    rhs.tail(neq) = by;
    VectorXd sol = lu_.solve(rhs);
    *x = sol.head(n);
    *y = sol.tail(neq);
    *z = ops_.apply(*W_, Ghat_ * *x - bzt, WOp::Winv);
  }

  const MatrixXd& A_;
  const MatrixXd& G_;
  const ConeOps& ops_;
  double reg_;
  const Scaling* W_ = nullptr;
  MatrixXd Ghat_;
  Eigen::PartialPivLU<MatrixXd> lu_;
};

struct ProblemData {
  VectorXd c, b, h;
  MatrixXd A, G;
  BlockLayout lay;
};

ProblemData split(const ConeProgram& prog) {
  ProblemData pd;
  pd.lay = build_layout(prog);
  const int nrow = prog.row_count();
  pd.c = VectorXd::Zero(prog.nvar);
  for (const auto& [idx, val] : prog.objective) {
    if (idx < 0 || idx >= prog.nvar) throw std::invalid_argument("objective index");
    pd.c[idx] += val;
  }
  VectorXd rhs = VectorXd::Zero(nrow);
  for (const auto& [idx, val] : prog.rhs) {
    if (idx < 0 || idx >= nrow) throw std::invalid_argument("rhs index");
    rhs[idx] += val;
  }
  MatrixXd M = MatrixXd::Zero(nrow, prog.nvar);
  for (const auto& e : prog.rows) {
    if (e.row < 0 || e.row >= nrow || e.col < 0 || e.col >= prog.nvar)
      throw std::invalid_argument("row entry index");
    M(e.row, e.col) += e.val;
  }
  const int neq = static_cast<int>(pd.lay.eq_rows.size());
  pd.A.resize(neq, prog.nvar);
  pd.b.resize(neq);
  for (int i = 0; i < neq; ++i) {
    pd.A.row(i) = M.row(pd.lay.eq_rows[i]);
    pd.b[i] = rhs[pd.lay.eq_rows[i]];
  }
  pd.G.resize(pd.lay.cdim, prog.nvar);
  pd.h.resize(pd.lay.cdim);
  for (int i = 0; i < pd.lay.cdim; ++i) {
    pd.G.row(i) = M.row(pd.lay.cone_rows[i]);
    pd.h[i] = rhs[pd.lay.cone_rows[i]];
  }
  return pd;
}

}  // namespace

ConicSolution solve(const ConeProgram& prog, const SolverOptions& opts) {
  if (prog.nvar <= 0) throw std::invalid_argument("program has no variables");
  ProblemData pd = split(prog);
  const BlockLayout& lay = pd.lay;
  if (lay.cdim == 0) throw std::invalid_argument("program needs at least one cone row");
  ConeOps ops(lay);
  const int n = prog.nvar;
  const int neq = static_cast<int>(lay.eq_rows.size());
  const int nrow = prog.row_count();

  const double tol = opts.tol;
  const double resx0 = std::max(1.0, pd.c.norm());
  const double resy0 = std::max(1.0, pd.b.norm());
  const double resz0 = std::max(1.0, pd.h.norm());

  ConicSolution out;
  out.x = VectorXd::Zero(n);
  out.s = VectorXd::Zero(nrow);
  out.z = VectorXd::Zero(nrow);

  auto pack = [&](const VectorXd& x, const VectorXd& s, const VectorXd& z,
                  const VectorXd& y) {
    out.x = x;
    out.s.setZero();
    out.z.setZero();
    for (int i = 0; i < neq; ++i) out.z[lay.eq_rows[i]] = y[i];
    for (int i = 0; i < lay.cdim; ++i) {
      out.s[lay.cone_rows[i]] = s[i];
      out.z[lay.cone_rows[i]] = z[i];
    }
  };

  double reg = opts.diag_regularization;
  KKT kkt(pd.A, pd.G, ops, reg);
  const int refine = reg > 0 ? 2 : 1;

  // Initial point from two least-squares-type solves at W = I.
  Scaling Wid;
  Wid.identity = true;
  Scaling Wnt;
  if (!kkt.factor(Wid)) {
    out.status = SolveStatus::numerical_failure;
    return out;
  }
  VectorXd x, y0, z0, s, xd, y, z;
  kkt.solve3(VectorXd::Zero(n), pd.b, pd.h, &x, &y0, &z0, refine);
  s = -z0;
  double me = ops.min_eig(s);
  if (me < 1e-8 * std::max(1.0, s.norm())) s += (1.0 - me) * ops.e();
  kkt.solve3(-pd.c, VectorXd::Zero(neq), VectorXd::Zero(lay.cdim), &xd, &y, &z,
             refine);
  me = ops.min_eig(z);
  if (me < 1e-8 * std::max(1.0, z.norm())) z += (1.0 - me) * ops.e();
  double tau = 1.0, kappa = 1.0;

  const double STEP = 0.99;
  VectorXd dsa_sc, dza_sc;  // affine scaled directions for the corrector
  double dtau_a = 0.0, dkappa_a = 0.0;

  for (int iter = 0; iter <= opts.max_iterations; ++iter) {
    VectorXd rx = pd.A.transpose() * y + pd.G.transpose() * z + pd.c * tau;
    VectorXd ry = pd.A * x - pd.b * tau;
    VectorXd rz = pd.G * x + s - pd.h * tau;
    double rt = pd.c.dot(x) + pd.b.dot(y) + pd.h.dot(z) + kappa;

    double gap = s.dot(z) / (tau * tau);
    double pcost = pd.c.dot(x) / tau;
    double dcost = -(pd.b.dot(y) + pd.h.dot(z)) / tau;
    double pres = std::max(ry.norm() / resy0, rz.norm() / resz0) / tau;
    double dres = rx.norm() / resx0 / tau;
    double relgap = std::numeric_limits<double>::infinity();
    if (pcost < 0)
      relgap = gap / -pcost;
    else if (dcost > 0)
      relgap = gap / dcost;

    if (pres <= tol && dres <= tol && (gap <= tol || relgap <= tol)) {
      pack(x / tau, s / tau, z / tau, y / tau);
      out.status = SolveStatus::optimal;
      out.primal_objective = pcost;
      out.dual_objective = dcost;
      out.gap = gap;
      out.iterations = iter;
      return out;
    }
    // certificate residual excludes the c*tau term of rx
    double hz_by = pd.h.dot(z) + pd.b.dot(y);
    double hrx = (pd.A.transpose() * y + pd.G.transpose() * z).norm();
    if (hz_by < 0 && hrx / resx0 <= tol * (-hz_by)) {
      pack(VectorXd::Zero(n), VectorXd::Zero(lay.cdim), z / (-hz_by), y / (-hz_by));
      out.status = SolveStatus::infeasible;
      out.iterations = iter;
      return out;
    }
    double cx = pd.c.dot(x);
    if (cx < 0 &&
        std::max((pd.A * x).norm() / resy0, (pd.G * x + s).norm() / resz0) <=
            tol * (-cx)) {
      pack(x / (-cx), s / (-cx), VectorXd::Zero(lay.cdim), VectorXd::Zero(neq));
      out.status = SolveStatus::unbounded;
      out.iterations = iter;
      return out;
    }
    if (iter == opts.max_iterations) break;

    if (!ops.compute_scaling(s, z, &Wnt) || !kkt.factor(Wnt)) break;
    const VectorXd& lambda = Wnt.lambda;
    double mu = (lambda.squaredNorm() + tau * kappa) / (lay.degree + 1);

    VectorXd x1, y1, z1;
    kkt.solve3(-pd.c, pd.b, pd.h, &x1, &y1, &z1, refine);
    double dgi = pd.c.dot(x1) + pd.b.dot(y1) + pd.h.dot(z1) - kappa / tau;

    double sigma = 0.0;
    VectorXd dx, dy, dz, ds;
    double dtau = 0.0, dkappa = 0.0, step = 0.0;
    bool ok = true;
    for (int pass = 0; pass < 2; ++pass) {
      double eta = pass == 0 ? 0.0 : sigma;
      VectorXd bs = -ops.jmul(lambda, lambda);
      double bk = -tau * kappa;
      if (pass == 1) {
        bs -= ops.jmul(dsa_sc, dza_sc);
        bs += sigma * mu * ops.e();
        bk += -dtau_a * dkappa_a + sigma * mu;
      }
      VectorXd lbs = ops.jdiv(lambda, bs);
      VectorXd x2, y2, z2;
      kkt.solve3(-(1 - eta) * rx, -(1 - eta) * ry,
                 -(1 - eta) * rz - ops.apply(Wnt, lbs, WOp::WT), &x2, &y2, &z2,
                 refine);
      double num = -(1 - eta) * rt - bk / tau - pd.c.dot(x2) - pd.b.dot(y2) -
                   pd.h.dot(z2);
      if (std::abs(dgi) < 1e-300) {
        ok = false;
        break;
      }
      dtau = num / dgi;
      dx = x2 + dtau * x1;
      dy = y2 + dtau * y1;
      dz = z2 + dtau * z1;
      dkappa = (bk - kappa * dtau) / tau;
      VectorXd wdz = ops.apply(Wnt, dz, WOp::W);
      VectorXd wds = lbs - wdz;  // W^-T ds in scaled space
      ds = ops.apply(Wnt, wds, WOp::WT);
      double m = std::max(ops.max_coeff(lambda, wds), ops.max_coeff(lambda, wdz));
      if (dtau < 0) m = std::max(m, -dtau / tau);
      if (dkappa < 0) m = std::max(m, -dkappa / kappa);
      if (pass == 0) {
        double stepa = m == 0.0 ? 1.0 : std::min(1.0, 1.0 / m);
        sigma = std::pow(1.0 - stepa, 3.0);
        dsa_sc = wds;
        dza_sc = wdz;
        dtau_a = dtau;
        dkappa_a = dkappa;
      } else {
        step = m == 0.0 ? 1.0 : std::min(1.0, STEP / m);
      }
      if (!dx.allFinite() || !std::isfinite(dtau) || !std::isfinite(dkappa) ||
          !ds.allFinite() || !dz.allFinite()) {
        ok = false;
        break;
      }
    }
    if (!ok) break;
    x += step * dx;
    y += step * dy;
    z += step * dz;
    s += step * ds;
    tau += step * dtau;
    kappa += step * dkappa;
    if (tau <= 0 || kappa <= 0 || step < 1e-13) break;
  }

  pack(x / tau, s / tau, z / tau, y / tau);
  out.status = SolveStatus::numerical_failure;
  return out;
}

namespace detail {
double nt_residual(const ConeProgram& prog, const Eigen::VectorXd& s,
                   const Eigen::VectorXd& z) {
  BlockLayout lay = build_layout(prog);
  ConeOps ops(lay);
  VectorXd si(lay.cdim), zi(lay.cdim);
  for (int i = 0; i < lay.cdim; ++i) {
    si[i] = s[lay.cone_rows[i]];
    zi[i] = z[lay.cone_rows[i]];
  }
  Scaling W;
  if (!ops.compute_scaling(si, zi, &W)) return std::numeric_limits<double>::infinity();
  double r1 = (ops.apply(W, zi, WOp::W) - W.lambda).norm();
  double r2 = (ops.apply(W, si, WOp::WinvT) - W.lambda).norm();
  return std::max(r1, r2);
}
}  // namespace detail

}  // namespace pepforge::conic
