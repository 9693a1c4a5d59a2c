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

// Release gate: one line per criterion with measured versus required values.
// Usage: acceptance [all | <id>...] where <id> is 1..10. Criterion 9 audits
// every certificate produced by criteria 1-6, regenerating them if those
// criteria were not selected in the same run.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstring>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "pepforge/analysis.hpp"
#include "pepforge/bridge.hpp"
#include "pepforge/designers.hpp"
#include "pepforge/schedules.hpp"

namespace {

using namespace pepforge;

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct CertRecord {
  std::string label;
  core::ProblemSpec spec;
  core::DualCertificate cert;
};

std::vector<CertRecord> g_certs;
bool g_collected[7] = {false};  // criteria 1..6 whose certificates are banked

void bank(const std::string& label, const core::ProblemSpec& spec,
          const core::DualCertificate& cert) {
  g_certs.push_back({label, spec, cert});
}

std::string fmt(const char* pattern, ...) {
  char buf[512];
  va_list args;
  va_start(args, pattern);
  std::vsnprintf(buf, sizeof(buf), pattern, args);
  va_end(args);
  return buf;
}

core::ProblemSpec gap_spec(const std::vector<double>& steps) {
  core::ProblemSpec spec;
  spec.schedule = core::StepSchedule::memoryless_steps(steps);
  spec.criterion.kind = core::CriterionKind::final_objective_gap;
  spec.init.kind = core::InitKind::distance_to_opt;
  return spec;
}

// Independent lower-bound oracle for unit-step descent: simulate the method
// on the one-parameter family of Huber-shaped functions (quadratic core of
// half-width c, linear tails, L = 1) from x0 = 1 and maximize the final gap
// over c by golden-section search. The family attains the worst case.
double huber_final_gap(double c, int N) {
  double x = 1.0;
  for (int k = 0; k < N; ++k) x -= std::clamp(x, -c, c);
  double ax = std::abs(x);
  return ax <= c ? 0.5 * x * x : c * ax - 0.5 * c * c;
}

double huber_oracle(int N) {
  // The gap-versus-c curve has a flat zero plateau once an iterate lands in
  // the quadratic core (the next unit step is then exact), so a bare
  // golden-section search can collapse onto the plateau. Grid-scan first,
  // then refine inside the winning cell where the curve is unimodal.
  const int cells = 2000;
  int best = 1;
  double best_gap = -1.0;
  for (int i = 1; i < cells; ++i) {
    double gap = huber_final_gap(static_cast<double>(i) / cells, N);
    if (gap > best_gap) {
      best_gap = gap;
      best = i;
    }
  }
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = static_cast<double>(best - 1) / cells;
  double b = static_cast<double>(best + 1) / cells;
  double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
  double f1 = huber_final_gap(x1, N), f2 = huber_final_gap(x2, N);
  for (int it = 0; it < 200; ++it) {
    if (f1 > f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - phi * (b - a);
      f1 = huber_final_gap(x1, N);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + phi * (b - a);
      f2 = huber_final_gap(x2, N);
    }
  }
  return huber_final_gap(0.5 * (a + b), N);
}

Outcome criterion1() {
  double worst_dev = 0.0, worst_oracle_gap = 0.0;
  for (int N = 1; N <= 3; ++N) {
    core::ProblemSpec spec = gap_spec(std::vector<double>(N, 1.0));
    designers::WorstCase solved = designers::worst_case(spec);
    bank("baseline N=" + std::to_string(N), spec, solved.cert);
    worst_dev = std::max(worst_dev, std::abs(solved.w - 1.0 / (4.0 * N + 2.0)));
    worst_oracle_gap =
        std::max(worst_oracle_gap, std::abs(solved.w - huber_oracle(N)));
  }
  g_collected[1] = true;
  Outcome out;
  out.pass = worst_dev <= 1e-5 && worst_oracle_gap <= 1e-5;
  out.detail = fmt(
      "max |w - 1/(4N+2)| = %.2e (required <= 1e-05), "
      "simulation-oracle gap %.2e (required <= 1e-05), N = 1..3",
      worst_dev, worst_oracle_gap);
  return out;
}

designers::DesignConfig slm_config(int T) {
  designers::DesignConfig config;
  config.method = designers::DesignMethod::slm;
  config.T_max = T;
  return config;
}

Outcome criterion2() {
  designers::DesignReport report =
      designers::run_slm(slm_config(200), gap_spec({1.0}));
  core::ProblemSpec designed = gap_spec({1.0});
  designed.schedule = report.final_schedule;
  bank("one-step design", designed, report.final_certificate);
  g_collected[2] = true;
  double step = designers::free_parameters(report.final_schedule)[0];
  Outcome out;
  out.pass = std::abs(step - 1.5) <= 0.01 && std::abs(report.final_w - 0.125) <= 1e-3;
  out.detail = fmt(
      "step %.4f (required 1.500 +/- 0.01), w %.6f (required 0.125 +/- 1e-03)",
      step, report.final_w);
  return out;
}

Outcome criterion3() {
  struct Target {
    int N;
    double cap;
    double ref;
  };
  const Target targets[] = {
      {6, 0.020098, 0.019895}, {8, 0.014055, 0.013962}, {9, 0.012282, 0.012184}};
  Outcome out;
  out.pass = true;
  std::string detail;
  for (const Target& t : targets) {
    core::ProblemSpec spec = gap_spec(std::vector<double>(t.N, 1.0));
    designers::DesignReport report =
        designers::run_design_multistart(slm_config(500), spec, 5);
    core::ProblemSpec designed = spec;
    designed.schedule = report.final_schedule;
    bank("multistart N=" + std::to_string(t.N), designed,
         report.final_certificate);
    bool ok = report.final_w <= t.cap &&
              std::abs(report.final_w - t.ref) <= 0.02 * t.ref;
    out.pass = out.pass && ok;
    if (!detail.empty()) detail += "; ";
    detail += fmt("N=%d w=%.6f (<= %.6f, within 2%% of %.6f)%s", t.N,
                  report.final_w, t.cap, t.ref, ok ? "" : " VIOLATED");
  }
  g_collected[3] = true;
  out.detail = detail + "; 5 starts each";
  return out;
}

Outcome criterion4() {
  const std::vector<std::vector<double>> tables = {
      {1.414, 1.877},
      {1.414, 1.601, 2.189},
      {1.414, 1.601, 1.702, 2.459}};
  Outcome out;
  out.pass = true;
  std::string detail;
  for (const std::vector<double>& table : tables) {
    int N = static_cast<int>(table.size());
    core::ProblemSpec spec = gap_spec(std::vector<double>(N, 1.0));
    designers::DesignReport report =
        designers::run_slm(slm_config(400), spec);
    std::vector<double> steps = designers::free_parameters(report.final_schedule);
    double dev = 0.0;
    for (int i = 0; i < N; ++i) dev = std::max(dev, std::abs(steps[i] - table[i]));
    bool ok = dev <= 0.02;
    double w_table = 0.0;
    if (!ok) {
      // Different local minimum: accept strict value dominance instead.
      w_table = designers::worst_case(gap_spec(table)).w;
      ok = report.final_w < w_table;
    }
    core::ProblemSpec designed = spec;
    designed.schedule = report.final_schedule;
    bank("pattern N=" + std::to_string(N), designed, report.final_certificate);
    out.pass = out.pass && ok;
    if (!detail.empty()) detail += "; ";
    detail += fmt("N=%d max step deviation %.4f (required <= 0.02%s)%s", N, dev,
                  dev <= 0.02 ? "" : fmt(", fallback w %.6f < %.6f",
                                         report.final_w, w_table)
                                         .c_str(),
                  ok ? "" : " VIOLATED");
  }
  g_collected[4] = true;
  out.detail = detail;
  return out;
}

Outcome criterion5() {
  const std::pair<int, double> cases[] = {{5, 0.1}, {5, 0.3}};
  Outcome out;
  out.pass = true;
  std::string detail;
  for (const auto& [N, eps] : cases) {
    core::ProblemSpec spec;
    spec.schedule = core::StepSchedule::memoryless_steps(
        std::vector<double>(N, 1.0));
    spec.fclass.epsilon = eps;
    spec.fclass.oracle = core::OracleKind::relatively_inexact;
    spec.criterion.kind = core::CriterionKind::min_gradient_norm_sq;
    spec.init.kind = core::InitKind::objective_gap;
    designers::WorstCase solved = designers::worst_case(spec);
    bank(fmt("inexact eps=%.1f", eps), spec, solved.cert);
    double target = 1.0 / (0.5 + N * (1.0 - eps));
    bool ok = std::abs(solved.w - target) <= 1e-4;
    out.pass = out.pass && ok;
    if (!detail.empty()) detail += "; ";
    detail += fmt("(N=%d, eps=%.1f) w=%.6f vs 1/(1/2+N(1-eps))=%.6f%s", N, eps,
                  solved.w, target, ok ? "" : " VIOLATED");
  }
  g_collected[5] = true;
  out.detail = detail + " (required within 1e-04)";
  return out;
}

core::ProblemSpec cycle_spec(const std::vector<double>& core_steps,
                             const core::FunctionClassSpec& fclass) {
  core::ProblemSpec spec;
  spec.schedule = core::StepSchedule::memoryless_steps(core_steps);
  spec.fclass = fclass;
  spec.criterion.kind = core::CriterionKind::final_distance_sq;
  spec.init.kind = core::InitKind::distance_to_opt;
  return spec;
}

Outcome criterion6() {
  core::FunctionClassSpec fclass;
  fclass.L = 1.0;
  fclass.mu = 0.1;
  std::vector<double> constant = schedules::constant_core(4, fclass);
  schedules::CyclicRate base = schedules::cyclic_rate(constant, fclass);
  bank("cyclic constant core", cycle_spec(base.core, fclass), base.cert);

  schedules::CyclicRate tuned =
      schedules::optimize_core(4, fclass, slm_config(400));
  bank("cyclic optimized core", cycle_spec(tuned.core, fclass), tuned.cert);
  g_collected[6] = true;

  bool const_ok = std::abs(base.c - 0.2008) <= 1e-3;
  bool tuned_ok = tuned.c <= 0.145;
  Outcome out;
  out.pass = const_ok && tuned_ok;
  out.detail = fmt(
      "constant 2/(L+mu) core c=%.5f (required 0.2008 +/- 1e-03)%s; "
      "optimized core c=%.5f (required <= 0.145)%s",
      base.c, const_ok ? "" : " VIOLATED", tuned.c,
      tuned_ok ? "" : " VIOLATED");
  return out;
}

Outcome criterion7() {
  analysis::LandscapeResult result =
      analysis::landscape(gap_spec({1.0, 1.0}), 40, 2.0, 4);
  int holes = 0;
  for (const analysis::LandscapeCell& cell : result.cells)
    if (!cell.ok) ++holes;
  bool minima_ok = result.minima.size() == 2;
  bool am_ok = !result.am_path.empty() &&
               result.am_path.back().w > result.global_min.w;
  Outcome out;
  out.pass = minima_ok && am_ok;
  out.detail = fmt(
      "grid-local minima %zu (required exactly 2), trajectory end w=%.6f vs "
      "grid min w=%.6f (required strictly above), holes %d",
      result.minima.size(),
      result.am_path.empty() ? 0.0 : result.am_path.back().w,
      result.global_min.w, holes);
  return out;
}

Outcome criterion8() {
  std::mt19937 gen(2024);
  std::uniform_real_distribution<double> draw(0.1, 1.9);
  const double fd_h = 1e-3;
  int matched = 0, kinks = 0, unexplained = 0;
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<double> steps = {draw(gen), draw(gen), draw(gen)};
    core::ProblemSpec spec = gap_spec(steps);
    bool point_ok = true, point_kink = false;
    Eigen::VectorXd grad;
    try {
      grad = designers::dual_gradient(spec, 1e-9);
    } catch (const designers::SolverFailureError&) {
      ++kinks;  // unevaluable point counts against the kink allowance
      continue;
    }
    Eigen::VectorXd fd(3);
    try {
      double w0 = designers::worst_case(spec, 1e-9).w;
      for (int i = 0; i < 3; ++i) {
        std::vector<double> up = steps, down = steps;
        up[i] += fd_h;
        down[i] -= fd_h;
        double wu = designers::worst_case(gap_spec(up), 1e-9).w;
        double wd = designers::worst_case(gap_spec(down), 1e-9).w;
        fd[i] = (wu - wd) / (2.0 * fd_h);
        double fwd = (wu - w0) / fd_h, bwd = (w0 - wd) / fd_h;
        if (std::abs(fwd - bwd) > 1e-3 * (1.0 + std::abs(fwd) + std::abs(bwd)))
          point_kink = true;
      }
    } catch (const designers::SolverFailureError&) {
      ++kinks;
      continue;
    }
    double scale = std::max(1e-6, fd.lpNorm<Eigen::Infinity>());
    double rel = (grad - fd).lpNorm<Eigen::Infinity>() / scale;
    point_ok = rel <= 1e-4;
    if (point_ok)
      ++matched;
    else if (point_kink)
      ++kinks;
    else
      ++unexplained;  // smooth-looking miss: typically a near-degenerate
                      // dual face limiting multiplier accuracy
  }
  Outcome out;
  out.pass = matched >= 18 && (20 - matched) <= 2;
  out.detail = fmt(
      "matched %d/20 (required >= 18, up to 2 misses allowed); misses: "
      "%d one-sided-slope kinks, %d degenerate-smooth",
      matched, kinks, unexplained);
  return out;
}

Outcome criterion9() {
  // Audits certificates banked by criteria 1-6; regenerate any that were not
  // part of this invocation.
  if (!g_collected[1]) criterion1();
  if (!g_collected[2]) criterion2();
  if (!g_collected[3]) criterion3();
  if (!g_collected[4]) criterion4();
  if (!g_collected[5]) criterion5();
  if (!g_collected[6]) criterion6();
  int passed = 0;
  std::string failures;
  for (const CertRecord& record : g_certs) {
    bridge::VerifyReport report =
        bridge::verify_certificate(record.cert, record.spec, 1e-6);
    if (report.pass) {
      ++passed;
    } else {
      if (!failures.empty()) failures += ", ";
      failures += record.label +
                  fmt(" (eig %.1e, station %.1e, sign %.1e)",
                      report.min_eigenvalue, report.stationarity_residual,
                      report.sign_violation);
    }
  }
  Outcome out;
  out.pass = passed == static_cast<int>(g_certs.size()) && !g_certs.empty();
  out.detail = fmt(
      "%d/%zu certificates re-verified independently (slack eig >= -1e-06, "
      "stationarity <= 1e-06, signs nonnegative)",
      passed, g_certs.size());
  if (!failures.empty()) out.detail += "; failing: " + failures;
  return out;
}

double designed_sweep_exponent(schedules::Family family,
                               const std::vector<int>& horizons,
                               core::CriterionKind criterion,
                               core::InitKind init, double epsilon,
                               std::string* note) {
  analysis::SweepRequest req;
  req.family = family;
  req.horizons = horizons;
  req.fclass.L = 1.0;
  req.fclass.epsilon = epsilon;
  req.fclass.oracle = epsilon > 0 ? core::OracleKind::relatively_inexact
                                  : core::OracleKind::exact;
  req.criterion.kind = criterion;
  req.init.kind = init;
  req.init.R = 1.0;
  req.design = true;
  req.designer = slm_config(250);
  req.jobs = 4;
  analysis::SweepResult result = analysis::sweep(req);
  int ok = 0;
  for (const analysis::SweepRow& row : result.rows)
    if (row.ok) ++ok;
  analysis::RateFit fit = analysis::fit_rate(result);
  *note += fmt(" [%d/%zu rows, N %d..%d]", ok, result.rows.size(),
               horizons.front(), horizons.back());
  return fit.nu;
}

Outcome criterion10() {
  std::string note_mgd, note_igd, note_figd;
  double nu_mgd = designed_sweep_exponent(
      schedules::Family::MGD, {5, 7, 9, 11, 13, 15},
      core::CriterionKind::final_objective_gap, core::InitKind::distance_to_opt,
      0.0, &note_mgd);
  double nu_igd = designed_sweep_exponent(
      schedules::Family::IGD, {3, 4, 5, 6, 8, 10},
      core::CriterionKind::min_gradient_norm_sq, core::InitKind::objective_gap,
      0.1, &note_igd);
  double nu_figd = designed_sweep_exponent(
      schedules::Family::FIGD, {3, 4, 5, 6, 8},
      core::CriterionKind::min_gradient_norm_sq, core::InitKind::objective_gap,
      0.1, &note_figd);
  bool mgd_ok = nu_mgd > 1.0, igd_ok = nu_igd > 1.0, order_ok = nu_figd > nu_igd;
  Outcome out;
  out.pass = true;  // soft: values are reported, exponents are not gated
  out.detail = fmt(
      "optimized-MGD nu=%.3f%s (soft > 1: %s); optimized-IGD nu=%.3f%s "
      "(soft > 1: %s); optimized-FIGD nu=%.3f%s (soft > IGD: %s)",
      nu_mgd, note_mgd.c_str(), mgd_ok ? "yes" : "NO", nu_igd,
      note_igd.c_str(), igd_ok ? "yes" : "NO", nu_figd, note_figd.c_str(),
      order_ok ? "yes" : "NO");
  return out;
}

struct Entry {
  const char* id;
  const char* name;
  double budget_s;  // 0 = no budget
  std::function<Outcome()> fn;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Entry> entries = {
      {"1", "constant-step baselines", 5.0, criterion1},
      {"2", "one-step optimal design", 10.0, criterion2},
      {"3", "multistart designed bounds", 600.0, criterion3},
      {"4", "optimized step patterns", 600.0, criterion4},
      {"5", "inexact-oracle tightness", 60.0, criterion5},
      {"6", "cyclic contraction", 300.0, criterion6},
      {"7", "two-step landscape", 600.0, criterion7},
      {"8", "bound gradient vs finite differences", 120.0, criterion8},
      {"9", "certificate soundness", 0.0, criterion9},
      {"10", "acceleration exponents (soft)", 0.0, criterion10},
  };

  std::vector<std::string> selected;
  for (int i = 1; i < argc; ++i) selected.emplace_back(argv[i]);
  if (selected.empty() || (selected.size() == 1 && selected[0] == "all")) {
    selected.clear();
    for (const Entry& e : entries) selected.push_back(e.id);
  }

  int failures = 0;
  for (const std::string& id : selected) {
    const Entry* entry = nullptr;
    for (const Entry& e : entries)
      if (id == e.id || id == std::string("c") + e.id) entry = &e;
    if (!entry) {
      std::fprintf(stderr, "unknown criterion '%s' (use 1..10 or all)\n",
                   id.c_str());
      return 2;
    }
    auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = entry->fn();
    } catch (const std::exception& err) {
      outcome.pass = false;
      outcome.detail = std::string("exception: ") + err.what();
    }
    double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    bool in_budget = entry->budget_s == 0.0 || seconds < entry->budget_s;
    bool pass = outcome.pass && in_budget;
    if (!pass) ++failures;
    if (entry->budget_s > 0.0)
      std::printf("[%s] criterion %s %s: %s; runtime %.1fs (budget %.0fs)\n",
                  pass ? "PASS" : "FAIL", entry->id, entry->name,
                  outcome.detail.c_str(), seconds, entry->budget_s);
    else
      std::printf("[%s] criterion %s %s: %s; runtime %.1fs\n",
                  pass ? "PASS" : "FAIL", entry->id, entry->name,
                  outcome.detail.c_str(), seconds);
    std::fflush(stdout);
  }
  std::printf("%s: %zu criteria checked, %d failed\n",
              failures == 0 ? "ACCEPTANCE PASS" : "ACCEPTANCE FAIL",
              selected.size(), failures);
  return failures == 0 ? 0 : 1;
}
