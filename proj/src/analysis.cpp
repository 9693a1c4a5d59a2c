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

#include "pepforge/analysis.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <queue>
#include <stdexcept>
#include <thread>

#include "pepforge/bridge.hpp"
#include "pepforge/json_io.hpp"

namespace pepforge::analysis {
namespace {

std::string format_value(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

// Static partition by index; rows and cells are independent solves, so the
// only shared state is the preallocated output slot each task owns.
void run_pool(int jobs, int tasks, const std::function<void(int)>& body) {
  jobs = std::max(1, std::min(jobs, tasks));
  if (jobs == 1) {
    for (int i = 0; i < tasks; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> workers;
  workers.reserve(jobs);
  for (int t = 0; t < jobs; ++t) {
    workers.emplace_back([&] {
      for (int i = next.fetch_add(1); i < tasks; i = next.fetch_add(1)) body(i);
    });
  }
  for (auto& worker : workers) worker.join();
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
      .count();
}

}  // namespace

void SweepRequest::validate() const {
  if (horizons.empty())
    throw std::invalid_argument("sweep needs at least one horizon");
  int prev = 0;
  for (int n : horizons) {
    if (n < 1) throw std::invalid_argument("sweep horizons must be positive");
    if (n <= prev)
      throw std::invalid_argument("sweep horizons must be strictly increasing");
    prev = n;
  }
  if (family == schedules::Family::CGD && core_length < 1)
    throw std::invalid_argument("cyclic sweeps need a positive core length");
  if (!(init_step > 0.0) || !std::isfinite(init_step))
    throw std::invalid_argument("init_step must be positive");
  if (jobs < 1) throw std::invalid_argument("jobs must be at least 1");
  if (starts < 1) throw std::invalid_argument("starts must be at least 1");
  if (design) designer.validate();
}

SweepResult sweep(const SweepRequest& req) {
  req.validate();
  SweepResult out;
  out.descriptor = {
      {"family", schedules::to_string(req.family)},
      {"L", req.fclass.L},
      {"mu", req.fclass.mu},
      {"epsilon", req.fclass.epsilon},
      {"criterion", core::to_string(req.criterion.kind)},
      {"init", core::to_string(req.init.kind)},
      {"R", req.init.R},
      {"design", req.design},
  };
  if (req.design)
    out.descriptor["method"] = designers::to_string(req.designer.method);

  const int count = static_cast<int>(req.horizons.size());
  out.rows.resize(count);
  run_pool(req.jobs, count, [&](int i) {
    SweepRow& row = out.rows[i];
    row.N = req.horizons[i];
    const auto start = std::chrono::steady_clock::now();
    try {
      schedules::AlgorithmTemplate tmpl;
      tmpl.family = req.family;
      tmpl.N = row.N;
      tmpl.core_length =
          req.family == schedules::Family::CGD ? req.core_length : 0;
      std::vector<double> params(tmpl.num_free(), req.init_step);

      core::ProblemSpec spec;
      spec.schedule = schedules::instantiate(tmpl, params);
      spec.fclass = req.fclass;
      if (tmpl.inexact())
        spec.fclass.oracle = core::OracleKind::relatively_inexact;
      spec.criterion = req.criterion;
      spec.init = req.init;

      std::string id = schedules::to_string(req.family);
      id += "_N" + std::to_string(row.N);
      if (req.design) {
        designers::DesignReport report =
            designers::run_design_multistart(req.designer, spec, req.starts);
        if (report.termination == "solver_failure")
          throw designers::SolverFailureError("every design start failed");
        row.schedule = report.final_schedule;
        row.cert = report.final_certificate;
        row.w = report.final_w;
        id += std::string("_") + designers::to_string(req.designer.method);
      } else {
        designers::WorstCase solved =
            designers::worst_case(spec, req.designer.solver_tol);
        row.schedule = spec.schedule;
        row.cert = solved.cert;
        row.w = solved.w;
        id += "_fixed";
      }
      row.schedule_id = id;

      spec.schedule = row.schedule;
      bridge::VerifyReport check = bridge::verify_certificate(row.cert, spec);
      row.verified = check.pass;
      if (!check.pass)
        throw std::runtime_error("certificate failed independent verification");
      row.ok = true;
    } catch (const std::exception& err) {
      row.ok = false;
      row.error = err.what();
    }
    row.seconds = seconds_since(start);
  });
  return out;
}

std::string sweep_to_csv(const SweepResult& result) {
  std::string csv = "N,w,seconds,schedule_id\n";
  for (const SweepRow& row : result.rows) {
    if (!row.ok) continue;
    char seconds[32];
    std::snprintf(seconds, sizeof(seconds), "%.6f", row.seconds);
    csv += std::to_string(row.N) + "," + format_value(row.w) + "," + seconds +
           "," + row.schedule_id + "\n";
  }
  return csv;
}

nlohmann::json to_json(const RateFit& fit) {
  nlohmann::json doc = {{"alpha", fit.alpha},
                        {"beta", fit.beta},
                        {"nu", fit.nu},
                        {"residual", fit.residual}};
  if (fit.degenerate) doc["degenerate"] = true;
  return doc;
}

RateFit fit_rate(const std::vector<std::pair<int, double>>& points) {
  if (points.size() < 4)
    throw std::invalid_argument("rate fit needs at least 4 points");
  std::vector<double> n(points.size()), y(points.size());
  for (size_t i = 0; i < points.size(); ++i) {
    if (points[i].first < 1)
      throw std::invalid_argument("rate fit horizons must be positive");
    if (!(points[i].second > 0.0))
      throw std::invalid_argument("rate fit needs strictly positive bounds");
    n[i] = static_cast<double>(points[i].first);
    y[i] = 1.0 / points[i].second;
  }
  const size_t count = points.size();

  RateFit fit;
  double spread = 0.0;
  for (double v : y) spread = std::max(spread, std::abs(v - y[0]));
  if (spread <= 1e-12 * (1.0 + std::abs(y[0]))) {
    // Constant data carries no rate: pin the power term and report the fit
    // quality honestly instead of rejecting the input.
    fit.degenerate = true;
    fit.alpha = 0.0;
    fit.nu = 1.0;
    double mean = 0.0;
    for (double v : y) mean += v;
    fit.beta = mean / static_cast<double>(count);
    for (size_t i = 0; i < count; ++i) {
      double model = 1.0 / fit.beta;
      fit.residual = std::max(fit.residual,
                              std::abs(model - points[i].second) /
                                  points[i].second);
    }
    return fit;
  }

  // Closed-form least squares of y = alpha * n^nu + beta for a fixed nu.
  auto evaluate = [&](double nu, double* alpha, double* beta) {
    double mx = 0.0, my = 0.0;
    std::vector<double> x(count);
    for (size_t i = 0; i < count; ++i) {
      x[i] = std::pow(n[i], nu);
      mx += x[i];
      my += y[i];
    }
    mx /= static_cast<double>(count);
    my /= static_cast<double>(count);
    double sxx = 0.0, sxy = 0.0;
    for (size_t i = 0; i < count; ++i) {
      sxx += (x[i] - mx) * (x[i] - mx);
      sxy += (x[i] - mx) * (y[i] - my);
    }
    double a = sxx > 0.0 ? sxy / sxx : 0.0;
    double b = my - a * mx;
    double sse = 0.0;
    for (size_t i = 0; i < count; ++i) {
      double r = a * x[i] + b - y[i];
      sse += r * r;
    }
    *alpha = a;
    *beta = b;
    return sse;
  };

  double best_nu = 0.25, best_alpha = 0.0, best_beta = 0.0;
  double best_sse = std::numeric_limits<double>::infinity();
  const double step = 0.005;
  const int cells = static_cast<int>(std::lround((3.0 - 0.25) / step));
  for (int i = 0; i <= cells; ++i) {
    double nu = 0.25 + step * i;
    double a, b;
    double sse = evaluate(nu, &a, &b);
    if (sse < best_sse) {
      best_sse = sse;
      best_nu = nu;
      best_alpha = a;
      best_beta = b;
    }
  }

  // Golden-section polish inside the winning cell; kept only on strict
  // improvement so exact grid hits (integer rates) survive untouched.
  {
    double lo = std::max(0.25, best_nu - step);
    double hi = std::min(3.0, best_nu + step);
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = lo, b = hi;
    double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
    double junk_a, junk_b;
    double f1 = evaluate(x1, &junk_a, &junk_b);
    double f2 = evaluate(x2, &junk_a, &junk_b);
    for (int it = 0; it < 80; ++it) {
      if (f1 < f2) {
        b = x2;
        x2 = x1;
        f2 = f1;
        x1 = b - phi * (b - a);
        f1 = evaluate(x1, &junk_a, &junk_b);
      } else {
        a = x1;
        x1 = x2;
        f1 = f2;
        x2 = a + phi * (b - a);
        f2 = evaluate(x2, &junk_a, &junk_b);
      }
    }
    double nu = 0.5 * (a + b);
    double alpha, beta;
    double sse = evaluate(nu, &alpha, &beta);
    if (sse < best_sse * (1.0 - 1e-12)) {
      best_sse = sse;
      best_nu = nu;
      best_alpha = alpha;
      best_beta = beta;
    }
  }

  fit.alpha = best_alpha;
  fit.beta = best_beta;
  fit.nu = best_nu;
  for (size_t i = 0; i < count; ++i) {
    double denom = best_alpha * std::pow(n[i], best_nu) + best_beta;
    if (!(denom > 0.0)) {
      fit.residual = std::numeric_limits<double>::infinity();
      break;
    }
    double model = 1.0 / denom;
    fit.residual = std::max(
        fit.residual, std::abs(model - points[i].second) / points[i].second);
  }
  return fit;
}

RateFit fit_rate(const SweepResult& result) {
  std::vector<std::pair<int, double>> points;
  for (const SweepRow& row : result.rows)
    if (row.ok) points.emplace_back(row.N, row.w);
  return fit_rate(points);
}

LandscapeResult landscape(const core::ProblemSpec& base, int resolution,
                          double hmax, int jobs) {
  base.validate();
  if (base.schedule.N != 2 ||
      base.schedule.kind != core::ScheduleKind::memoryless)
    throw std::invalid_argument("landscape expects two memoryless steps");
  if (base.fclass.mu != 0.0 || base.fclass.oracle != core::OracleKind::exact)
    throw std::invalid_argument(
        "landscape expects the smooth convex exact-oracle class");
  if (resolution < 2) throw std::invalid_argument("resolution must be >= 2");
  if (!(hmax > 0.0)) throw std::invalid_argument("hmax must be positive");
  if (jobs < 1) throw std::invalid_argument("jobs must be at least 1");

  LandscapeResult out;
  out.resolution = resolution;
  out.cells.resize(static_cast<size_t>(resolution) * resolution);

  auto spec_at = [&](double h1, double h2) {
    core::ProblemSpec spec = base;
    spec.schedule = core::StepSchedule::memoryless_steps({h1, h2});
    return spec;
  };

  run_pool(jobs, resolution * resolution, [&](int idx) {
    int r = idx / resolution;  // h2 index
    int c = idx % resolution;  // h1 index
    LandscapeCell& cell = out.cells[idx];
    cell.h1 = hmax * (c + 1) / resolution;
    cell.h2 = hmax * (r + 1) / resolution;
    try {
      cell.w = designers::worst_case(spec_at(cell.h1, cell.h2)).w;
      cell.ok = true;
    } catch (const std::exception&) {
      cell.ok = false;  // hole; neighbors still get compared around it
    }
  });

  // Weak grid-local minima under a noise-tolerant comparison: a cell
  // survives when no 8-neighbor beats it by more than the tolerance, and
  // touching survivors merge into one reported basin.
  const int res = resolution;
  auto index_of = [res](int r, int c) { return r * res + c; };
  std::vector<char> weak_min(out.cells.size(), 0);
  for (int r = 0; r < res; ++r) {
    for (int c = 0; c < res; ++c) {
      const LandscapeCell& cell = out.cells[index_of(r, c)];
      if (!cell.ok) continue;
      double tol = 1e-6 * (1.0 + std::abs(cell.w));
      bool is_min = true;
      for (int dr = -1; dr <= 1 && is_min; ++dr) {
        for (int dc = -1; dc <= 1 && is_min; ++dc) {
          if (dr == 0 && dc == 0) continue;
          int nr = r + dr, nc = c + dc;
          if (nr < 0 || nr >= res || nc < 0 || nc >= res) continue;
          const LandscapeCell& nbr = out.cells[index_of(nr, nc)];
          if (nbr.ok && cell.w > nbr.w + tol) is_min = false;
        }
      }
      weak_min[index_of(r, c)] = is_min ? 1 : 0;
    }
  }
  std::vector<int> component(out.cells.size(), -1);
  int num_components = 0;
  for (int r = 0; r < res; ++r) {
    for (int c = 0; c < res; ++c) {
      int start = index_of(r, c);
      if (!weak_min[start] || component[start] >= 0) continue;
      int id = num_components++;
      std::queue<int> frontier;
      frontier.push(start);
      component[start] = id;
      LandscapePoint best{out.cells[start].h1, out.cells[start].h2,
                          out.cells[start].w};
      while (!frontier.empty()) {
        int idx = frontier.front();
        frontier.pop();
        int cr = idx / res, cc = idx % res;
        if (out.cells[idx].w < best.w)
          best = {out.cells[idx].h1, out.cells[idx].h2, out.cells[idx].w};
        for (int dr = -1; dr <= 1; ++dr) {
          for (int dc = -1; dc <= 1; ++dc) {
            int nr = cr + dr, nc = cc + dc;
            if (nr < 0 || nr >= res || nc < 0 || nc >= res) continue;
            int nidx = index_of(nr, nc);
            if (weak_min[nidx] && component[nidx] < 0) {
              component[nidx] = id;
              frontier.push(nidx);
            }
          }
        }
      }
      out.minima.push_back(best);
    }
  }
  std::sort(out.minima.begin(), out.minima.end(),
            [](const LandscapePoint& a, const LandscapePoint& b) {
              if (a.w != b.w) return a.w < b.w;
              if (a.h1 != b.h1) return a.h1 < b.h1;
              return a.h2 < b.h2;
            });

  out.global_min.w = std::numeric_limits<double>::infinity();
  for (const LandscapeCell& cell : out.cells) {
    if (cell.ok && cell.w < out.global_min.w)
      out.global_min = {cell.h1, cell.h2, cell.w};
  }

  // Trajectory of the alternating designer started at unit steps, overlaid
  // on the grid. The start point itself is recorded first.
  {
    designers::DesignConfig am;
    am.method = designers::DesignMethod::am;
    am.T_max = 100;
    core::ProblemSpec start = spec_at(1.0, 1.0);
    try {
      designers::WorstCase first = designers::worst_case(start);
      out.am_path.push_back({1.0, 1.0, first.w});
      designers::DesignReport report = designers::run_am(am, start);
      out.am_termination = report.termination;
      for (const designers::DesignIteration& it : report.iterations) {
        std::vector<double> steps = designers::free_parameters(it.schedule);
        out.am_path.push_back({steps[0], steps[1], it.w});
      }
    } catch (const std::exception&) {
      out.am_termination = "solver_failure";
    }
  }
  return out;
}

std::string landscape_to_csv(const LandscapeResult& result) {
  std::string csv = "h1,h2,w\n";
  for (const LandscapeCell& cell : result.cells) {
    if (!cell.ok) continue;
    csv += format_value(cell.h1) + "," + format_value(cell.h2) + "," +
           format_value(cell.w) + "\n";
  }
  return csv;
}

}  // namespace pepforge::analysis
