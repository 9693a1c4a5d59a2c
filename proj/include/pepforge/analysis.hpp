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

// Experiment drivers: horizon sweeps with certificate re-verification, rate
// model fitting w(N) ~ 1/(alpha N^nu + beta), and the two-step worst-case
// landscape grid with grid-local minimum detection.

#ifndef PEPFORGE_ANALYSIS_HPP_
#define PEPFORGE_ANALYSIS_HPP_

#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "pepforge/designers.hpp"
#include "pepforge/schedules.hpp"
#include "pepforge/types.hpp"

namespace pepforge::analysis {

// One horizon of a sweep. seconds is wall clock (excluded from determinism
// guarantees); failed rows carry the error text and keep the sweep alive.
struct SweepRow {
  int N = 0;
  double w = 0.0;
  double seconds = 0.0;
  std::string schedule_id;
  core::StepSchedule schedule;
  core::DualCertificate cert;
  bool ok = false;
  bool verified = false;  // independent certificate re-verification at 1e-6
  std::string error;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  nlohmann::json descriptor;  // family/class/criterion/init of the sweep
};

struct SweepRequest {
  schedules::Family family = schedules::Family::MGD;
  int core_length = 0;  // CGD only
  std::vector<int> horizons;
  core::FunctionClassSpec fclass;
  core::CriterionSpec criterion;
  core::InitSpec init;
  double init_step = 1.0;  // fills the free-parameter mask at every N
  bool design = false;     // false: certify init_step as-is; true: run designer
  designers::DesignConfig designer;
  int starts = 1;  // multistart count when designing
  int jobs = 1;

  void validate() const;
};

// One row per horizon, evaluated in parallel across jobs threads. Every
// successful row's certificate is re-verified independently.
SweepResult sweep(const SweepRequest& req);

// CSV with header N,w,seconds,schedule_id; failed rows are omitted.
std::string sweep_to_csv(const SweepResult& result);

// Parameters of w(N) ~ 1/(alpha N^nu + beta). residual is the maximum
// relative error over the fitted points; degenerate inputs (constant w) are
// flagged rather than rejected.
struct RateFit {
  double alpha = 0.0;
  double beta = 0.0;
  double nu = 0.0;
  double residual = 0.0;
  bool degenerate = false;
};

nlohmann::json to_json(const RateFit& fit);

// Least squares of 1/w against alpha N^nu + beta: nu is grid searched over
// [0.25, 3.0] in steps of 0.005 with closed-form (alpha, beta) at each nu,
// then refined locally; the refinement is kept only if it improves the fit.
// Requires at least 4 successful rows, all with w > 0.
RateFit fit_rate(const SweepResult& result);
RateFit fit_rate(const std::vector<std::pair<int, double>>& points);

struct LandscapeCell {
  double h1 = 0.0;
  double h2 = 0.0;
  double w = 0.0;
  bool ok = false;
};

struct LandscapePoint {
  double h1 = 0.0;
  double h2 = 0.0;
  double w = 0.0;
};

struct LandscapeResult {
  int resolution = 0;
  std::vector<LandscapeCell> cells;  // row-major, h1 fastest
  // weak grid-local minima under a noise-tolerant comparison, merged into
  // 8-connected components; one representative (lowest cell) per component
  std::vector<LandscapePoint> minima;
  LandscapePoint global_min;
  std::vector<LandscapePoint> am_path;  // trajectory of run_am from (1, 1)
  std::string am_termination;
};

// Worst-case bound of two-step memoryless descent over an open grid
// (0, hmax]^2 sampled at h = hmax * i / resolution, i = 1..resolution.
// base must be a two-step memoryless smooth convex spec; per-cell solver
// failures leave holes rather than aborting.
LandscapeResult landscape(const core::ProblemSpec& base, int resolution = 40,
                          double hmax = 2.0, int jobs = 1);

// CSV with header h1,h2,w; holes are omitted.
std::string landscape_to_csv(const LandscapeResult& result);

}  // namespace pepforge::analysis

#endif  // PEPFORGE_ANALYSIS_HPP_
