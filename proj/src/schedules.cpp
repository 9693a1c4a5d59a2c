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

#include <stdexcept>

#include "pepforge/schedules.hpp"

namespace pepforge::schedules {

using core::ScheduleKind;
using core::StepSchedule;

const char* to_string(Family f) {
  switch (f) {
    case Family::MGD: return "MGD";
    case Family::FULL: return "FULL";
    case Family::IGD: return "IGD";
    case Family::FIGD: return "FIGD";
    case Family::CGD: return "CGD";
  }
  return "unknown";
}

Family family_from_string(const std::string& s) {
  if (s == "MGD") return Family::MGD;
  if (s == "FULL") return Family::FULL;
  if (s == "IGD") return Family::IGD;
  if (s == "FIGD") return Family::FIGD;
  if (s == "CGD") return Family::CGD;
  throw std::invalid_argument("unknown method family: " + s);
}

ScheduleKind AlgorithmTemplate::kind() const {
  switch (family) {
    case Family::MGD:
    case Family::IGD: return ScheduleKind::memoryless;
    case Family::FULL:
    case Family::FIGD: return ScheduleKind::full;
    case Family::CGD: return ScheduleKind::cyclic;
  }
  return ScheduleKind::memoryless;
}

int AlgorithmTemplate::num_free() const {
  switch (family) {
    case Family::MGD:
    case Family::IGD: return N;
    case Family::FULL:
    case Family::FIGD: return N * (N + 1) / 2;
    case Family::CGD: return core_length;
  }
  return 0;
}

void AlgorithmTemplate::validate() const {
  if (N < 1) throw std::invalid_argument("template needs N >= 1");
  if (family == Family::CGD) {
    if (core_length < 1) throw std::invalid_argument("CGD needs core_length >= 1");
    if (N % core_length != 0)
      throw std::invalid_argument("CGD horizon must be a multiple of the core");
  } else if (core_length != 0) {
    throw std::invalid_argument("core_length is only meaningful for CGD");
  }
}

StepSchedule instantiate(const AlgorithmTemplate& tmpl,
                         const std::vector<double>& params) {
  tmpl.validate();
  if (static_cast<int>(params.size()) != tmpl.num_free())
    throw std::invalid_argument("expected " + std::to_string(tmpl.num_free()) +
                                " parameters, got " +
                                std::to_string(params.size()));
  switch (tmpl.family) {
    case Family::MGD:
    case Family::IGD: return StepSchedule::memoryless_steps(params);
    case Family::FULL:
    case Family::FIGD: {
      std::vector<std::vector<double>> rows;
      size_t at = 0;
      for (int i = 1; i <= tmpl.N; ++i) {
        rows.emplace_back(params.begin() + at, params.begin() + at + i);
        at += i;
      }
      return StepSchedule::full_triangle(rows);
    }
    case Family::CGD:
      return StepSchedule::cyclic_steps(params, tmpl.N / tmpl.core_length);
  }
  throw std::invalid_argument("unknown method family");
}

std::vector<double> read_free(const AlgorithmTemplate& tmpl,
                              const StepSchedule& schedule) {
  tmpl.validate();
  if (schedule.N != tmpl.N || schedule.kind != tmpl.kind() ||
      (tmpl.family == Family::CGD && schedule.core_length != tmpl.core_length))
    throw std::invalid_argument("schedule does not match the template shape");
  return designers::free_parameters(schedule);
}

StepSchedule rescale(const StepSchedule& schedule, double L, double R) {
  if (!(L > 0) || !(R > 0)) throw std::invalid_argument("L and R must be positive");
  schedule.validate();
  return schedule;  // coefficients are in 1/L units already
}

double rescale(double w_normalized, double L, double R,
               core::CriterionKind criterion, core::InitKind init) {
  if (!(L > 0) || !(R > 0)) throw std::invalid_argument("L and R must be positive");
  return w_normalized * core::value_rescale(criterion, init, L, R);
}

std::vector<double> constant_core(int n_star,
                                  const core::FunctionClassSpec& fclass) {
  if (n_star < 1) throw std::invalid_argument("core length must be positive");
  fclass.validate();
  return std::vector<double>(n_star, 2.0 * fclass.L / (fclass.L + fclass.mu));
}

namespace {

core::ProblemSpec distance_spec(const std::vector<double>& core_steps,
                                const core::FunctionClassSpec& fclass) {
  core::ProblemSpec spec;
  spec.schedule = StepSchedule::memoryless_steps(core_steps);
  spec.fclass = fclass;
  spec.criterion.kind = core::CriterionKind::final_distance_sq;
  spec.init.kind = core::InitKind::distance_to_opt;
  spec.init.R = 1.0;
  return spec;
}

CyclicRate rate_of(const core::ProblemSpec& spec, double tol) {
  designers::WorstCase solved = designers::worst_case(spec, tol);
  CyclicRate rate;
  rate.c = solved.w;
  rate.n_star = spec.schedule.N;
  rate.contractive = rate.c < 1.0;
  rate.core = designers::free_parameters(spec.schedule);
  rate.cert = solved.cert;
  return rate;
}

}  // namespace

CyclicRate cyclic_rate(const std::vector<double>& core_steps,
                       const core::FunctionClassSpec& fclass, double tol) {
  if (!(fclass.mu > 0))
    throw std::invalid_argument(
        "cyclic contraction needs strong convexity (mu > 0)");
  return rate_of(distance_spec(core_steps, fclass), tol);
}

CyclicRate optimize_core(int n_star, const core::FunctionClassSpec& fclass,
                         const designers::DesignConfig& config) {
  if (!(fclass.mu > 0))
    throw std::invalid_argument(
        "cyclic contraction needs strong convexity (mu > 0)");
  core::ProblemSpec spec = distance_spec(constant_core(n_star, fclass), fclass);
  designers::DesignReport report = designers::run_slm(config, spec);
  spec.schedule = report.final_schedule;
  return rate_of(spec, config.solver_tol);
}

}  // namespace pepforge::schedules
