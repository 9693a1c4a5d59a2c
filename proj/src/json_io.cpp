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

#include "pepforge/json_io.hpp"

namespace pepforge::core {

using nlohmann::json;

CriterionKind criterion_from_string(const std::string& s) {
  if (s == "gap" || s == "final_objective_gap") return CriterionKind::final_objective_gap;
  if (s == "dist" || s == "final_distance_sq") return CriterionKind::final_distance_sq;
  if (s == "min_grad" || s == "min_gradient_norm_sq")
    return CriterionKind::min_gradient_norm_sq;
  throw std::invalid_argument("unknown criterion: " + s);
}

InitKind init_kind_from_string(const std::string& s) {
  if (s == "dist" || s == "distance_to_opt") return InitKind::distance_to_opt;
  if (s == "gap" || s == "objective_gap") return InitKind::objective_gap;
  throw std::invalid_argument("unknown init kind: " + s);
}

json schedule_to_json(const StepSchedule& schedule) {
  json j;
  j["N"] = schedule.N;
  j["kind"] = to_string(schedule.kind);
  if (schedule.kind == ScheduleKind::cyclic) j["core_length"] = schedule.core_length;
  j["coeffs"] = schedule.coeffs;
  return j;
}

json to_json(const ProblemSpec& spec) {
  json j = schedule_to_json(spec.schedule);
  j["class"] = {{"L", spec.fclass.L},
                {"mu", spec.fclass.mu},
                {"epsilon", spec.fclass.epsilon}};
  j["criterion"] = to_string(spec.criterion.kind);
  j["init"] = {{"kind", to_string(spec.init.kind)}, {"R", spec.init.R}};
  return j;
}

StepSchedule schedule_from_json(const json& j) {
  StepSchedule schedule;
  schedule.N = j.at("N").get<int>();
  std::string kind = j.at("kind").get<std::string>();
  if (kind == "memoryless")
    schedule.kind = ScheduleKind::memoryless;
  else if (kind == "full")
    schedule.kind = ScheduleKind::full;
  else if (kind == "cyclic")
    schedule.kind = ScheduleKind::cyclic;
  else
    throw std::invalid_argument("unknown schedule kind: " + kind);
  if (schedule.kind == ScheduleKind::cyclic)
    schedule.core_length = j.at("core_length").get<int>();
  schedule.coeffs = j.at("coeffs").get<std::vector<std::vector<double>>>();
  schedule.validate();
  return schedule;
}

json certificate_to_json(const DualCertificate& cert) {
  json j;
  j["tau"] = cert.tau;
  j["bound"] = cert.bound;
  j["lambda"] = json::array();
  for (const auto& [key, value] : cert.lambda)
    j["lambda"].push_back({{"i", key.first}, {"j", key.second}, {"value", value}});
  j["eta"] = json::array();
  for (const auto& [i, value] : cert.eta)
    j["eta"].push_back({{"i", i}, {"value", value}});
  j["sigma"] = json::array();
  for (const auto& [i, value] : cert.sigma)
    j["sigma"].push_back({{"i", i}, {"value", value}});
  j["slack"] = json::array();
  for (Eigen::Index r = 0; r < cert.slack.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < cert.slack.cols(); ++c)
      row.push_back(cert.slack(r, c));
    j["slack"].push_back(row);
  }
  return j;
}

DualCertificate certificate_from_json(const json& j) {
  DualCertificate cert;
  cert.tau = j.at("tau").get<double>();
  cert.bound = j.at("bound").get<double>();
  for (const auto& e : j.at("lambda"))
    cert.lambda[{e.at("i").get<int>(), e.at("j").get<int>()}] =
        e.at("value").get<double>();
  for (const auto& e : j.at("eta"))
    cert.eta[e.at("i").get<int>()] = e.at("value").get<double>();
  for (const auto& e : j.at("sigma"))
    cert.sigma[e.at("i").get<int>()] = e.at("value").get<double>();
  auto rows = j.at("slack").get<std::vector<std::vector<double>>>();
  cert.slack.resize(static_cast<Eigen::Index>(rows.size()),
                    rows.empty() ? 0 : static_cast<Eigen::Index>(rows[0].size()));
  for (size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != rows[0].size())
      throw std::invalid_argument("slack rows must form a square matrix");
    for (size_t c = 0; c < rows[r].size(); ++c)
      cert.slack(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          rows[r][c];
  }
  return cert;
}

ProblemSpec problem_from_json(const json& j) {
  ProblemSpec spec;
  spec.schedule = schedule_from_json(j);
  const auto& cls = j.at("class");
  spec.fclass.L = cls.at("L").get<double>();
  spec.fclass.mu = cls.at("mu").get<double>();
  spec.fclass.epsilon = cls.at("epsilon").get<double>();
  spec.fclass.oracle = spec.fclass.epsilon > 0 ? OracleKind::relatively_inexact
                                               : OracleKind::exact;
  spec.criterion.kind = criterion_from_string(j.at("criterion").get<std::string>());
  const auto& init = j.at("init");
  spec.init.kind = init_kind_from_string(init.at("kind").get<std::string>());
  spec.init.R = init.at("R").get<double>();
  spec.validate();
  return spec;
}

}  // namespace pepforge::core
