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

#ifndef PEPFORGE_JSON_IO_HPP_
#define PEPFORGE_JSON_IO_HPP_

#include <string>

#include "json.hpp"
#include "pepforge/types.hpp"

namespace pepforge::core {

// Problem document schema (field names are part of the contract):
// {"N":int, "kind":"memoryless|full|cyclic", "core_length":int?,
//  "coeffs":[[...]], "class":{"L":f,"mu":f,"epsilon":f}, "criterion":str,
//  "init":{"kind":str,"R":f}}
// criterion is one of gap|dist|min_grad, init kind one of dist|gap.
nlohmann::json to_json(const ProblemSpec& spec);
ProblemSpec problem_from_json(const nlohmann::json& j);

// Schedule fragment of the document: {"N","kind","core_length"?,"coeffs"}.
nlohmann::json schedule_to_json(const StepSchedule& schedule);
StepSchedule schedule_from_json(const nlohmann::json& j);

// Certificate document: {"tau":f, "bound":f, "lambda":[{"i","j","value"}...],
// "eta":[{"i","value"}...], "sigma":[{"i","value"}...], "slack":[[...]]}.
// Index -1 stands for the optimum; rows are emitted in key order so the
// document is deterministic and round-trips exactly.
nlohmann::json certificate_to_json(const DualCertificate& cert);
DualCertificate certificate_from_json(const nlohmann::json& j);

CriterionKind criterion_from_string(const std::string& s);
InitKind init_kind_from_string(const std::string& s);

}  // namespace pepforge::core

#endif  // PEPFORGE_JSON_IO_HPP_
