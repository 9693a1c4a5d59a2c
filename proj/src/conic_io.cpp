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

#include <cstdio>
#include <sstream>
#include <stdexcept>
#include <string>

#include "pepforge/conic.hpp"

namespace pepforge::conic {

namespace {

const char* kind_name(ConeKind k) {
  switch (k) {
    case ConeKind::zero: return "zero";
    case ConeKind::nonneg: return "nonneg";
    case ConeKind::second_order: return "second_order";
    case ConeKind::psd: return "psd";
  }
  return "unknown";
}

ConeKind kind_from(const std::string& s) {
  if (s == "zero") return ConeKind::zero;
  if (s == "nonneg") return ConeKind::nonneg;
  if (s == "second_order") return ConeKind::second_order;
  if (s == "psd") return ConeKind::psd;
  throw std::invalid_argument("unknown cone kind: " + s);
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string dump(const ConeProgram& prog) {
  std::ostringstream os;
  os << "CONEPROG v1\n";
  os << "VAR " << prog.nvar << "\n";
  for (const auto& [idx, val] : prog.objective)
    os << "OBJ " << idx << " " << fmt(val) << "\n";
  for (const auto& e : prog.rows)
    os << "ROW " << e.row << " " << e.col << " " << fmt(e.val) << "\n";
  for (const auto& [idx, val] : prog.rhs)
    os << "RHS " << idx << " " << fmt(val) << "\n";
  for (const auto& c : prog.cones)
    os << "CONE " << kind_name(c.kind) << " " << c.start << " " << c.len << "\n";
  return os.str();
}

ConeProgram parse_dump(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line) || line != "CONEPROG v1")
    throw std::invalid_argument("missing CONEPROG v1 header");
  ConeProgram prog;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string kw;
    ls >> kw;
    if (kw == "VAR") {
      ls >> prog.nvar;
    } else if (kw == "OBJ") {
      int idx;
      double val;
      ls >> idx >> val;
      prog.objective.emplace_back(idx, val);
    } else if (kw == "ROW") {
      RowEntry e;
      ls >> e.row >> e.col >> e.val;
      prog.rows.push_back(e);
    } else if (kw == "RHS") {
      int idx;
      double val;
      ls >> idx >> val;
      prog.rhs.emplace_back(idx, val);
    } else if (kw == "CONE") {
      std::string kind;
      Cone c;
      ls >> kind >> c.start >> c.len;
      c.kind = kind_from(kind);
      prog.cones.push_back(c);
    } else {
      continue;  // unknown keywords are skipped so the format can grow
    }
    if (ls.fail()) throw std::invalid_argument("malformed line: " + line);
  }
  return prog;
}

}  // namespace pepforge::conic
