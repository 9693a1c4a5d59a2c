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

#include <fstream>
#include <sstream>

#include "doctest.h"
#include "pepforge/assemble.hpp"
#include "pepforge/bridge.hpp"

namespace pc = pepforge::core;
namespace pb = pepforge::bridge;
namespace cn = pepforge::conic;

namespace {

pc::PepInstance build(const std::vector<double>& steps,
                      pc::CriterionKind crit = pc::CriterionKind::final_objective_gap,
                      pc::InitKind init = pc::InitKind::distance_to_opt,
                      double epsilon = 0.0) {
  pc::ProblemSpec s;
  s.schedule = pc::StepSchedule::memoryless_steps(steps);
  s.fclass.epsilon = epsilon;
  s.fclass.oracle =
      epsilon > 0 ? pc::OracleKind::relatively_inexact : pc::OracleKind::exact;
  s.criterion.kind = crit;
  s.init.kind = init;
  return pc::assemble_primal(s.schedule, s.fclass, s.criterion, s.init);
}

void check_identical(const pc::PepInstance& a, const pc::PepInstance& b) {
  CHECK(a.layout.N == b.layout.N);
  CHECK(a.layout.inexact == b.layout.inexact);
  CHECK(a.has_epigraph == b.has_epigraph);
  CHECK(a.tobj == b.tobj);
  REQUIRE(a.b.size() == b.b.size());
  for (int i = 0; i < a.b.size(); ++i) CHECK(a.b[i] == b.b[i]);
  REQUIRE(a.cvec.size() == b.cvec.size());
  for (int i = 0; i < a.cvec.size(); ++i) CHECK(a.cvec[i] == b.cvec[i]);
  REQUIRE(a.constraints.size() == b.constraints.size());
  for (size_t k = 0; k < a.constraints.size(); ++k) {
    const auto& ca = a.constraints[k];
    const auto& cb = b.constraints[k];
    CHECK(ca.tag.kind == cb.tag.kind);
    CHECK(ca.tag.i == cb.tag.i);
    CHECK(ca.tag.j == cb.tag.j);
    CHECK(ca.rhs == cb.rhs);
    CHECK(ca.tcoef == cb.tcoef);
    for (int i = 0; i < ca.fcoef.size(); ++i) CHECK(ca.fcoef[i] == cb.fcoef[i]);
    for (int i = 0; i < ca.gvec.size(); ++i) CHECK(ca.gvec[i] == cb.gvec[i]);
  }
}

}  // namespace

TEST_SUITE("bridge") {
  TEST_CASE("encode decode round trip is exact") {
    // irrational steps make bit-level equality a meaningful check
    std::vector<double> steps = {1.4142135623730951, 1.8767664204960620};
    check_identical(build(steps), pb::decode_dual(pb::encode_dual(build(steps))));
    auto dist = build({0.7, 1.3, 0.4}, pc::CriterionKind::final_distance_sq);
    check_identical(dist, pb::decode_dual(pb::encode_dual(dist)));
    auto mg = build({1.0, 1.0}, pc::CriterionKind::min_gradient_norm_sq,
                    pc::InitKind::objective_gap);
    check_identical(mg, pb::decode_dual(pb::encode_dual(mg)));
    auto inexact = build({1.0, 1.0}, pc::CriterionKind::min_gradient_norm_sq,
                         pc::InitKind::objective_gap, 0.3);
    check_identical(inexact, pb::decode_dual(pb::encode_dual(inexact)));
  }

  TEST_CASE("certificate verification flags constructed failures") {
    pc::ProblemSpec spec;
    spec.schedule =
        pc::StepSchedule::memoryless_steps({1.4142135623730951, 1.8767664204960620});
    auto inst = pc::assemble_primal(spec.schedule, spec.fclass, spec.criterion,
                                    spec.init);
    auto sol = cn::solve(pb::encode_dual(inst), 1e-8);
    REQUIRE(sol.status == cn::SolveStatus::optimal);
    auto cert = pb::decode_certificate(inst, sol);
    auto good = pb::verify_certificate(cert, spec, 1e-6);
    CHECK(good.pass);
    CHECK(good.min_eigenvalue >= -1e-6);
    CHECK(good.stationarity_residual <= 1e-6);

    auto tampered = cert;
    for (auto& [key, val] : tampered.lambda)
      if (val > 1e-3) {
        val = -val;
        break;
      }
    auto flagged = pb::verify_certificate(tampered, spec, 1e-6);
    CHECK(!flagged.pass);
    CHECK(flagged.sign_violation < -1e-3);

    pc::DualCertificate zero;
    auto zrep = pb::verify_certificate(zero, spec, 1e-6);
    CHECK(!zrep.pass);
    // with all multipliers zero the stationarity row equals the criterion b
    CHECK(zrep.stationarity_residual == doctest::Approx(1.0));
  }

  TEST_CASE("inexact oracle rates match the closed form") {
    // unit-step descent along inexact directions, smallest gradient norm,
    // functional init: bound = 1 / (1/2 + N(1-eps))
    for (double eps : {0.1, 0.3}) {
      pc::ProblemSpec spec;
      spec.schedule = pc::StepSchedule::memoryless_steps({1, 1, 1, 1, 1});
      spec.fclass.epsilon = eps;
      spec.fclass.oracle = pc::OracleKind::relatively_inexact;
      spec.criterion.kind = pc::CriterionKind::min_gradient_norm_sq;
      spec.init.kind = pc::InitKind::objective_gap;
      auto inst = pc::assemble_primal(spec.schedule, spec.fclass, spec.criterion,
                                      spec.init);
      auto sol = cn::solve(pb::encode_dual(inst), 1e-8);
      REQUIRE(sol.status == cn::SolveStatus::optimal);
      double expect = 1.0 / (0.5 + 5.0 * (1.0 - eps));
      CHECK(sol.primal_objective == doctest::Approx(expect).epsilon(1e-6));
      auto cert = pb::decode_certificate(inst, sol);
      CHECK(pb::verify_certificate(cert, spec, 1e-6).pass);
    }
  }

  TEST_CASE("encoded dual dump matches the golden file") {
    auto inst = build({1.0});
    std::string text = cn::dump(pb::encode_dual(inst));
    std::ifstream in(std::string(PEPFORGE_TEST_DIR) + "/golden/dual_gap_n1.coneprog");
    REQUIRE(in.good());
    std::stringstream buf;
    buf << in.rdbuf();
    CHECK(text == buf.str());
    // and the dump itself round trips
    check_identical(inst, pb::decode_dual(cn::parse_dump(text)));
  }
}
