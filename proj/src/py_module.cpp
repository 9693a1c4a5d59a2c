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

// Python bindings. Documents cross the boundary as plain dicts with the
// same field names the CLI reads and writes, so artifacts are
// interchangeable between the two front ends.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "pepforge/analysis.hpp"
#include "pepforge/bridge.hpp"
#include "pepforge/designers.hpp"
#include "pepforge/json_io.hpp"
#include "pepforge/schedules.hpp"

namespace py = pybind11;
using nlohmann::json;

namespace {

// Dict <-> document conversion rides on the stdlib json module; the volumes
// here are tiny and the round trip is exact for the integer/double/string
// payloads these documents carry.
json to_doc(const py::object& obj) {
  py::module_ pyjson = py::module_::import("json");
  auto dumped = py::cast<std::string>(pyjson.attr("dumps")(obj));
  return json::parse(dumped);
}

py::object to_py(const json& doc) {
  py::module_ pyjson = py::module_::import("json");
  return pyjson.attr("loads")(doc.dump());
}

pepforge::designers::DesignMethod method_from_string(const std::string& s) {
  using pepforge::designers::DesignMethod;
  if (s == "am") return DesignMethod::am;
  if (s == "fom") return DesignMethod::fom;
  if (s == "slm") return DesignMethod::slm;
  throw std::invalid_argument("unknown design method: " + s);
}

json verify_report_to_json(const pepforge::bridge::VerifyReport& report) {
  return json{{"min_eigenvalue", report.min_eigenvalue},
              {"stationarity_residual", report.stationarity_residual},
              {"sign_violation", report.sign_violation},
              {"simplex_residual", report.simplex_residual},
              {"pass", report.pass}};
}

json sweep_result_to_json(const pepforge::analysis::SweepResult& result) {
  json rows = json::array();
  for (const auto& row : result.rows) {
    json e;
    e["N"] = row.N;
    e["ok"] = row.ok;
    e["seconds"] = row.seconds;
    if (row.ok) {
      e["w"] = row.w;
      e["schedule_id"] = row.schedule_id;
      e["schedule"] = pepforge::core::schedule_to_json(row.schedule);
      e["certificate"] = pepforge::core::certificate_to_json(row.cert);
    } else {
      e["error"] = row.error;
    }
    rows.push_back(std::move(e));
  }
  return json{{"descriptor", result.descriptor},
              {"rows", std::move(rows)},
              {"csv", pepforge::analysis::sweep_to_csv(result)}};
}

json landscape_result_to_json(const pepforge::analysis::LandscapeResult& result) {
  json cells = json::array();
  for (const auto& cell : result.cells) {
    json e{{"h1", cell.h1}, {"h2", cell.h2}, {"ok", cell.ok}};
    if (cell.ok) e["w"] = cell.w;
    cells.push_back(std::move(e));
  }
  auto point = [](const pepforge::analysis::LandscapePoint& p) {
    return json{{"h1", p.h1}, {"h2", p.h2}, {"w", p.w}};
  };
  json minima = json::array();
  for (const auto& p : result.minima) minima.push_back(point(p));
  json path = json::array();
  for (const auto& p : result.am_path) path.push_back(point(p));
  return json{{"resolution", result.resolution},
              {"cells", std::move(cells)},
              {"minima", std::move(minima)},
              {"global_min", point(result.global_min)},
              {"am_path", std::move(path)},
              {"am_termination", result.am_termination},
              {"csv", pepforge::analysis::landscape_to_csv(result)}};
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  using namespace pepforge;

  m.doc() =
      "Certified worst-case bounds and step-size design for fixed-step "
      "first-order methods";
  m.attr("__version__") = "0.1.0";

  // Registration order puts these translators ahead of the defaults, so the
  // derived types do not collapse into plain ValueError / RuntimeError.
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const json::exception& e) {
      // Malformed documents are input errors, not runtime failures.
      PyErr_SetString(PyExc_ValueError, e.what());
    }
  });
  py::register_exception<designers::SolverFailureError>(m, "SolverFailure",
                                                        PyExc_RuntimeError);
  py::register_exception<designers::UnsupportedSpecError>(m, "UnsupportedSpec",
                                                          PyExc_ValueError);

  m.def(
      "analyze",
      [](const py::object& problem, double tol) {
        json doc = to_doc(problem);
        json out;
        {
          py::gil_scoped_release release;
          core::ProblemSpec spec = core::problem_from_json(doc);
          designers::WorstCase solved = designers::worst_case(spec, tol);
          out["w"] = solved.w;
          out["problem"] = core::to_json(spec);
          out["certificate"] = core::certificate_to_json(solved.cert);
        }
        return to_py(out);
      },
      py::arg("problem"), py::arg("tol") = 1e-8,
      "Certify the worst-case value of a problem document; returns "
      "{w, problem, certificate}.");

  m.def(
      "design",
      [](const py::object& problem, const std::string& method, int T_max,
         double tol_w, double tol_alpha, double D0, double beta0,
         double solver_tol, int starts, unsigned seed) {
        json doc = to_doc(problem);
        json out;
        {
          py::gil_scoped_release release;
          core::ProblemSpec spec = core::problem_from_json(doc);
          designers::DesignConfig config;
          config.method = method_from_string(method);
          config.T_max = T_max;
          config.tol_w = tol_w;
          config.tol_alpha = tol_alpha;
          config.D0 = D0;
          config.beta0 = beta0;
          config.solver_tol = solver_tol;
          designers::DesignReport report =
              starts > 1
                  ? designers::run_design_multistart(config, spec, starts, seed)
                  : designers::run_design(config, spec);
          core::ProblemSpec designed = spec;
          designed.schedule = report.final_schedule;
          out = designers::report_to_json(report);
          out["final_w"] = report.final_w;
          out["problem"] = core::to_json(designed);
          out["final_certificate"] =
              core::certificate_to_json(report.final_certificate);
        }
        return to_py(out);
      },
      py::arg("problem"), py::arg("method") = "slm", py::arg("T_max") = 1000,
      py::arg("tol_w") = 1e-7, py::arg("tol_alpha") = 1e-4,
      py::arg("D0") = 1.0, py::arg("beta0") = 0.5,
      py::arg("solver_tol") = 1e-8, py::arg("starts") = 1,
      py::arg("seed") = 2024,
      "Optimize the free step-size parameters of a problem document; returns "
      "the design report with the certified final schedule.");

  m.def(
      "verify",
      [](const py::object& certificate, const py::object& problem,
         double tol) {
        json cert_doc = to_doc(certificate);
        json prob_doc = to_doc(problem);
        json out;
        {
          py::gil_scoped_release release;
          core::DualCertificate cert = core::certificate_from_json(cert_doc);
          core::ProblemSpec spec = core::problem_from_json(prob_doc);
          out = verify_report_to_json(
              bridge::verify_certificate(cert, spec, tol));
        }
        return to_py(out);
      },
      py::arg("certificate"), py::arg("problem"), py::arg("tol") = 1e-6,
      "Recheck a certificate against a problem document from the problem "
      "data alone; returns the residual report.");

  m.def(
      "sweep",
      [](const std::string& family, const std::vector<int>& horizons,
         double L, double mu, double epsilon, const std::string& criterion,
         const std::string& init, double R, double init_step, int core_length,
         bool design, const std::string& method, int T_max, int starts,
         double solver_tol, int jobs) {
        json out;
        {
          py::gil_scoped_release release;
          analysis::SweepRequest req;
          req.family = schedules::family_from_string(family);
          req.core_length = core_length;
          req.horizons = horizons;
          req.fclass.L = L;
          req.fclass.mu = mu;
          req.fclass.epsilon = epsilon;
          req.fclass.oracle = epsilon > 0 ? core::OracleKind::relatively_inexact
                                          : core::OracleKind::exact;
          req.criterion.kind = core::criterion_from_string(criterion);
          req.init.kind = core::init_kind_from_string(init);
          req.init.R = R;
          req.init_step = init_step;
          req.design = design;
          req.designer.method = method_from_string(method);
          req.designer.T_max = T_max;
          req.designer.solver_tol = solver_tol;
          req.starts = starts;
          req.jobs = jobs;
          out = sweep_result_to_json(analysis::sweep(req));
        }
        return to_py(out);
      },
      py::arg("family"), py::arg("horizons"), py::arg("L") = 1.0,
      py::arg("mu") = 0.0, py::arg("epsilon") = 0.0,
      py::arg("criterion") = "gap", py::arg("init") = "dist",
      py::arg("R") = 1.0, py::arg("init_step") = 1.0,
      py::arg("core_length") = 0, py::arg("design") = false,
      py::arg("method") = "slm", py::arg("T_max") = 1000,
      py::arg("starts") = 1, py::arg("solver_tol") = 1e-8, py::arg("jobs") = 1,
      "Certify one bound per horizon for an algorithm family; returns rows "
      "with per-horizon schedules and certificates plus the CSV rendering.");

  m.def(
      "fit_rate",
      [](const std::vector<std::pair<int, double>>& points) {
        json out;
        {
          py::gil_scoped_release release;
          out = analysis::to_json(analysis::fit_rate(points));
        }
        return to_py(out);
      },
      py::arg("points"),
      "Fit w(N) ~ 1/(alpha N^nu + beta) to (N, w) points; returns "
      "{alpha, beta, nu, residual}.");

  m.def(
      "landscape",
      [](const py::object& problem, int resolution, double hmax, int jobs) {
        json doc = to_doc(problem);
        json out;
        {
          py::gil_scoped_release release;
          core::ProblemSpec spec = core::problem_from_json(doc);
          out = landscape_result_to_json(
              analysis::landscape(spec, resolution, hmax, jobs));
        }
        return to_py(out);
      },
      py::arg("problem"), py::arg("resolution") = 40, py::arg("hmax") = 2.0,
      py::arg("jobs") = 1,
      "Grid the two-step bound surface of a memoryless N=2 problem; returns "
      "cells, grid-local minima and the greedy-descent trajectory.");
}
