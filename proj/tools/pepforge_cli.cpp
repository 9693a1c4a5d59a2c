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

// Command-line front end. Exit codes are part of the scripting contract:
// 0 success, 2 bad input, 3 infeasible/unbounded problem, 4 unsupported
// method/spec combination, 5 solver failure.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "pepforge/analysis.hpp"
#include "pepforge/bridge.hpp"
#include "pepforge/designers.hpp"
#include "pepforge/json_io.hpp"
#include "pepforge/schedules.hpp"

namespace {

using namespace pepforge;
using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitInfeasible = 3;
constexpr int kExitUnsupported = 4;
constexpr int kExitSolver = 5;

struct SpecOptions {
  std::string family = "MGD";
  int N = 1;
  int core = 0;
  std::string steps;
  std::string coeffs;
  std::string klass;
  double L = 1.0;
  double mu = 0.0;
  double epsilon = 0.0;
  std::string criterion = "gap";
  std::string init = "dist";
  double R = 1.0;
};

struct DesignOptions {
  std::string method = "slm";
  int T = 1000;
  double tolw = 1e-7;
  double tola = 1e-4;
  double D0 = 1.0;
  int starts = 1;
};

void add_spec_flags(CLI::App* cmd, SpecOptions& o) {
  cmd->add_option("--family", o.family,
                  "Algorithm template: MGD, FULL, IGD, FIGD or CGD");
  cmd->add_option("--N", o.N, "Iteration count");
  cmd->add_option("--core", o.core, "Cyclic core length (CGD only)");
  cmd->add_option("--steps", o.steps,
                  "Comma-separated step values; one value fills every free "
                  "parameter");
  cmd->add_option("--coeffs", o.coeffs,
                  "Lower-triangular coefficient rows as inline JSON");
  cmd->add_option("--class", o.klass,
                  "smooth_convex or smooth_strongly_convex (consistency check)");
  cmd->add_option("--L", o.L, "Smoothness constant");
  cmd->add_option("--mu", o.mu, "Strong convexity constant");
  cmd->add_option("--epsilon", o.epsilon, "Relative gradient inexactness");
  cmd->add_option("--criterion", o.criterion, "gap, dist or min_grad")
      ->check(CLI::IsMember({"gap", "dist", "min_grad"}));
  cmd->add_option("--init", o.init, "Initial condition kind: dist or gap")
      ->check(CLI::IsMember({"dist", "gap"}));
  cmd->add_option("--R", o.R, "Initial condition radius");
}

void add_design_flags(CLI::App* cmd, DesignOptions& o) {
  cmd->add_option("--method", o.method, "slm, am or fom")
      ->check(CLI::IsMember({"slm", "am", "fom"}));
  cmd->add_option("--T", o.T, "Iteration cap");
  cmd->add_option("--tolw", o.tolw, "Bound-improvement stopping threshold");
  cmd->add_option("--tola", o.tola, "Schedule-change stopping threshold");
  cmd->add_option("--D0", o.D0, "Initial trust-region radius");
  cmd->add_option("--starts", o.starts, "Random restarts (best result wins)");
}

double solver_tolerance() {
  const char* env = std::getenv("PEPFORGE_SOLVER_TOL");
  if (!env) return 1e-8;
  try {
    size_t used = 0;
    double tol = std::stod(env, &used);
    if (used != std::string(env).size() || !(tol > 0))
      throw std::invalid_argument("");
    return tol;
  } catch (const std::exception&) {
    throw std::invalid_argument(
        "PEPFORGE_SOLVER_TOL must be a positive number");
  }
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot read " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::invalid_argument("cannot write " + path);
  out << content;
  if (!out) throw std::invalid_argument("cannot write " + path);
}

std::vector<double> parse_step_list(const std::string& text) {
  std::vector<double> values;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      size_t used = 0;
      values.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument("");
    } catch (const std::exception&) {
      throw std::invalid_argument("bad numeric list entry: '" + item + "'");
    }
  }
  if (values.empty()) throw std::invalid_argument("empty numeric list");
  return values;
}

std::vector<int> parse_horizon_list(const std::string& text) {
  std::vector<int> values;
  for (double v : parse_step_list(text)) {
    int n = static_cast<int>(v);
    if (v != n) throw std::invalid_argument("horizons must be integers");
    values.push_back(n);
  }
  return values;
}

core::StepSchedule schedule_from_flags(const CLI::App* cmd,
                                       const SpecOptions& o) {
  schedules::Family family = schedules::family_from_string(o.family);
  if (cmd->count("--coeffs")) {
    if (family != schedules::Family::FULL && family != schedules::Family::FIGD)
      throw std::invalid_argument("--coeffs requires --family FULL or FIGD");
    auto rows = json::parse(o.coeffs).get<std::vector<std::vector<double>>>();
    core::StepSchedule schedule =
        core::StepSchedule::full_triangle(rows);
    if (cmd->count("--N") && schedule.N != o.N)
      throw std::invalid_argument("--coeffs size disagrees with --N");
    return schedule;
  }
  schedules::AlgorithmTemplate tmpl;
  tmpl.family = family;
  tmpl.N = o.N;
  tmpl.core_length = family == schedules::Family::CGD ? o.core : 0;
  std::vector<double> params;
  if (cmd->count("--steps"))
    params = parse_step_list(o.steps);
  else
    params = {1.0 / o.L};  // classical constant step-size initialization
  if (params.size() == 1)
    params.assign(static_cast<size_t>(tmpl.num_free()), params[0]);
  return schedules::instantiate(tmpl, params);
}

// Builds the problem from flags, optionally starting from a JSON document
// (either a full problem or a bare schedule fragment). Flags override the
// document field by field; any schedule flag rebuilds the whole schedule.
core::ProblemSpec spec_from_flags(const CLI::App* cmd, const SpecOptions& o,
                                  const json* doc) {
  core::ProblemSpec spec;
  bool have_schedule = false;
  if (doc) {
    if (doc->contains("class")) {
      spec = core::problem_from_json(*doc);
    } else {
      spec.schedule = core::schedule_from_json(*doc);
    }
    have_schedule = true;
  }
  if (cmd->count("--L")) spec.fclass.L = o.L;
  if (cmd->count("--mu")) spec.fclass.mu = o.mu;
  if (cmd->count("--epsilon")) spec.fclass.epsilon = o.epsilon;
  if (cmd->count("--criterion"))
    spec.criterion.kind = core::criterion_from_string(o.criterion);
  if (cmd->count("--init"))
    spec.init.kind = core::init_kind_from_string(o.init);
  if (cmd->count("--R")) spec.init.R = o.R;

  bool schedule_flags = cmd->count("--family") || cmd->count("--N") ||
                        cmd->count("--steps") || cmd->count("--coeffs") ||
                        cmd->count("--core");
  if (!have_schedule || schedule_flags)
    spec.schedule = schedule_from_flags(cmd, o);

  schedules::Family family = schedules::family_from_string(o.family);
  bool inexact_family = family == schedules::Family::IGD ||
                        family == schedules::Family::FIGD;
  if (!doc && inexact_family && !(spec.fclass.epsilon > 0))
    throw std::invalid_argument(
        "inexact templates need --epsilon in (0, 1)");
  spec.fclass.oracle = spec.fclass.epsilon > 0
                           ? core::OracleKind::relatively_inexact
                           : core::OracleKind::exact;

  if (cmd->count("--class")) {
    if (o.klass == "smooth_convex") {
      if (spec.fclass.mu != 0.0)
        throw std::invalid_argument("smooth_convex requires mu = 0");
    } else if (o.klass == "smooth_strongly_convex") {
      if (!(spec.fclass.mu > 0.0))
        throw std::invalid_argument("smooth_strongly_convex requires mu > 0");
    } else {
      throw std::invalid_argument("unknown class: " + o.klass);
    }
  }
  spec.validate();
  return spec;
}

designers::DesignConfig design_config(const DesignOptions& o) {
  designers::DesignConfig config;
  if (o.method == "am")
    config.method = designers::DesignMethod::am;
  else if (o.method == "fom")
    config.method = designers::DesignMethod::fom;
  else
    config.method = designers::DesignMethod::slm;
  config.T_max = o.T;
  config.tol_w = o.tolw;
  config.tol_alpha = o.tola;
  config.D0 = o.D0;
  config.solver_tol = solver_tolerance();
  config.validate();
  return config;
}

std::optional<json> load_optional_doc(const std::string& path) {
  if (path.empty()) return std::nullopt;
  return json::parse(read_text(path));
}

int do_analyze(const CLI::App* cmd, const SpecOptions& o,
               const std::string& spec_path, const std::string& out) {
  std::optional<json> doc = load_optional_doc(spec_path);
  core::ProblemSpec spec =
      spec_from_flags(cmd, o, doc ? &*doc : nullptr);
  designers::WorstCase solved =
      designers::worst_case(spec, solver_tolerance());
  std::printf("%.6f\n", solved.w);
  json artifact;
  artifact["w"] = solved.w;
  artifact["problem"] = core::to_json(spec);
  artifact["certificate"] = core::certificate_to_json(solved.cert);
  write_text(out.empty() ? "certificate.json" : out, artifact.dump(2) + "\n");
  return kExitOk;
}

int do_design(const CLI::App* cmd, const SpecOptions& o,
              const DesignOptions& d, const std::string& out) {
  core::ProblemSpec spec = spec_from_flags(cmd, o, nullptr);
  designers::DesignConfig config = design_config(d);
  designers::DesignReport report =
      d.starts > 1
          ? designers::run_design_multistart(config, spec, d.starts)
          : designers::run_design(config, spec);
  if (report.termination == "solver_failure") {
    std::fprintf(stderr, "design failed: no start produced a certified bound\n");
    return kExitSolver;
  }
  std::printf("N=%d w=%.6f iters=%zu term=%s\n", spec.schedule.N,
              report.final_w, report.iterations.size(),
              report.termination.c_str());
  core::ProblemSpec designed = spec;
  designed.schedule = report.final_schedule;
  json artifact = designers::report_to_json(report);
  artifact["final_w"] = report.final_w;
  artifact["problem"] = core::to_json(designed);
  artifact["final_certificate"] =
      core::certificate_to_json(report.final_certificate);
  write_text(out.empty() ? "design_report.json" : out, artifact.dump(2) + "\n");
  return kExitOk;
}

int do_sweep(const CLI::App* cmd, const SpecOptions& o, const DesignOptions& d,
             const std::string& horizons, int jobs, const std::string& out) {
  analysis::SweepRequest req;
  req.family = schedules::family_from_string(o.family);
  req.core_length = o.core;
  req.horizons = parse_horizon_list(horizons);
  req.fclass.L = o.L;
  req.fclass.mu = o.mu;
  req.fclass.epsilon = o.epsilon;
  req.fclass.oracle = o.epsilon > 0 ? core::OracleKind::relatively_inexact
                                    : core::OracleKind::exact;
  req.criterion.kind = core::criterion_from_string(o.criterion);
  req.init.kind = core::init_kind_from_string(o.init);
  req.init.R = o.R;
  if (cmd->count("--steps"))
    req.init_step = parse_step_list(o.steps).at(0);
  else
    req.init_step = 1.0 / o.L;
  req.design = cmd->count("--method") > 0;
  req.designer = design_config(d);
  req.starts = d.starts;
  req.jobs = jobs;

  analysis::SweepResult result = analysis::sweep(req);
  bool any_ok = false;
  for (const analysis::SweepRow& row : result.rows) {
    if (row.ok)
      any_ok = true;
    else
      std::fprintf(stderr, "N=%d failed: %s\n", row.N, row.error.c_str());
  }
  std::string csv = analysis::sweep_to_csv(result);
  if (out.empty())
    std::fputs(csv.c_str(), stdout);
  else
    write_text(out, csv);
  if (any_ok) return kExitOk;
  for (const analysis::SweepRow& row : result.rows)
    if (row.error.find("infeasible") != std::string::npos ||
        row.error.find("unbounded") != std::string::npos)
      return kExitInfeasible;
  return kExitSolver;
}

int do_fit(const std::string& csv_path, const std::string& out) {
  std::istringstream in(read_text(csv_path));
  std::string line;
  std::vector<std::pair<int, double>> points;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (first) {
      first = false;
      if (line.rfind("N,", 0) == 0) continue;  // header
    }
    std::stringstream fields(line);
    std::string n_text, w_text;
    if (!std::getline(fields, n_text, ',') || !std::getline(fields, w_text, ','))
      throw std::invalid_argument("bad sweep CSV line: '" + line + "'");
    try {
      points.emplace_back(std::stoi(n_text), std::stod(w_text));
    } catch (const std::exception&) {
      throw std::invalid_argument("bad sweep CSV line: '" + line + "'");
    }
  }
  analysis::RateFit fit = analysis::fit_rate(points);
  std::string text = analysis::to_json(fit).dump(2) + "\n";
  std::fputs(text.c_str(), stdout);
  if (!out.empty()) write_text(out, text);
  return kExitOk;
}

int do_landscape(const CLI::App* cmd, const SpecOptions& o, int resolution,
                 double hmax, int jobs, const std::string& out) {
  core::ProblemSpec spec;
  spec.schedule = core::StepSchedule::memoryless_steps({1.0 / o.L, 1.0 / o.L});
  if (cmd->count("--L")) spec.fclass.L = o.L;
  if (cmd->count("--criterion"))
    spec.criterion.kind = core::criterion_from_string(o.criterion);
  if (cmd->count("--init"))
    spec.init.kind = core::init_kind_from_string(o.init);
  if (cmd->count("--R")) spec.init.R = o.R;
  spec.validate();

  analysis::LandscapeResult result =
      analysis::landscape(spec, resolution, hmax, jobs);
  std::string csv = analysis::landscape_to_csv(result);
  if (out.empty()) {
    std::fputs(csv.c_str(), stdout);
  } else {
    write_text(out, csv);
    int holes = 0;
    for (const analysis::LandscapeCell& cell : result.cells)
      if (!cell.ok) ++holes;
    std::printf("cells=%zu holes=%d minima=%zu\n", result.cells.size(), holes,
                result.minima.size());
    for (const analysis::LandscapePoint& p : result.minima)
      std::printf("minimum h1=%.6g h2=%.6g w=%.6g\n", p.h1, p.h2, p.w);
    if (!result.am_path.empty()) {
      const analysis::LandscapePoint& end = result.am_path.back();
      std::printf("am_end h1=%.6g h2=%.6g w=%.6g term=%s\n", end.h1, end.h2,
                  end.w, result.am_termination.c_str());
    }
  }
  return kExitOk;
}

// Structural compatibility between a certificate and a problem; mismatches
// are input errors, not verification failures.
void check_certificate_shape(const core::DualCertificate& cert,
                             const core::ProblemSpec& spec) {
  const int N = spec.schedule.N;
  const bool inexact =
      spec.fclass.oracle == core::OracleKind::relatively_inexact;
  const int m = inexact ? 2 * N + 2 : N + 2;
  if (cert.slack.rows() != cert.slack.cols())
    throw std::invalid_argument("certificate slack matrix is not square");
  if (cert.slack.rows() != 0 && cert.slack.rows() != m)
    throw std::invalid_argument(
        "certificate dimension mismatch: slack side " +
        std::to_string(cert.slack.rows()) + ", problem needs " +
        std::to_string(m));
  for (const auto& [key, value] : cert.lambda) {
    (void)value;
    if (key.first < core::kStar || key.first > N || key.second < core::kStar ||
        key.second > N || key.first == key.second)
      throw std::invalid_argument("certificate multiplier index out of range");
  }
  for (const auto& [i, value] : cert.eta) {
    (void)value;
    if (!inexact || i < 0 || i >= N)
      throw std::invalid_argument(
          "certificate inexactness multiplier does not fit the problem");
  }
  const bool min_type =
      spec.criterion.kind == core::CriterionKind::min_gradient_norm_sq;
  for (const auto& [i, value] : cert.sigma) {
    (void)value;
    if (!min_type || i < 1 || i > N)
      throw std::invalid_argument(
          "certificate epigraph multiplier does not fit the problem");
  }
}

int do_verify(const CLI::App* cmd, const SpecOptions& o,
              const std::string& cert_path, const std::string& spec_path) {
  json doc = json::parse(read_text(cert_path));
  core::DualCertificate cert;
  std::optional<json> problem_doc;
  if (doc.contains("final_certificate")) {  // design report artifact
    cert = core::certificate_from_json(doc.at("final_certificate"));
    problem_doc = doc.at("problem");
  } else if (doc.contains("certificate")) {  // analyze artifact
    cert = core::certificate_from_json(doc.at("certificate"));
    problem_doc = doc.at("problem");
  } else if (doc.contains("tau")) {  // bare certificate
    cert = core::certificate_from_json(doc);
  } else {
    throw std::invalid_argument(cert_path + " holds no certificate");
  }
  if (!spec_path.empty()) problem_doc = json::parse(read_text(spec_path));
  core::ProblemSpec spec = spec_from_flags(
      cmd, o, problem_doc ? &*problem_doc : nullptr);

  check_certificate_shape(cert, spec);
  bridge::VerifyReport report = bridge::verify_certificate(cert, spec);
  std::printf("min_eigenvalue=%.6e\n", report.min_eigenvalue);
  std::printf("stationarity_residual=%.6e\n", report.stationarity_residual);
  std::printf("sign_violation=%.6e\n", report.sign_violation);
  std::printf("simplex_residual=%.6e\n", report.simplex_residual);
  std::printf("%s\n", report.pass ? "PASS" : "FAIL");
  return report.pass ? kExitOk : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "pepforge: certified worst-case analysis and step-size design for "
      "fixed-step first-order methods"};
  app.require_subcommand(1);

  SpecOptions spec_opts;
  DesignOptions design_opts;
  std::string out, spec_path, cert_path, csv_path, horizons;
  int jobs = 1, resolution = 40;
  double hmax = 2.0;

  CLI::App* analyze = app.add_subcommand(
      "analyze", "Certify the worst case of a fixed schedule");
  add_spec_flags(analyze, spec_opts);
  analyze->add_option("spec", spec_path, "Problem or schedule JSON document");
  analyze->add_option("--out", out, "Certificate path (certificate.json)");

  CLI::App* design = app.add_subcommand(
      "design", "Optimize a step-size schedule and certify the result");
  add_spec_flags(design, spec_opts);
  add_design_flags(design, design_opts);
  design->add_option("--out", out, "Report path (design_report.json)");

  CLI::App* sweep =
      app.add_subcommand("sweep", "Evaluate or design across horizons");
  sweep->add_option("--family", spec_opts.family,
                    "Algorithm template: MGD, FULL, IGD, FIGD or CGD");
  sweep->add_option("--N", horizons, "Comma-separated ascending horizons")
      ->required();
  sweep->add_option("--core", spec_opts.core, "Cyclic core length (CGD only)");
  sweep->add_option("--steps", spec_opts.steps,
                    "Step value filling every free parameter");
  sweep->add_option("--L", spec_opts.L, "Smoothness constant");
  sweep->add_option("--mu", spec_opts.mu, "Strong convexity constant");
  sweep->add_option("--epsilon", spec_opts.epsilon,
                    "Relative gradient inexactness");
  sweep->add_option("--criterion", spec_opts.criterion, "gap, dist or min_grad")
      ->check(CLI::IsMember({"gap", "dist", "min_grad"}));
  sweep->add_option("--init", spec_opts.init, "Initial condition kind")
      ->check(CLI::IsMember({"dist", "gap"}));
  sweep->add_option("--R", spec_opts.R, "Initial condition radius");
  add_design_flags(sweep, design_opts);
  sweep->add_option("--jobs", jobs, "Parallel row evaluations");
  sweep->add_option("--out", out, "CSV path (stdout when omitted)");

  CLI::App* fit =
      app.add_subcommand("fit", "Fit 1/(alpha N^nu + beta) to a sweep CSV");
  fit->add_option("csv", csv_path, "Sweep CSV file")->required();
  fit->add_option("--out", out, "JSON path (stdout always)");

  CLI::App* landscape = app.add_subcommand(
      "landscape", "Grid the two-step worst case and locate its basins");
  add_spec_flags(landscape, spec_opts);
  landscape->add_option("--resolution", resolution, "Cells per axis");
  landscape->add_option("--hmax", hmax, "Upper end of the step range");
  landscape->add_option("--jobs", jobs, "Parallel cell evaluations");
  landscape->add_option("--out", out, "CSV path (stdout when omitted)");

  CLI::App* verify = app.add_subcommand(
      "verify", "Re-check a certificate against problem data");
  add_spec_flags(verify, spec_opts);
  verify->add_option("certificate", cert_path,
                     "Certificate, analyze or design artifact")
      ->required();
  verify->add_option("spec", spec_path, "Problem or schedule JSON document");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInput;
  }

  try {
    if (analyze->parsed()) return do_analyze(analyze, spec_opts, spec_path, out);
    if (design->parsed()) return do_design(design, spec_opts, design_opts, out);
    if (sweep->parsed())
      return do_sweep(sweep, spec_opts, design_opts, horizons, jobs, out);
    if (fit->parsed()) return do_fit(csv_path, out);
    if (landscape->parsed())
      return do_landscape(landscape, spec_opts, resolution, hmax, jobs, out);
    if (verify->parsed()) return do_verify(verify, spec_opts, cert_path, spec_path);
    return kExitInput;
  } catch (const designers::UnsupportedSpecError& e) {
    std::fprintf(stderr, "unsupported: %s\n", e.what());
    return kExitUnsupported;
  } catch (const designers::SolverFailureError& e) {
    std::fprintf(stderr, "solver failure: %s\n", e.what());
    return kExitSolver;
  } catch (const json::exception& e) {
    std::fprintf(stderr, "bad input: %s\n", e.what());
    return kExitInput;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "bad input: %s\n", e.what());
    return kExitInput;
  } catch (const std::runtime_error& e) {
    std::string what = e.what();
    std::fprintf(stderr, "error: %s\n", what.c_str());
    if (what.find("infeasible") != std::string::npos ||
        what.find("unbounded") != std::string::npos)
      return kExitInfeasible;
    return kExitSolver;
  }
}
