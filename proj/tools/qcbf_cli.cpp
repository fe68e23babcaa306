// qcbf command-line front end.
//
// Exit codes:
//   0  success
//   1  parse, usage, I/O or invalid-problem error
//   2  program infeasible (including an exhausted input budget)
//   3  certificate failed verification, or the solver could not certify
//   4  simulation diverged

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "qcbf/qcbf.hpp"

namespace {

enum Exit { kOk = 0, kUsage = 1, kInfeasible = 2, kVerifyFailed = 3, kOverflow = 4 };

int exit_for(const qcbf::Error& e) {
  using qcbf::ErrorCode;
  switch (e.code()) {
    case ErrorCode::kInfeasible:
    case ErrorCode::kBudgetExhausted:
      return kInfeasible;
    case ErrorCode::kNumericalFailure:
    case ErrorCode::kIllConditioned:
    case ErrorCode::kNotPsd:
    case ErrorCode::kOrientationUnsupported:
      return kVerifyFailed;
    default:
      return kUsage;
  }
}

std::string num(double v) { return qcbf::parse_detail::num(v); }

qcbf::Vector parse_vec(const std::string& text) {
  return qcbf::parse_detail::to_vector(qcbf::parse_detail::parse_vector(text, 0));
}

struct SynthArgs {
  std::string problem;
  std::string out;
  bool published_tol = false;
  bool verbose = false;
};

int cmd_synth(const SynthArgs& a) {
  qcbf::ProblemSpec spec = qcbf::load_problem(a.problem);
  spec.options.solver.verbose = a.verbose;
  qcbf::InteriorPointBackend backend;
  qcbf::Tolerances tol;
  if (a.published_tol) tol = tol.for_published();
  const qcbf::SynthesisResult res = qcbf::synthesize(spec, backend, tol);
  for (const auto& w : res.warnings) std::cerr << "warning: " << w << "\n";
  std::cout << "status " << qcbf::to_string(res.status) << " after " << res.iterations << " iterations ("
            << res.message << ")\n";
  std::cout << (spec.mode == qcbf::DesignMode::kGlobal ? "Tr(Omega_bar) " : "Tr(Omega) ") << num(res.objective)
            << "\n";
  std::cout << "K =\n" << res.controller.k << "\n";
  std::cout << qcbf::format_report(res.report);
  if (!a.out.empty()) qcbf::save_result(a.out, res);
  return res.report.passed() ? kOk : kVerifyFailed;
}

int cmd_verify(const std::string& path, bool published_tol, int samples) {
  const qcbf::SynthesisResult res = qcbf::load_result(path);
  qcbf::Tolerances tol;
  if (published_tol) tol = tol.for_published();
  tol.seed = res.spec.options.seed;
  tol.sample_count = samples > 0 ? samples : res.spec.options.sample_count;
  const qcbf::CertificateReport rep = qcbf::check_certificate(res, tol);
  std::cout << qcbf::format_report(rep);
  return rep.passed() ? kOk : kVerifyFailed;
}

struct SimArgs {
  std::string result;
  std::string x0;
  double horizon = 1.0;
  double dt = 1e-3;
  std::string out;
};

int cmd_simulate(const SimArgs& a) {
  const qcbf::SynthesisResult res = qcbf::load_result(a.result);
  const qcbf::Vector x0 = parse_vec(a.x0);
  if (x0.size() != res.spec.system.n()) {
    throw qcbf::Error(qcbf::ErrorCode::kDimensionMismatch,
                      "x0 needs " + std::to_string(res.spec.system.n()) + " entries");
  }
  qcbf::SimulationOptions opt;
  opt.horizon = a.horizon;
  opt.dt = a.dt;
  const qcbf::Trajectory tr = qcbf::simulate_closed_loop(res.spec.system, res.controller, x0, res.cbf, opt);
  if (!a.out.empty()) {
    std::ofstream os(a.out);
    if (!os) throw qcbf::Error(qcbf::ErrorCode::kIo, "cannot write " + a.out);
    os << "t";
    for (int i = 0; i < res.spec.system.n(); ++i) os << ",x" << i + 1;
    os << ",b";
    for (int i = 0; i < res.spec.system.m(); ++i) os << ",u" << i + 1;
    os << "\n";
    for (std::size_t k = 0; k < tr.t.size(); ++k) {
      os << num(tr.t[k]);
      for (Eigen::Index i = 0; i < tr.x[k].size(); ++i) os << "," << num(tr.x[k](i));
      os << "," << num(tr.b[k]);
      for (Eigen::Index i = 0; i < tr.u[k].size(); ++i) os << "," << num(tr.u[k](i));
      os << "\n";
    }
  }
  if (tr.diverged) {
    std::cout << "diverged: state norm exceeded " << num(opt.divergence_threshold) << " at t = " << num(tr.blowup_time)
              << "\n";
    return kOverflow;
  }
  const bool global = res.cbf.orientation() == qcbf::Orientation::kSuperLevelSafe;
  std::cout << (global ? "min_t b " : "max_t b ") << num(tr.barrier_extremum) << "\n";
  if (tr.first_violation) std::cout << "barrier sign violated first at t = " << num(*tr.first_violation) << "\n";
  std::cout << "x(T) =";
  for (Eigen::Index i = 0; i < tr.final_state.size(); ++i) std::cout << " " << num(tr.final_state(i));
  std::cout << "\nmatrix exponential endpoint gap " << num(tr.endpoint_error) << "\n";
  return kOk;
}

struct ScanArgs {
  std::string mode;
  std::string input;
  std::string out;
  int nx = 101;
  int ny = 101;
  std::vector<double> xr{-1.0, 1.0};
  std::vector<double> yr{-1.0, 1.0};
  std::vector<int> axes{1, 2};
  std::vector<std::string> fix;
  double alpha = 10.0;
  double cap = 100.0;
};

void write_grid(const std::string& path, const std::vector<qcbf::GridPoint>& grid) {
  std::ofstream file;
  if (!path.empty()) {
    file.open(path);
    if (!file) throw qcbf::Error(qcbf::ErrorCode::kIo, "cannot write " + path);
  }
  std::ostream& os = path.empty() ? std::cout : file;
  os << "x1,x2,value\n";
  for (const auto& g : grid) os << num(g.x1) << "," << num(g.x2) << "," << num(g.value) << "\n";
}

int cmd_scan(const ScanArgs& a) {
  if (a.nx < 1 || a.ny < 1) throw qcbf::Error(qcbf::ErrorCode::kSpecInvalid, "grid needs nx, ny >= 1");
  if (a.mode == "pathology") {
    qcbf::LinearSystem sys;
    qcbf::Polynomial s;
    if (a.input.empty()) {
      qcbf::Matrix am(2, 2);
      am << -1, -1, 0, -1;
      qcbf::Matrix bm(2, 1);
      bm << 1, 1;
      sys = qcbf::LinearSystem(am, bm);
      s = qcbf::parse_polynomial("x1^2 + x2^2 - 1", 2);
    } else {
      const qcbf::ProblemSpec spec = qcbf::load_problem(a.input);
      const auto* g = std::get_if<qcbf::GlobalUnion>(&spec.safe_set);
      if (g == nullptr || g->pieces.empty()) {
        throw qcbf::Error(qcbf::ErrorCode::kSpecInvalid, "pathology scan needs a polynomial safe set");
      }
      sys = spec.system;
      s = g->pieces.front();
    }
    write_grid(a.out, qcbf::pathology_scan(s, a.alpha, sys, a.nx, a.ny, a.xr[0], a.xr[1], a.cap));
    return kOk;
  }
  if (a.mode != "levelset") throw qcbf::Error(qcbf::ErrorCode::kSpecInvalid, "scan mode is pathology or levelset");
  if (a.input.empty()) throw qcbf::Error(qcbf::ErrorCode::kSpecInvalid, "levelset scan needs a result file");
  const qcbf::SynthesisResult res = qcbf::load_result(a.input);
  const int n = res.spec.system.n();
  if (a.axes.size() != 2 || a.axes[0] == a.axes[1] || a.axes[0] < 1 || a.axes[1] < 1 || a.axes[0] > n ||
      a.axes[1] > n) {
    throw qcbf::Error(qcbf::ErrorCode::kSpecInvalid, "--axes needs two distinct coordinates in 1.." + std::to_string(n));
  }
  std::map<int, double> fixed;
  for (const auto& f : a.fix) {
    const auto eq = f.find('=');
    if (eq == std::string::npos) throw qcbf::Error(qcbf::ErrorCode::kSpecInvalid, "--fix takes k=value");
    std::string idx = qcbf::parse_detail::trim(f.substr(0, eq));
    if (!idx.empty() && idx[0] == 'x') idx.erase(0, 1);
    const long k = qcbf::parse_detail::parse_int(idx, 0);
    if (k < 1 || k > n || k == a.axes[0] || k == a.axes[1] || fixed.count(static_cast<int>(k))) {
      throw qcbf::Error(qcbf::ErrorCode::kSpecInvalid, "bad fixed coordinate '" + f + "'");
    }
    fixed[static_cast<int>(k)] = qcbf::parse_detail::parse_number(qcbf::parse_detail::trim(f.substr(eq + 1)), 0);
  }
  if (static_cast<int>(fixed.size()) != n - 2) {
    throw qcbf::Error(qcbf::ErrorCode::kSpecInvalid, "fix every coordinate except the two axes");
  }
  qcbf::Vector x(n);
  for (const auto& [k, v] : fixed) x(k - 1) = v;
  std::vector<qcbf::GridPoint> grid;
  auto coord = [](const std::vector<double>& r, int i, int count) {
    return count == 1 ? 0.5 * (r[0] + r[1]) : r[0] + (r[1] - r[0]) * i / (count - 1);
  };
  for (int j = 0; j < a.ny; ++j) {
    for (int i = 0; i < a.nx; ++i) {
      x(a.axes[0] - 1) = coord(a.xr, i, a.nx);
      x(a.axes[1] - 1) = coord(a.yr, j, a.ny);
      grid.push_back({x(a.axes[0] - 1), x(a.axes[1] - 1), res.cbf.value(x)});
    }
  }
  write_grid(a.out, grid);
  return kOk;
}

int cmd_compile(const std::string& problem, const std::string& out) {
  const qcbf::ProblemSpec spec = qcbf::load_problem(problem);
  const qcbf::ValidationReport vr = qcbf::validate_spec(spec);
  if (!vr.ok()) throw qcbf::Error(qcbf::ErrorCode::kSpecInvalid, vr.errors.front());
  const qcbf::CenterData center = qcbf::prepare_center(spec.system, *spec.center, spec.options.rank_tol);
  const qcbf::BuiltProgram bp = qcbf::build_program(spec, center);
  const qcbf::StandardForm sf = qcbf::to_standard_form(bp.problem);
  if (out.empty()) {
    qcbf::write_standard_form(std::cout, sf);
  } else {
    std::ofstream os(out);
    if (!os) throw qcbf::Error(qcbf::ErrorCode::kIo, "cannot write " + out);
    qcbf::write_standard_form(os, sf);
  }
  std::cerr << bp.problem.layout.size() << " decision variables, " << sf.num_rows() << " cone rows\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quadratic control barrier function synthesis and verification"};
  app.require_subcommand(1);

  SynthArgs synth;
  auto* s = app.add_subcommand("synth", "Synthesize a certificate from a problem file");
  s->add_option("problem", synth.problem, "Problem file")->required();
  s->add_option("-o,--out", synth.out, "Result file to write");
  s->add_flag("--published-tol", synth.published_tol, "Audit with the relaxed published-certificate tolerance");
  s->add_flag("-v,--verbose", synth.verbose, "Print solver iterations");

  std::string verify_path;
  bool verify_published = false;
  int verify_samples = 0;
  auto* v = app.add_subcommand("verify", "Re-audit a result file");
  v->add_option("result", verify_path, "Result file")->required();
  v->add_flag("--published-tol", verify_published, "Use the relaxed published-certificate tolerance");
  v->add_option("--samples", verify_samples, "Sample count override");

  SimArgs sim;
  auto* m = app.add_subcommand("simulate", "Simulate the closed loop of a result");
  m->add_option("result", sim.result, "Result file")->required();
  m->add_option("--x0", sim.x0, "Initial state, space separated")->required();
  m->add_option("-T,--horizon", sim.horizon, "Final time")->check(CLI::NonNegativeNumber);
  m->add_option("--dt", sim.dt, "Step size")->check(CLI::PositiveNumber);
  m->add_option("-o,--out", sim.out, "CSV output");

  ScanArgs scan;
  auto* g = app.add_subcommand("scan", "Write a 2-D grid of controller norms or barrier values");
  g->add_option("mode", scan.mode, "pathology or levelset")->required();
  g->add_option("input", scan.input, "Problem file (pathology) or result file (levelset)");
  g->add_option("-o,--out", scan.out, "CSV output (stdout if omitted)");
  g->add_option("--nx", scan.nx, "Grid points along the first axis");
  g->add_option("--ny", scan.ny, "Grid points along the second axis");
  g->add_option("--x-range", scan.xr, "Range of the first axis (both axes for pathology)")->expected(2);
  g->add_option("--y-range", scan.yr, "Range of the second axis")->expected(2);
  g->add_option("--axes", scan.axes, "The two free coordinates, 1-based")->expected(2);
  g->add_option("--fix", scan.fix, "Fixed coordinate as k=value, repeatable");
  g->add_option("--alpha", scan.alpha, "Class-K gain of the reference filter");
  g->add_option("--cap", scan.cap, "Plot cap for the reference filter");

  std::string compile_problem;
  std::string compile_out;
  auto* c = app.add_subcommand("compile", "Write the conic standard form of a problem");
  c->add_option("problem", compile_problem, "Problem file")->required();
  c->add_option("-o,--out", compile_out, "Output file (stdout if omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*s) return cmd_synth(synth);
    if (*v) return cmd_verify(verify_path, verify_published, verify_samples);
    if (*m) return cmd_simulate(sim);
    if (*g) return cmd_scan(scan);
    if (*c) return cmd_compile(compile_problem, compile_out);
  } catch (const qcbf::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}
