#pragma once

#include <string>

#include "qcbf/cbf.hpp"
#include "qcbf/conic.hpp"
#include "qcbf/error.hpp"
#include "qcbf/ipm.hpp"
#include "qcbf/model.hpp"
#include "qcbf/programs.hpp"
#include "qcbf/result.hpp"
#include "qcbf/verify.hpp"

namespace qcbf {

/// Largest ball inside the halfspace intersection, restricted to centers
/// with A c in range(B). Refuses when the maximizer is not pinned down.
inline Vector chebyshev_center(const ProblemSpec& spec, const SolverBackend& backend) {
  const auto* safe = std::get_if<LocalHalfspaces>(&spec.safe_set);
  if (safe == nullptr || safe->rows.empty()) {
    throw Error(ErrorCode::kSpecInvalid, "a default center needs halfspace rows; supply [center]");
  }
  const int n = spec.system.n();
  constexpr double kBound = 1e4;
  ConicProblem p;
  p.entry_bound = kBound;
  const VarRef c = p.layout.add_dense("c", n, 1);
  const VarRef r = p.layout.add_scalar("r");
  const AffineExpr re = AffineExpr::var(r.index(0));
  p.objective = -1.0 * re;
  for (std::size_t i = 0; i < safe->rows.size(); ++i) {
    const auto& h = safe->rows[i];
    AffineExpr e(h.offset);
    for (int k = 0; k < n; ++k) e.add(c.index(k, 0), h.a(k));
    p.add_inequality("row " + std::to_string(i + 1), e - h.a.norm() * re);
  }
  // (I - B B^+) A c = 0
  const Matrix& b = spec.system.B();
  const Matrix proj = Matrix::Identity(n, n) - b * b.completeOrthogonalDecomposition().pseudoInverse();
  const Matrix rows = proj * spec.system.A();
  for (int i = 0; i < n; ++i) {
    if (rows.row(i).norm() <= 1e-12) continue;
    AffineExpr e;
    for (int k = 0; k < n; ++k) e.add(c.index(k, 0), rows(i, k));
    p.add_equality("equilibrium " + std::to_string(i + 1), std::move(e));
  }
  const Solution sol = solve(p, backend, spec.options.solver);
  if (!sol.optimal()) {
    throw Error(ErrorCode::kSpecInvalid, "no default center: " + std::string(to_string(sol.status)) + "; supply [center]");
  }
  const Vector center = p.layout.value(c, sol.values).col(0);
  const double radius = sol.values(r.index(0));
  if (!(radius > 0.0) || center.cwiseAbs().maxCoeff() > 0.5 * kBound) {
    throw Error(ErrorCode::kSpecInvalid, "safe set has no unique bounded center; supply [center]");
  }
  return center;
}

/// Validate, build, solve, recover K and audit the result.
inline SynthesisResult synthesize(const ProblemSpec& spec, const SolverBackend& backend,
                                  const Tolerances& tol = {}) {
  const ValidationReport vr = validate_spec(spec);
  if (!vr.ok()) {
    std::string msg = "invalid problem:";
    for (const auto& e : vr.errors) msg += " " + e + ";";
    throw Error(ErrorCode::kSpecInvalid, msg);
  }
  SynthesisResult res;
  res.spec = spec;
  res.warnings = vr.warnings;
  const Vector c = spec.center ? *spec.center : chebyshev_center(spec, backend);
  res.spec.center = c;
  res.center = prepare_center(spec.system, c, spec.options.rank_tol);

  const BuiltProgram bp = build_program(res.spec, res.center);
  const Solution sol = solve(bp.problem, backend, spec.options.solver);
  res.status = sol.status;
  res.objective = sol.objective;
  res.iterations = sol.iterations;
  res.backend = sol.backend;
  res.message = sol.message;
  if (sol.status == SolveStatus::kInfeasible) {
    throw Error(ErrorCode::kInfeasible, "program is infeasible: " + sol.message);
  }
  if (!sol.optimal()) {
    throw Error(ErrorCode::kNumericalFailure, "solver returned " + std::string(to_string(sol.status)) + ": " + sol.message);
  }

  const auto& layout = bp.problem.layout;
  const Matrix omega = symmetrize(bp.omega_value(sol.values));
  res.y = layout.value(bp.y, sol.values);
  res.r = symmetrize(layout.value(bp.r, sol.values));
  for (const auto& mu : bp.mu) res.mu.push_back(sol.values(mu.index(0)));
  if (bp.sos) {
    for (const auto& g : bp.sos->multipliers) {
      res.grams.push_back({g.q.name, g.basis.num_vars(), g.basis.max_degree(), layout.value(g.q, sol.values)});
    }
    const auto& g = bp.sos->master;
    res.grams.push_back({g.q.name, g.basis.num_vars(), g.basis.max_degree(), layout.value(g.q, sol.values)});
  }
  res.containment = bp.containment;
  res.input_bound = bp.input_bound;
  res.mu_mode = bp.mu_mode;
  const Orientation orient =
      spec.mode == DesignMode::kGlobal ? Orientation::kSuperLevelSafe : Orientation::kSubLevelSafe;
  res.cbf = CbfFunction(c, omega, orient);
  res.controller = recover_controller(omega, res.y, c, res.center.d);
  Tolerances t = tol;
  t.seed = spec.options.seed;
  t.sample_count = spec.options.sample_count;
  res.report = check_certificate(res, t);
  return res;
}

}  // namespace qcbf
