#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "qcbf/affine.hpp"
#include "qcbf/conic.hpp"
#include "qcbf/error.hpp"
#include "qcbf/model.hpp"
#include "qcbf/sos.hpp"

namespace qcbf {

/// A compiled program plus handles to the variables synthesis needs back.
struct BuiltProgram {
  ConicProblem problem;
  DesignMode mode = DesignMode::kGlobal;
  CenterData center;
  int n = 0;
  int n_bar = 0;
  int m = 0;
  // Global mode uses omega_bar / omega_under; local mode uses omega.
  std::optional<VarRef> omega_bar;
  std::optional<VarRef> omega_under;
  std::optional<VarRef> omega;
  VarRef r;
  VarRef y;
  std::vector<VarRef> mu;
  std::optional<SProcedure> sos;
  std::string containment = "none";
  std::string input_bound = "none";
  std::string mu_mode = "none";

  /// Full n x n Omega as an affine matrix (block diagonal in global mode).
  AffineMatrix omega_matrix() const {
    if (omega) return AffineMatrix::variable(*omega);
    AffineMatrix out(n, n);
    out.set_block(0, 0, AffineMatrix::variable(*omega_bar));
    if (omega_under) out.set_block(n_bar, n_bar, AffineMatrix::variable(*omega_under));
    return out;
  }

  /// The Omega block that appears in the R link and the objective.
  AffineMatrix linked_omega() const {
    return omega ? AffineMatrix::variable(*omega) : AffineMatrix::variable(*omega_bar);
  }

  Matrix omega_value(const Vector& w) const { return omega_matrix().evaluate(w); }
};

namespace program_detail {

inline AffineExpr trace(const AffineMatrix& m) {
  AffineExpr t;
  for (int i = 0; i < m.rows(); ++i) t += m(i, i);
  return t;
}

/// Omega A' + Y' B' + A Omega + B Y.
inline AffineMatrix invariance_block(const LinearSystem& sys, const AffineMatrix& omega, const AffineMatrix& y) {
  const AffineMatrix a_omega = sys.A() * omega;
  const AffineMatrix b_y = sys.B() * y;
  return a_omega + a_omega.transpose() + b_y + b_y.transpose();
}

/// [[R, I], [I, Omega]].
inline AffineMatrix schur_link(const AffineMatrix& r, const AffineMatrix& omega) {
  const int k = r.rows();
  AffineMatrix out(2 * k, 2 * k);
  out.set_block(0, 0, r);
  out.set_block(0, k, AffineMatrix::constant(Matrix::Identity(k, k)));
  out.set_block(k, 0, AffineMatrix::constant(Matrix::Identity(k, k)));
  out.set_block(k, k, omega);
  return out;
}

inline AffineMatrix shifted_identity(const AffineMatrix& m, double shift) {
  return m - AffineMatrix::constant(shift * Matrix::Identity(m.rows(), m.cols()));
}

/// 1 - y' R y as a polynomial in centered coordinates y.
inline AffinePoly unit_minus_quadratic(const VarRef& r) {
  const int k = r.rows;
  AffinePoly p = AffinePoly::from(Polynomial::constant(k, 1.0));
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) {
      Monomial mono(k, 0);
      mono[i] += 1;
      mono[j] += 1;
      p.add_term(mono, AffineExpr::var(r.index(i, j), -1.0));
    }
  }
  return p;
}

inline BuiltProgram skeleton(const ProblemSpec& spec, const CenterData& center) {
  BuiltProgram bp;
  bp.mode = spec.mode;
  bp.center = center;
  bp.n = spec.system.n();
  bp.m = spec.system.m();
  bp.n_bar = spec.mode == DesignMode::kGlobal ? spec.partition.n_bar : bp.n;
  bp.problem.entry_bound = spec.options.variable_bound;
  return bp;
}

}  // namespace program_detail

/// Replaces SOS containment with 1 - (v - c_bar)' R (v - c_bar) >= 0 per vertex.
inline void add_vertex_containment(BuiltProgram& bp, const std::vector<Vector>& vertices, const Vector& c_bar) {
  if (vertices.empty()) throw Error(ErrorCode::kEmptyVertexList, "no vertices supplied");
  require_dims(c_bar.size() == bp.r.rows, "vertex center dimension mismatch");
  for (std::size_t k = 0; k < vertices.size(); ++k) {
    require_dims(vertices[k].size() == bp.r.rows, "vertex dimension mismatch");
    const Vector v = vertices[k] - c_bar;
    AffineExpr e(1.0);
    for (int i = 0; i < bp.r.rows; ++i) {
      for (int j = 0; j < bp.r.rows; ++j) e.add(bp.r.index(i, j), -v(i) * v(j));
    }
    bp.problem.add_inequality("vertex " + std::to_string(k + 1), std::move(e));
  }
  bp.containment = "vertices";
}

inline BuiltProgram build_global(const ProblemSpec& spec, const CenterData& center) {
  using namespace program_detail;
  if (spec.mode != DesignMode::kGlobal) throw Error(ErrorCode::kSpecInvalid, "build_global needs global mode");
  const auto& safe = std::get<GlobalUnion>(spec.safe_set);
  BuiltProgram bp = skeleton(spec, center);
  auto& p = bp.problem;
  const int nb = bp.n_bar;
  const int nu = spec.partition.n_under;
  const double delta = spec.options.delta;

  bp.omega_bar = p.layout.add_symmetric("Omega_bar", nb);
  if (nu > 0) bp.omega_under = p.layout.add_symmetric("Omega_under", nu);
  bp.r = p.layout.add_symmetric("R", nb);
  bp.y = p.layout.add_dense("Y", bp.m, bp.n);

  const AffineMatrix ob = AffineMatrix::variable(*bp.omega_bar);
  p.objective = trace(ob);
  p.add_lmi("Omega_bar positive", shifted_identity(ob, delta));
  if (bp.omega_under) {
    p.add_lmi("Omega_under negative", shifted_identity((-1.0) * AffineMatrix::variable(*bp.omega_under), delta));
  }
  p.add_lmi("invariance", invariance_block(spec.system, bp.omega_matrix(), AffineMatrix::variable(bp.y)));
  p.add_lmi("R link", schur_link(AffineMatrix::variable(bp.r), ob));

  const Vector c_bar = center.c.head(nb);
  if (spec.options.containment == ContainmentMethod::kVertices) {
    add_vertex_containment(bp, safe.vertices, c_bar);
    return bp;
  }
  // Containment in centered coordinates y = x_bar - c_bar.
  std::vector<Polynomial> shifted;
  for (const auto& s : safe.pieces) shifted.push_back(s.leading_variables(nb).shifted(c_bar));
  bp.sos = sprocedure_emptiness(p, unit_minus_quadratic(bp.r), shifted, spec.options.multiplier_degree,
                                AffineExpr(spec.options.sos_epsilon), "containment");
  bp.containment = "sos";
  return bp;
}

inline BuiltProgram build_local(const ProblemSpec& spec, const CenterData& center) {
  using namespace program_detail;
  if (spec.mode != DesignMode::kLocal) throw Error(ErrorCode::kSpecInvalid, "build_local needs local mode");
  if (!spec.initial_set || spec.initial_set->pieces.empty()) {
    throw Error(ErrorCode::kSpecInvalid, "initial set required");
  }
  const auto& safe = std::get<LocalHalfspaces>(spec.safe_set);
  BuiltProgram bp = skeleton(spec, center);
  auto& p = bp.problem;
  const int n = bp.n;

  bp.omega = p.layout.add_symmetric("Omega", n);
  bp.r = p.layout.add_symmetric("R", n);
  bp.y = p.layout.add_dense("Y", bp.m, n);
  const AffineMatrix om = AffineMatrix::variable(*bp.omega);
  p.objective = trace(om);
  p.add_lmi("Omega positive", shifted_identity(om, spec.options.delta));
  p.add_lmi("invariance", invariance_block(spec.system, om, AffineMatrix::variable(bp.y)), Sense::kNsd);
  p.add_lmi("R link", schur_link(AffineMatrix::variable(bp.r), om));

  // Initial set inside the sublevel set, in centered coordinates.
  std::vector<Polynomial> negated;
  for (const auto& w : spec.initial_set->pieces) negated.push_back(-w.shifted(center.c));
  bp.sos = sprocedure_emptiness(p, unit_minus_quadratic(bp.r), negated, spec.options.multiplier_degree,
                                AffineExpr(0.0), "initial set");
  bp.containment = "sos";

  const auto normalized = safe.normalized(center.c);
  for (std::size_t i = 0; i < normalized.size(); ++i) {
    const Vector& a = normalized[i];
    AffineExpr e(1.0);
    for (int r = 0; r < n; ++r) {
      for (int c = 0; c < n; ++c) e.add(bp.omega->index(r, c), -a(r) * a(c));
    }
    p.add_inequality("halfspace " + std::to_string(i + 1), std::move(e));
  }
  return bp;
}

namespace program_detail {

inline double budget_or_throw(double budget, const std::string& what) {
  if (!(budget > 0.0)) {
    throw Error(ErrorCode::kBudgetExhausted, what + " leaves no budget (" + std::to_string(budget) + ")");
  }
  return budget;
}

/// Block for rows u_rows = Yrow (k x n) with offset vector dk (k):
/// reduced form [[Omega, Y' dk, Y'], [dk' Y, mu (budget - mu), 0], [Y, 0, mu I]]
/// for fixed mu, or the lifted form with mu a decision scalar.
inline void add_norm_block(BuiltProgram& bp, const std::string& name, const Matrix& rows, const Vector& dk,
                           double budget, MuMode mode, double delta) {
  auto& p = bp.problem;
  const int n = bp.n;
  const int k = static_cast<int>(rows.rows());
  const AffineMatrix yk = rows * AffineMatrix::variable(bp.y);  // k x n
  const AffineMatrix ytd = yk.transpose() * Matrix(dk);
  const int size = n + 1 + k;
  AffineMatrix top(size, size);
  top.set_block(0, 0, bp.omega_matrix());
  top.set_block(0, n, ytd);
  top.set_block(n, 0, ytd.transpose());
  top.set_block(0, n + 1, yk.transpose());
  top.set_block(n + 1, 0, yk);
  if (mode == MuMode::kFixed) {
    const double mu = budget / 2.0;
    top(n, n) = AffineExpr(mu * (budget - mu));
    top.set_block(n + 1, n + 1, AffineMatrix::constant(mu * Matrix::Identity(k, k)));
    p.add_lmi(name, top);
    return;
  }
  const VarRef mu = p.layout.add_scalar(name + " mu");
  bp.mu.push_back(mu);
  const AffineExpr mu_e = AffineExpr::var(mu.index(0));
  top(n, n) = budget * mu_e;
  for (int i = 0; i < k; ++i) top(n + 1 + i, n + 1 + i) = mu_e;
  AffineMatrix lifted(2 * size, 2 * size);
  lifted.set_block(0, 0, top);
  lifted(n, size + n) = mu_e;
  lifted(size + n, n) = mu_e;
  lifted.set_block(size, size, AffineMatrix::constant(Matrix::Identity(size, size)));
  p.add_lmi(name, lifted);
  p.add_inequality(name + " mu lower", mu_e - AffineExpr(delta));
  p.add_inequality(name + " mu upper", AffineExpr(budget - delta) - mu_e);
}

inline std::string mu_tag(MuMode m) { return m == MuMode::kFixed ? "fixed" : "lifted"; }

}  // namespace program_detail

/// ||u||_2^2 <= zeta on the invariant ellipsoid (local mode).
inline void add_input_bound_l2(BuiltProgram& bp, double zeta, double epsilon, const Vector& d,
                               MuMode mode = MuMode::kFixed, double delta = 1e-6) {
  using namespace program_detail;
  require_dims(d.size() == bp.m, "offset d has wrong size");
  const double budget = budget_or_throw(-d.squaredNorm() + zeta - epsilon, "offset d");
  add_norm_block(bp, "input l2", Matrix::Identity(bp.m, bp.m), d, budget, mode, delta);
  bp.input_bound = "l2";
  bp.mu_mode = mu_tag(mode);
}

/// |u_i|^2 <= zeta per coordinate on the invariant ellipsoid (local mode).
inline void add_input_bound_linf(BuiltProgram& bp, double zeta, double epsilon, const Vector& d,
                                 MuMode mode = MuMode::kFixed, double delta = 1e-6) {
  using namespace program_detail;
  require_dims(d.size() == bp.m, "offset d has wrong size");
  const double budget = budget_or_throw(-d.squaredNorm() + zeta - epsilon, "offset d");
  for (int i = 0; i < bp.m; ++i) {
    Matrix row = Matrix::Zero(1, bp.m);
    row(0, i) = 1.0;
    add_norm_block(bp, "input linf " + std::to_string(i + 1), row, d.segment(i, 1), budget, mode, delta);
  }
  bp.input_bound = "linf";
  bp.mu_mode = mu_tag(mode);
}

/// H u <= h on the invariant ellipsoid (local mode).
inline void add_input_bound_polytope(BuiltProgram& bp, const Matrix& h_mat, const Vector& h_vec, double epsilon,
                                     const Vector& d, MuMode mode = MuMode::kFixed, double delta = 1e-6) {
  using namespace program_detail;
  require_dims(h_mat.cols() == bp.m && h_mat.rows() == h_vec.size(), "polytope shape mismatch");
  require_dims(d.size() == bp.m, "offset d has wrong size");
  auto& p = bp.problem;
  const int n = bp.n;
  for (Eigen::Index i = 0; i < h_mat.rows(); ++i) {
    const std::string name = "input polytope " + std::to_string(i + 1);
    const double budget =
        budget_or_throw(-2.0 * h_mat.row(i).dot(d) + 2.0 * h_vec(i) - epsilon, "row " + std::to_string(i + 1));
    const AffineMatrix hy = Matrix(h_mat.row(i)) * AffineMatrix::variable(bp.y);  // 1 x n
    AffineMatrix top(n + 1, n + 1);
    top.set_block(0, 0, bp.omega_matrix());
    top.set_block(0, n, hy.transpose());
    top.set_block(n, 0, hy);
    if (mode == MuMode::kFixed) {
      top(n, n) = AffineExpr(budget * budget / 4.0);
      p.add_lmi(name, top);
      continue;
    }
    const VarRef mu = p.layout.add_scalar(name + " mu");
    bp.mu.push_back(mu);
    const AffineExpr mu_e = AffineExpr::var(mu.index(0));
    top(n, n) = budget * mu_e;
    AffineMatrix lifted(2 * (n + 1), 2 * (n + 1));
    lifted.set_block(0, 0, top);
    lifted(n, n + 1 + n) = mu_e;
    lifted(n + 1 + n, n) = mu_e;
    lifted.set_block(n + 1, n + 1, AffineMatrix::constant(Matrix::Identity(n + 1, n + 1)));
    p.add_lmi(name, lifted);
    p.add_inequality(name + " mu lower", mu_e - AffineExpr(delta));
    p.add_inequality(name + " mu upper", AffineExpr(budget - delta) - mu_e);
  }
  bp.input_bound = "polytope";
  bp.mu_mode = mu_tag(mode);
}

/// Global-mode bound [[(zeta - eps) I, Y], [Y', Omega]] >= 0, which gives
/// sup ||K x_c||^2 <= zeta - eps on the ellipsoid boundary. Needs d = 0 and
/// a full-state safe set.
inline void add_global_input_bound_l2(BuiltProgram& bp, double zeta, double epsilon) {
  using namespace program_detail;
  if (bp.mode != DesignMode::kGlobal) throw Error(ErrorCode::kSpecInvalid, "global input bound needs global mode");
  if (bp.omega_under) throw Error(ErrorCode::kSpecInvalid, "global input bound requires n_under = 0");
  if (bp.center.d.norm() > 1e-9 * std::max(1.0, bp.center.c.norm())) {
    throw Error(ErrorCode::kSpecInvalid, "global input bound requires d = 0");
  }
  const double budget = budget_or_throw(zeta - epsilon, "epsilon");
  const int m = bp.m;
  const int n = bp.n;
  AffineMatrix blk(m + n, m + n);
  blk.set_block(0, 0, AffineMatrix::constant(budget * Matrix::Identity(m, m)));
  const AffineMatrix y = AffineMatrix::variable(bp.y);
  blk.set_block(0, m, y);
  blk.set_block(m, 0, y.transpose());
  blk.set_block(m, m, bp.omega_matrix());
  bp.problem.add_lmi("input l2 global", blk);
  bp.input_bound = "l2-global";
  bp.mu_mode = "none";
}

/// Builds the program a spec asks for, input bound included.
inline BuiltProgram build_program(const ProblemSpec& spec, const CenterData& center) {
  BuiltProgram bp = spec.mode == DesignMode::kGlobal ? build_global(spec, center) : build_local(spec, center);
  const auto& ib = spec.input_bound;
  const double delta = spec.options.delta;
  if (const auto* b = std::get_if<L2Bound>(&ib.bound)) {
    if (spec.mode == DesignMode::kGlobal) {
      add_global_input_bound_l2(bp, b->zeta, ib.epsilon);
    } else {
      add_input_bound_l2(bp, b->zeta, ib.epsilon, center.d, ib.mu_mode, delta);
    }
  } else if (const auto* b = std::get_if<LinfBound>(&ib.bound)) {
    add_input_bound_linf(bp, b->zeta, ib.epsilon, center.d, ib.mu_mode, delta);
  } else if (const auto* b = std::get_if<PolytopeBound>(&ib.bound)) {
    add_input_bound_polytope(bp, b->H, b->h, ib.epsilon, center.d, ib.mu_mode, delta);
  }
  return bp;
}

}  // namespace qcbf
