#pragma once

#include <cmath>
#include <iomanip>
#include <istream>
#include <map>
#include <memory>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "qcbf/affine.hpp"
#include "qcbf/error.hpp"
#include "qcbf/layout.hpp"
#include "qcbf/linalg.hpp"
#include "qcbf/model.hpp"

namespace qcbf {

enum class Sense { kPsd, kNsd };

/// F(w) = F0 + sum_k w_k F_k, required PSD (or NSD).
struct LMIBlock {
  std::string name;
  Sense sense = Sense::kPsd;
  Matrix constant;
  std::vector<std::pair<int, Matrix>> terms;

  int size() const { return static_cast<int>(constant.rows()); }

  static LMIBlock from(std::string name, const AffineMatrix& f, Sense sense = Sense::kPsd) {
    require_dims(f.rows() == f.cols() && f.rows() > 0, "LMI " + name + " must be square");
    const int n = f.rows();
    LMIBlock out;
    out.name = std::move(name);
    out.sense = sense;
    out.constant = Matrix::Zero(n, n);
    std::map<int, Matrix> by_var;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        out.constant(i, j) = f(i, j).constant();
        for (const auto& [k, c] : f(i, j).terms()) {
          auto [it, inserted] = by_var.try_emplace(k, Matrix::Zero(n, n));
          it->second(i, j) += c;
        }
      }
    }
    auto check_sym = [&](const Matrix& m) {
      const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
      if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
        throw Error(ErrorCode::kSpecInvalid, "LMI " + out.name + " is not symmetric");
      }
    };
    check_sym(out.constant);
    for (auto& [k, m] : by_var) {
      check_sym(m);
      out.terms.emplace_back(k, std::move(m));
    }
    return out;
  }

  /// F(w) as written.
  Matrix evaluate(const Vector& w) const {
    Matrix out = constant;
    for (const auto& [k, m] : terms) out += w(k) * m;
    return out;
  }

  /// Smallest eigenvalue of the PSD-oriented matrix (F or -F).
  double margin(const Vector& w) const {
    const Matrix f = evaluate(w);
    return sense == Sense::kPsd ? min_eigenvalue(f) : -max_eigenvalue(f);
  }
};

struct NamedConstraint {
  std::string name;
  AffineExpr expr;
};

/// Linear objective, LMIs, equalities (expr = 0) and inequalities (expr >= 0).
struct ConicProblem {
  DecisionLayout layout;
  AffineExpr objective;
  std::vector<LMIBlock> lmis;
  std::vector<NamedConstraint> equalities;
  std::vector<NamedConstraint> inequalities;
  /// |w_k| <= entry_bound for every decision entry; 0 disables the box.
  double entry_bound = 0.0;

  void add_lmi(std::string name, const AffineMatrix& f, Sense sense = Sense::kPsd) {
    lmis.push_back(LMIBlock::from(std::move(name), f, sense));
  }
  void add_equality(std::string name, AffineExpr e) { equalities.push_back({std::move(name), std::move(e)}); }
  void add_inequality(std::string name, AffineExpr e) {
    inequalities.push_back({std::move(name), std::move(e)});
  }
};

/// Conic standard form: minimize c'x subject to A x + s = b, s in K, with
/// K = zero^z x nonneg^l x PSD(s_1) x ... PSD blocks use the lower-triangle
/// column-major svec with off-diagonal entries scaled by sqrt(2).
struct StandardForm {
  int num_vars = 0;
  int zero_rows = 0;
  int nonneg_rows = 0;
  std::vector<int> psd_sizes;
  Vector c;
  Vector b;
  struct Triplet {
    int row;
    int col;
    double value;
  };
  std::vector<Triplet> a;
  /// Constant term of the objective; not part of the conic data proper.
  double objective_offset = 0.0;

  int num_rows() const {
    int r = zero_rows + nonneg_rows;
    for (int s : psd_sizes) r += s * (s + 1) / 2;
    return r;
  }

  Matrix dense_a() const {
    Matrix m = Matrix::Zero(num_rows(), num_vars);
    for (const auto& t : a) m(t.row, t.col) += t.value;
    return m;
  }
};

inline int svec_length(int n) { return n * (n + 1) / 2; }

inline Vector svec(const Matrix& m) {
  const int n = static_cast<int>(m.rows());
  Vector out(svec_length(n));
  int k = 0;
  for (int j = 0; j < n; ++j) {
    for (int i = j; i < n; ++i) out(k++) = i == j ? m(i, j) : std::sqrt(2.0) * m(i, j);
  }
  return out;
}

inline Matrix smat(const Vector& v, int n) {
  require_dims(v.size() == svec_length(n), "svec length mismatch");
  Matrix out(n, n);
  int k = 0;
  for (int j = 0; j < n; ++j) {
    for (int i = j; i < n; ++i) {
      const double x = i == j ? v(k) : v(k) / std::sqrt(2.0);
      out(i, j) = x;
      out(j, i) = x;
      ++k;
    }
  }
  return out;
}

inline StandardForm to_standard_form(const ConicProblem& p) {
  StandardForm sf;
  sf.num_vars = p.layout.size();
  sf.c = Vector::Zero(sf.num_vars);
  for (const auto& [k, v] : p.objective.terms()) sf.c(k) = v;
  sf.objective_offset = p.objective.constant();

  std::vector<double> b;
  int row = 0;
  auto linear_row = [&](const AffineExpr& e, double sign) {
    for (const auto& [k, v] : e.terms()) sf.a.push_back({row, k, -sign * v});
    b.push_back(sign * e.constant());
    ++row;
  };
  for (const auto& eq : p.equalities) linear_row(eq.expr, 1.0);
  sf.zero_rows = row;
  for (const auto& in : p.inequalities) linear_row(in.expr, 1.0);
  if (p.entry_bound > 0.0) {
    for (int k = 0; k < sf.num_vars; ++k) {
      sf.a.push_back({row++, k, 1.0});
      b.push_back(p.entry_bound);
      sf.a.push_back({row++, k, -1.0});
      b.push_back(p.entry_bound);
    }
  }
  sf.nonneg_rows = row - sf.zero_rows;
  for (const auto& lmi : p.lmis) {
    const double sign = lmi.sense == Sense::kPsd ? 1.0 : -1.0;
    const int n = lmi.size();
    sf.psd_sizes.push_back(n);
    const Vector b0 = svec(sign * lmi.constant);
    for (int r = 0; r < b0.size(); ++r) b.push_back(b0(r));
    for (const auto& [k, m] : lmi.terms) {
      const Vector col = svec(sign * m);
      for (int r = 0; r < col.size(); ++r) {
        if (col(r) != 0.0) sf.a.push_back({row + r, k, -col(r)});
      }
    }
    row += svec_length(n);
  }
  sf.b = Eigen::Map<Vector>(b.data(), static_cast<Eigen::Index>(b.size()));
  return sf;
}

inline void write_standard_form(std::ostream& os, const StandardForm& sf) {
  os << std::setprecision(17);
  os << "conic-standard-form v1\n";
  os << "variables " << sf.num_vars << "\n";
  os << "constraints " << sf.num_rows() << "\n";
  os << "cones zero " << sf.zero_rows << " nonneg " << sf.nonneg_rows << " psd " << sf.psd_sizes.size();
  for (int s : sf.psd_sizes) os << ' ' << s;
  os << "\nobjective_offset " << sf.objective_offset << "\nc";
  for (Eigen::Index k = 0; k < sf.c.size(); ++k) os << ' ' << sf.c(k);
  os << "\nb";
  for (Eigen::Index k = 0; k < sf.b.size(); ++k) os << ' ' << sf.b(k);
  os << "\nA " << sf.a.size() << "\n";
  for (const auto& t : sf.a) os << t.row << ' ' << t.col << ' ' << t.value << "\n";
}

inline StandardForm read_standard_form(std::istream& is) {
  auto expect = [&](const std::string& word) {
    std::string got;
    if (!(is >> got) || got != word) {
      throw Error(ErrorCode::kParse, "standard form: expected '" + word + "', got '" + got + "'");
    }
  };
  auto read_int = [&]() {
    long long v = 0;
    if (!(is >> v) || v < 0) throw Error(ErrorCode::kParse, "standard form: bad integer");
    return static_cast<int>(v);
  };
  auto read_double = [&]() {
    double v = 0;
    if (!(is >> v)) throw Error(ErrorCode::kParse, "standard form: bad number");
    return v;
  };
  StandardForm sf;
  expect("conic-standard-form");
  expect("v1");
  expect("variables");
  sf.num_vars = read_int();
  expect("constraints");
  const int rows = read_int();
  expect("cones");
  expect("zero");
  sf.zero_rows = read_int();
  expect("nonneg");
  sf.nonneg_rows = read_int();
  expect("psd");
  const int blocks = read_int();
  for (int k = 0; k < blocks; ++k) sf.psd_sizes.push_back(read_int());
  if (sf.num_rows() != rows) throw Error(ErrorCode::kParse, "standard form: cone sizes do not match row count");
  expect("objective_offset");
  sf.objective_offset = read_double();
  expect("c");
  sf.c.resize(sf.num_vars);
  for (int k = 0; k < sf.num_vars; ++k) sf.c(k) = read_double();
  expect("b");
  sf.b.resize(rows);
  for (int k = 0; k < rows; ++k) sf.b(k) = read_double();
  expect("A");
  const int nnz = read_int();
  for (int k = 0; k < nnz; ++k) {
    const int r = read_int();
    const int c = read_int();
    const double v = read_double();
    if (r >= rows || c >= sf.num_vars) throw Error(ErrorCode::kParse, "standard form: triplet out of range");
    sf.a.push_back({r, c, v});
  }
  return sf;
}

enum class SolveStatus { kOptimal, kInfeasible, kUnbounded, kNumericalFailure };

inline std::string_view to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::kOptimal: return "Optimal";
    case SolveStatus::kInfeasible: return "Infeasible";
    case SolveStatus::kUnbounded: return "Unbounded";
    case SolveStatus::kNumericalFailure: return "NumericalFailure";
  }
  return "Unknown";
}

struct BackendResult {
  SolveStatus status = SolveStatus::kNumericalFailure;
  Vector x;
  int iterations = 0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double gap = 0.0;
  std::string message;
};

/// Anything that solves a StandardForm instance.
class SolverBackend {
 public:
  virtual ~SolverBackend() = default;
  virtual std::string name() const = 0;
  virtual bool supports_psd() const { return true; }
  virtual BackendResult solve(const StandardForm& problem, const SolverOptions& options) const = 0;
};

struct Solution {
  SolveStatus status = SolveStatus::kNumericalFailure;
  Vector values;
  double objective = 0.0;
  int iterations = 0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double gap = 0.0;
  std::string backend;
  std::string message;
  /// Per-LMI smallest eigenvalue of the PSD-oriented block, in problem order.
  std::vector<double> lmi_margins;

  bool optimal() const { return status == SolveStatus::kOptimal; }
};

/// Runs a backend and maps its answer back onto the layout. An "Optimal"
/// answer whose LMIs fail the feasibility audit is downgraded.
inline Solution solve(const ConicProblem& problem, const SolverBackend& backend,
                      const SolverOptions& options = {}) {
  if (!backend.supports_psd()) {
    throw Error(ErrorCode::kNumericalFailure, "backend " + backend.name() + " lacks PSD cone support");
  }
  const StandardForm sf = to_standard_form(problem);
  BackendResult r = backend.solve(sf, options);
  Solution sol;
  sol.status = r.status;
  sol.iterations = r.iterations;
  sol.primal_residual = r.primal_residual;
  sol.dual_residual = r.dual_residual;
  sol.gap = r.gap;
  sol.backend = backend.name();
  sol.message = r.message;
  if (r.x.size() != problem.layout.size()) {
    sol.values = Vector::Zero(problem.layout.size());
    if (sol.status == SolveStatus::kOptimal) {
      sol.status = SolveStatus::kNumericalFailure;
      sol.message = "backend returned a solution of the wrong size";
    }
    return sol;
  }
  sol.values = r.x;
  sol.objective = problem.objective.evaluate(sol.values);
  for (const auto& lmi : problem.lmis) sol.lmi_margins.push_back(lmi.margin(sol.values));
  if (sol.status != SolveStatus::kOptimal) return sol;

  const double slack = 10.0 * options.feas_tol;
  for (std::size_t i = 0; i < problem.lmis.size(); ++i) {
    const double scale = std::max(1.0, sym_norm(problem.lmis[i].evaluate(sol.values)));
    if (sol.lmi_margins[i] < -slack * scale) {
      sol.status = SolveStatus::kNumericalFailure;
      sol.message = "LMI " + problem.lmis[i].name + " violated at returned point (min eig " +
                    std::to_string(sol.lmi_margins[i]) + ")";
      return sol;
    }
  }
  for (const auto& eq : problem.equalities) {
    const double scale = 1.0 + std::abs(eq.expr.constant());
    if (std::abs(eq.expr.evaluate(sol.values)) > slack * scale) {
      sol.status = SolveStatus::kNumericalFailure;
      sol.message = "equality " + eq.name + " violated at returned point";
      return sol;
    }
  }
  for (const auto& in : problem.inequalities) {
    const double scale = 1.0 + std::abs(in.expr.constant());
    if (in.expr.evaluate(sol.values) < -slack * scale) {
      sol.status = SolveStatus::kNumericalFailure;
      sol.message = "inequality " + in.name + " violated at returned point";
      return sol;
    }
  }
  return sol;
}

}  // namespace qcbf
