#pragma once

#include <random>
#include <string>

#include "qcbf/qcbf.hpp"

namespace fixtures {

using namespace qcbf;

inline std::string problem_path(const std::string& name) { return std::string(QCBF_PROBLEMS_DIR) + "/" + name; }

inline ProblemSpec load(const std::string& name) { return load_problem(problem_path(name)); }

inline Polynomial x(int n, int k) { return Polynomial::variable(n, k); }
inline Polynomial k(int n, double v) { return Polynomial::constant(n, v); }

inline Matrix mat(int rows, int cols, std::initializer_list<double> v) {
  Matrix m(rows, cols);
  auto it = v.begin();
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) m(i, j) = *it++;
  }
  return m;
}

inline Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double e : v) out(i++) = e;
  return out;
}

/// Double integrator with the slab |x1| < 1 unsafe.
inline ProblemSpec example1() {
  ProblemSpec s;
  s.system = LinearSystem(mat(2, 2, {0, 1, 0, 0}), mat(2, 1, {0, 1}));
  s.partition = {1, 1};
  GlobalUnion g;
  g.pieces = {x(2, 0) * x(2, 0) - k(2, 1)};
  s.safe_set = g;
  s.center = Vector::Zero(2);
  return s;
}

/// xdot = u in R^n, small ball initial set, box safe set.
inline ProblemSpec integrator_box(int n) {
  ProblemSpec s;
  s.system = LinearSystem(Matrix::Zero(n, n), Matrix::Identity(n, n));
  s.partition = {n, 0};
  s.mode = DesignMode::kLocal;
  LocalHalfspaces l;
  for (int i = 0; i < n; ++i) {
    Vector e = Vector::Zero(n);
    e(i) = 1.0;
    l.rows.push_back({e, 1.0});
    l.rows.push_back({-e, 1.0});
  }
  s.safe_set = l;
  Polynomial ball = k(n, 0.01);
  for (int i = 0; i < n; ++i) ball = ball - x(n, i) * x(n, i);
  s.initial_set = InitialSetSpec{{ball}};
  s.center = Vector::Zero(n);
  return s;
}

inline Polynomial random_poly(std::mt19937_64& rng, int n, int deg, double density = 1.0) {
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Polynomial p(n);
  const MonomialBasis basis(n, deg);
  for (const auto& m : basis.monomials()) {
    if (unit(rng) <= density) p.add_term(m, coef(rng));
  }
  return p;
}

inline double coeff_error(const Polynomial& a, const Polynomial& b) {
  const Polynomial diff = a - b;
  double e = 0.0;
  for (const auto& [m, c] : diff.terms()) e = std::max(e, std::abs(c));
  return e;
}

}  // namespace fixtures
