#pragma once

#include <string>
#include <vector>

#include "qcbf/affine.hpp"
#include "qcbf/conic.hpp"
#include "qcbf/error.hpp"
#include "qcbf/monomial_basis.hpp"
#include "qcbf/polynomial.hpp"

namespace qcbf {

/// A Gram-parameterized SOS polynomial z' Q z with Q a decision variable.
struct GramVariable {
  VarRef q;
  MonomialBasis basis;

  AffinePoly polynomial() const { return AffinePoly::gram(q, basis); }
};

/// Adds Q (PSD) and one equality per monomial so that expr = z' Q z.
inline GramVariable gram_constraints(ConicProblem& problem, const AffinePoly& expr,
                                     const MonomialBasis& basis, const std::string& name) {
  require_dims(expr.num_vars() == basis.num_vars(), "expression and basis use different variables");
  const GramParameterization gp(basis);
  for (const auto& [mono, coeff] : expr.terms()) {
    if (!gp.coefficient_map.count(mono)) {
      throw Error(ErrorCode::kDegreeOverflow,
                  "monomial " + monomial_to_string(mono) + " of " + name + " is outside the basis products");
    }
  }
  GramVariable g{problem.layout.add_symmetric(name, basis.size()), basis};
  problem.add_lmi(name, AffineMatrix::variable(g.q));
  for (const auto& [mono, pairs] : gp.coefficient_map) {
    AffineExpr e = -expr.coefficient(mono);
    for (const auto& [i, j] : pairs) e.add(g.q.index(i, j), i == j ? 1.0 : 2.0);
    problem.add_equality(name + " coeff " + (monomial_to_string(mono).empty() ? "1" : monomial_to_string(mono)),
                         std::move(e));
  }
  return g;
}

struct SProcedure {
  std::vector<GramVariable> multipliers;
  GramVariable master;
};

/// Compiles target + sum_i sigma_i q_i - margin in SOS with fresh SOS
/// multipliers sigma_i of the given (even) degree.
inline SProcedure sprocedure_emptiness(ConicProblem& problem, const AffinePoly& target,
                                       const std::vector<Polynomial>& constraints_ge, int multiplier_degree,
                                       const AffineExpr& margin, const std::string& name) {
  if (multiplier_degree < 0 || multiplier_degree % 2 != 0) {
    throw Error(ErrorCode::kSpecInvalid, "multiplier degree must be even and nonnegative");
  }
  const int nv = target.num_vars();
  SProcedure out;
  AffinePoly total = target;
  int degree = target.degree();
  const MonomialBasis mult_basis(nv, multiplier_degree / 2);
  for (std::size_t i = 0; i < constraints_ge.size(); ++i) {
    require_dims(constraints_ge[i].num_vars() == nv, "constraint polynomial arity mismatch");
    GramVariable sigma{problem.layout.add_symmetric(name + " sigma" + std::to_string(i + 1), mult_basis.size()),
                       mult_basis};
    problem.add_lmi(sigma.q.name, AffineMatrix::variable(sigma.q));
    total = total + constraints_ge[i] * sigma.polynomial();
    degree = std::max(degree, constraints_ge[i].degree() + multiplier_degree);
    out.multipliers.push_back(sigma);
  }
  total.add_term(Monomial(nv, 0), -margin);
  out.master = gram_constraints(problem, total, MonomialBasis(nv, (degree + 1) / 2), name + " gram");
  return out;
}

/// Numeric z' Q z.
inline Polynomial gram_polynomial(const Matrix& q, const MonomialBasis& basis) {
  require_dims(q.rows() == basis.size() && q.cols() == basis.size(), "Gram size mismatch");
  Polynomial p(basis.num_vars());
  for (int i = 0; i < basis.size(); ++i) {
    for (int j = 0; j < basis.size(); ++j) p.add_term(monomial_product(basis[i], basis[j]), q(i, j));
  }
  return p;
}

/// Factorizes a numeric Gram matrix into squares: z'Qz = sum_i p_i^2.
inline std::vector<Polynomial> extract_sos_witness(const Matrix& q, const MonomialBasis& basis, double tol) {
  require_dims(q.rows() == basis.size() && q.cols() == basis.size(), "Gram size mismatch");
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(q));
  const Vector& lam = es.eigenvalues();
  if (lam.size() > 0 && lam.minCoeff() < -tol) {
    throw Error(ErrorCode::kNotPsd, "Gram matrix has eigenvalue " + std::to_string(lam.minCoeff()));
  }
  std::vector<Polynomial> out;
  for (Eigen::Index k = lam.size() - 1; k >= 0; --k) {
    if (lam(k) <= 0.0) continue;
    const double r = std::sqrt(lam(k));
    Polynomial p(basis.num_vars());
    for (int i = 0; i < basis.size(); ++i) p.add_term(basis[i], r * es.eigenvectors()(i, k));
    if (!p.is_zero()) out.push_back(std::move(p));
  }
  return out;
}

}  // namespace qcbf
