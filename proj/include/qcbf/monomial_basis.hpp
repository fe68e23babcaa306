#pragma once

#include <map>
#include <utility>
#include <vector>

#include "qcbf/error.hpp"
#include "qcbf/polynomial.hpp"

namespace qcbf {

/// All monomials of total degree <= max_degree, in graded-lex order.
class MonomialBasis {
 public:
  MonomialBasis() = default;

  MonomialBasis(int num_vars, int max_degree) : num_vars_(num_vars), max_degree_(max_degree) {
    if (num_vars < 0 || max_degree < 0) {
      throw Error(ErrorCode::kDimensionMismatch, "basis needs nonnegative variable count and degree");
    }
    for (int deg = 0; deg <= max_degree; ++deg) {
      Monomial m(num_vars, 0);
      append_degree(m, 0, deg);
    }
  }

  int num_vars() const { return num_vars_; }
  int max_degree() const { return max_degree_; }
  int size() const { return static_cast<int>(monomials_.size()); }
  const Monomial& operator[](int i) const { return monomials_[i]; }
  const std::vector<Monomial>& monomials() const { return monomials_; }

  /// Evaluates z(x).
  Vector evaluate(const Vector& x) const {
    Vector z(size());
    for (int i = 0; i < size(); ++i) {
      z(i) = monomial_value(monomials_[i], std::span<const double>(x.data(), x.size()));
    }
    return z;
  }

 private:
  // Fills exponents from position k on so that the remaining degree is used;
  // earlier variables take larger powers first, which is graded-lex order.
  void append_degree(Monomial& m, int k, int remaining) {
    if (k == num_vars_ - 1 || num_vars_ == 0) {
      if (num_vars_ == 0) {
        if (remaining == 0) monomials_.push_back(m);
        return;
      }
      m[k] = remaining;
      monomials_.push_back(m);
      m[k] = 0;
      return;
    }
    for (int p = remaining; p >= 0; --p) {
      m[k] = p;
      append_degree(m, k + 1, remaining - p);
    }
    m[k] = 0;
  }

  int num_vars_ = 0;
  int max_degree_ = 0;
  std::vector<Monomial> monomials_;
};

inline MonomialBasis build_basis(int num_vars, int max_degree) {
  if (num_vars < 1) throw Error(ErrorCode::kDimensionMismatch, "basis needs at least one variable");
  return MonomialBasis(num_vars, max_degree);
}

/// For each product monomial, the index pairs (i <= j) with z_i z_j equal to it.
struct GramParameterization {
  MonomialBasis basis;
  std::map<Monomial, std::vector<std::pair<int, int>>, GradedLex> coefficient_map;

  explicit GramParameterization(MonomialBasis b) : basis(std::move(b)) {
    for (int i = 0; i < basis.size(); ++i) {
      for (int j = i; j < basis.size(); ++j) {
        coefficient_map[monomial_product(basis[i], basis[j])].emplace_back(i, j);
      }
    }
  }

  int gram_dim() const { return basis.size(); }
};

}  // namespace qcbf
