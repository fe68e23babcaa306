#pragma once

#include <map>
#include <vector>

#include "qcbf/error.hpp"
#include "qcbf/layout.hpp"
#include "qcbf/linalg.hpp"
#include "qcbf/monomial_basis.hpp"
#include "qcbf/polynomial.hpp"

namespace qcbf {

/// constant + sum_k coeff_k * w_k over flat decision indices.
class AffineExpr {
 public:
  AffineExpr(double constant = 0.0) : constant_(constant) {}  // NOLINT(implicit)

  static AffineExpr var(int index, double coeff = 1.0) {
    AffineExpr e;
    e.add(index, coeff);
    return e;
  }

  double constant() const { return constant_; }
  const std::map<int, double>& terms() const { return terms_; }
  bool is_constant() const { return terms_.empty(); }

  void add(int index, double coeff) {
    if (coeff == 0.0) return;
    auto [it, inserted] = terms_.try_emplace(index, coeff);
    if (!inserted) {
      it->second += coeff;
      if (it->second == 0.0) terms_.erase(it);
    }
  }

  double evaluate(const Vector& w) const {
    double v = constant_;
    for (const auto& [k, c] : terms_) v += c * w(k);
    return v;
  }

  AffineExpr& operator+=(const AffineExpr& o) {
    constant_ += o.constant_;
    for (const auto& [k, c] : o.terms_) add(k, c);
    return *this;
  }
  AffineExpr& operator-=(const AffineExpr& o) { return *this += (-1.0) * o; }

  friend AffineExpr operator+(AffineExpr a, const AffineExpr& b) { return a += b; }
  friend AffineExpr operator-(AffineExpr a, const AffineExpr& b) { return a -= b; }
  friend AffineExpr operator-(const AffineExpr& a) { return (-1.0) * a; }
  friend AffineExpr operator*(double s, const AffineExpr& a) {
    AffineExpr out(s * a.constant_);
    if (s == 0.0) return out;
    for (const auto& [k, c] : a.terms_) out.terms_.emplace(k, s * c);
    return out;
  }

  bool is_zero() const { return constant_ == 0.0 && terms_.empty(); }

 private:
  double constant_;
  std::map<int, double> terms_;
};

/// Dense matrix of affine expressions; sizes here stay small.
class AffineMatrix {
 public:
  AffineMatrix() = default;
  AffineMatrix(int rows, int cols) : rows_(rows), cols_(cols), data_(rows * cols) {}

  static AffineMatrix constant(const Matrix& m) {
    AffineMatrix out(static_cast<int>(m.rows()), static_cast<int>(m.cols()));
    for (int i = 0; i < out.rows_; ++i) {
      for (int j = 0; j < out.cols_; ++j) out(i, j) = AffineExpr(m(i, j));
    }
    return out;
  }

  static AffineMatrix variable(const VarRef& v) {
    AffineMatrix out(v.rows, v.cols);
    for (int i = 0; i < v.rows; ++i) {
      for (int j = 0; j < v.cols; ++j) out(i, j) = AffineExpr::var(v.index(i, j));
    }
    return out;
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  AffineExpr& operator()(int i, int j) { return data_[i * cols_ + j]; }
  const AffineExpr& operator()(int i, int j) const { return data_[i * cols_ + j]; }

  AffineMatrix transpose() const {
    AffineMatrix out(cols_, rows_);
    for (int i = 0; i < rows_; ++i) {
      for (int j = 0; j < cols_; ++j) out(j, i) = (*this)(i, j);
    }
    return out;
  }

  Matrix evaluate(const Vector& w) const {
    Matrix out(rows_, cols_);
    for (int i = 0; i < rows_; ++i) {
      for (int j = 0; j < cols_; ++j) out(i, j) = (*this)(i, j).evaluate(w);
    }
    return out;
  }

  void set_block(int r0, int c0, const AffineMatrix& b) {
    require_dims(r0 + b.rows_ <= rows_ && c0 + b.cols_ <= cols_, "block does not fit");
    for (int i = 0; i < b.rows_; ++i) {
      for (int j = 0; j < b.cols_; ++j) (*this)(r0 + i, c0 + j) = b(i, j);
    }
  }

  friend AffineMatrix operator+(const AffineMatrix& a, const AffineMatrix& b) {
    require_dims(a.rows_ == b.rows_ && a.cols_ == b.cols_, "affine matrix sum shape mismatch");
    AffineMatrix out = a;
    for (std::size_t k = 0; k < out.data_.size(); ++k) out.data_[k] += b.data_[k];
    return out;
  }
  friend AffineMatrix operator-(const AffineMatrix& a, const AffineMatrix& b) { return a + (-1.0) * b; }

  friend AffineMatrix operator*(double s, const AffineMatrix& a) {
    AffineMatrix out(a.rows_, a.cols_);
    for (std::size_t k = 0; k < a.data_.size(); ++k) out.data_[k] = s * a.data_[k];
    return out;
  }

  friend AffineMatrix operator*(const Matrix& m, const AffineMatrix& a) {
    require_dims(m.cols() == a.rows_, "product shape mismatch");
    AffineMatrix out(static_cast<int>(m.rows()), a.cols_);
    for (int i = 0; i < out.rows_; ++i) {
      for (int j = 0; j < out.cols_; ++j) {
        AffineExpr e;
        for (int k = 0; k < a.rows_; ++k) {
          if (m(i, k) != 0.0) e += m(i, k) * a(k, j);
        }
        out(i, j) = e;
      }
    }
    return out;
  }

  friend AffineMatrix operator*(const AffineMatrix& a, const Matrix& m) {
    return (m.transpose() * a.transpose()).transpose();
  }

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<AffineExpr> data_;
};

/// Polynomial whose coefficients are affine in the decision variables.
class AffinePoly {
 public:
  using TermMap = std::map<Monomial, AffineExpr, GradedLex>;

  explicit AffinePoly(int num_vars = 0) : num_vars_(num_vars) {}

  static AffinePoly from(const Polynomial& p) {
    AffinePoly out(p.num_vars());
    for (const auto& [m, c] : p.terms()) out.add_term(m, AffineExpr(c));
    return out;
  }

  /// z' Q z for a symmetric decision variable Q over a basis.
  static AffinePoly gram(const VarRef& q, const MonomialBasis& basis) {
    AffinePoly out(basis.num_vars());
    for (int i = 0; i < basis.size(); ++i) {
      for (int j = i; j < basis.size(); ++j) {
        out.add_term(monomial_product(basis[i], basis[j]),
                     AffineExpr::var(q.index(i, j), i == j ? 1.0 : 2.0));
      }
    }
    return out;
  }

  int num_vars() const { return num_vars_; }
  const TermMap& terms() const { return terms_; }

  void add_term(const Monomial& m, const AffineExpr& e) {
    require_dims(static_cast<int>(m.size()) == num_vars_, "monomial arity mismatch");
    if (e.is_zero()) return;
    auto [it, inserted] = terms_.try_emplace(m, e);
    if (!inserted) {
      it->second += e;
      if (it->second.is_zero()) terms_.erase(it);
    }
  }

  AffineExpr coefficient(const Monomial& m) const {
    auto it = terms_.find(m);
    return it == terms_.end() ? AffineExpr() : it->second;
  }

  int degree() const {
    int d = 0;
    for (const auto& [m, e] : terms_) d = std::max(d, total_degree(m));
    return d;
  }

  Polynomial evaluate(const Vector& w) const {
    Polynomial p(num_vars_);
    for (const auto& [m, e] : terms_) p.add_term(m, e.evaluate(w));
    return p;
  }

  friend AffinePoly operator+(const AffinePoly& a, const AffinePoly& b) {
    require_dims(a.num_vars_ == b.num_vars_, "affine polynomial arity mismatch");
    AffinePoly out = a;
    for (const auto& [m, e] : b.terms_) out.add_term(m, e);
    return out;
  }
  friend AffinePoly operator-(const AffinePoly& a, const AffinePoly& b) { return a + (-1.0) * b; }

  friend AffinePoly operator*(double s, const AffinePoly& a) {
    AffinePoly out(a.num_vars_);
    for (const auto& [m, e] : a.terms_) out.add_term(m, s * e);
    return out;
  }

  friend AffinePoly operator*(const Polynomial& p, const AffinePoly& a) {
    require_dims(p.num_vars() == a.num_vars_, "affine polynomial arity mismatch");
    AffinePoly out(a.num_vars_);
    for (const auto& [mp, cp] : p.terms()) {
      for (const auto& [ma, ea] : a.terms_) out.add_term(monomial_product(mp, ma), cp * ea);
    }
    return out;
  }

 private:
  int num_vars_;
  TermMap terms_;
};

}  // namespace qcbf
