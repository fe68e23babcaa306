#pragma once

#include <cmath>
#include <cstdint>
#include <iomanip>
#include <map>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "qcbf/error.hpp"
#include "qcbf/linalg.hpp"

namespace qcbf {

/// Exponent tuple of a monomial; entry k is the power of variable k.
using Monomial = std::vector<int>;

inline int total_degree(const Monomial& m) {
  return std::accumulate(m.begin(), m.end(), 0);
}

inline Monomial monomial_product(const Monomial& a, const Monomial& b) {
  Monomial out(a.size());
  for (std::size_t k = 0; k < a.size(); ++k) out[k] = a[k] + b[k];
  return out;
}

/// Graded lexicographic order: lower total degree first; within a degree,
/// larger power of the earlier variable first (1, x1, x2, x1^2, x1x2, x2^2).
struct GradedLex {
  bool operator()(const Monomial& a, const Monomial& b) const {
    const int da = total_degree(a);
    const int db = total_degree(b);
    if (da != db) return da < db;
    for (std::size_t k = 0; k < a.size() && k < b.size(); ++k) {
      if (a[k] != b[k]) return a[k] > b[k];
    }
    return a.size() < b.size();
  }
};

inline double monomial_value(const Monomial& m, std::span<const double> x) {
  double v = 1.0;
  for (std::size_t k = 0; k < m.size(); ++k) {
    for (int p = 0; p < m[k]; ++p) v *= x[k];
  }
  return v;
}

inline std::string monomial_to_string(const Monomial& m) {
  std::string out;
  for (std::size_t k = 0; k < m.size(); ++k) {
    if (m[k] == 0) continue;
    if (!out.empty()) out += ' ';
    out += "x" + std::to_string(k + 1);
    if (m[k] > 1) out += "^" + std::to_string(m[k]);
  }
  return out;
}

/// Sparse real polynomial in a fixed number of variables.
class Polynomial {
 public:
  using TermMap = std::map<Monomial, double, GradedLex>;

  explicit Polynomial(int num_vars = 0) : num_vars_(num_vars) {
    if (num_vars < 0) throw Error(ErrorCode::kDimensionMismatch, "negative variable count");
  }

  static Polynomial constant(int num_vars, double value) {
    Polynomial p(num_vars);
    p.add_term(Monomial(num_vars, 0), value);
    return p;
  }

  static Polynomial variable(int num_vars, int index) {
    require_dims(index >= 0 && index < num_vars, "variable index out of range");
    Polynomial p(num_vars);
    Monomial m(num_vars, 0);
    m[index] = 1;
    p.add_term(m, 1.0);
    return p;
  }

  int num_vars() const { return num_vars_; }
  const TermMap& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }

  void add_term(const Monomial& m, double coeff) {
    require_dims(static_cast<int>(m.size()) == num_vars_, "monomial arity mismatch");
    for (int e : m) {
      if (e < 0) throw Error(ErrorCode::kDimensionMismatch, "negative exponent");
    }
    if (coeff == 0.0) return;
    auto [it, inserted] = terms_.try_emplace(m, coeff);
    if (!inserted) {
      it->second += coeff;
      if (it->second == 0.0) terms_.erase(it);
    }
  }

  double coefficient(const Monomial& m) const {
    auto it = terms_.find(m);
    return it == terms_.end() ? 0.0 : it->second;
  }

  int degree() const {
    int d = 0;
    for (const auto& [m, c] : terms_) d = std::max(d, total_degree(m));
    return d;
  }

  bool depends_on(int var) const {
    for (const auto& [m, c] : terms_) {
      if (m[var] != 0) return true;
    }
    return false;
  }

  double max_abs_coefficient() const {
    double v = 0.0;
    for (const auto& [m, c] : terms_) v = std::max(v, std::abs(c));
    return v;
  }

  double operator()(std::span<const double> x) const { return evaluate(x); }

  double evaluate(std::span<const double> x) const {
    if (static_cast<int>(x.size()) != num_vars_) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "polynomial in " + std::to_string(num_vars_) + " variables evaluated at a " +
                      std::to_string(x.size()) + "-vector");
    }
    double sum = 0.0;
    for (const auto& [m, c] : terms_) sum += c * monomial_value(m, x);
    return sum;
  }

  double evaluate(const Vector& x) const { return evaluate(std::span<const double>(x.data(), x.size())); }

  Polynomial derivative(int var) const {
    require_dims(var >= 0 && var < num_vars_, "derivative variable out of range");
    Polynomial out(num_vars_);
    for (const auto& [m, c] : terms_) {
      if (m[var] == 0) continue;
      Monomial d = m;
      d[var] -= 1;
      out.add_term(d, c * m[var]);
    }
    return out;
  }

  Vector gradient(const Vector& x) const {
    Vector g(num_vars_);
    for (int k = 0; k < num_vars_; ++k) g(k) = derivative(k).evaluate(x);
    return g;
  }

  /// Returns q(y) = p(y + shift).
  Polynomial shifted(const Vector& shift) const {
    require_dims(shift.size() == num_vars_, "shift dimension mismatch");
    Polynomial out = Polynomial::constant(num_vars_, 0.0);
    for (const auto& [m, c] : terms_) {
      Polynomial term = Polynomial::constant(num_vars_, c);
      for (int k = 0; k < num_vars_; ++k) {
        if (m[k] == 0) continue;
        Polynomial lin = Polynomial::variable(num_vars_, k) + Polynomial::constant(num_vars_, shift(k));
        term = term * lin.pow(m[k]);
      }
      out = out + term;
    }
    return out;
  }

  /// Drops trailing variables; every dropped variable must be absent.
  Polynomial leading_variables(int count) const {
    require_dims(count >= 0 && count <= num_vars_, "variable count out of range");
    Polynomial out(count);
    for (const auto& [m, c] : terms_) {
      for (int k = count; k < num_vars_; ++k) {
        if (m[k] != 0) {
          throw Error(ErrorCode::kSpecInvalid,
                      "polynomial depends on x" + std::to_string(k + 1) + " outside the first " +
                          std::to_string(count) + " coordinates");
        }
      }
      out.add_term(Monomial(m.begin(), m.begin() + count), c);
    }
    return out;
  }

  /// Embeds into a space with more variables (new ones appended).
  Polynomial with_num_vars(int count) const {
    if (count < num_vars_) return leading_variables(count);
    Polynomial out(count);
    for (const auto& [m, c] : terms_) {
      Monomial e = m;
      e.resize(count, 0);
      out.add_term(e, c);
    }
    return out;
  }

  Polynomial pow(int k) const {
    if (k < 0) throw Error(ErrorCode::kDimensionMismatch, "negative polynomial power");
    Polynomial out = Polynomial::constant(num_vars_, 1.0);
    for (int i = 0; i < k; ++i) out = out * *this;
    return out;
  }

  friend Polynomial operator+(const Polynomial& a, const Polynomial& b) {
    require_dims(a.num_vars_ == b.num_vars_, "polynomial arity mismatch");
    Polynomial out = a;
    for (const auto& [m, c] : b.terms_) out.add_term(m, c);
    return out;
  }

  friend Polynomial operator-(const Polynomial& a) {
    Polynomial out(a.num_vars_);
    for (const auto& [m, c] : a.terms_) out.terms_.emplace(m, -c);
    return out;
  }

  friend Polynomial operator-(const Polynomial& a, const Polynomial& b) { return a + (-b); }

  friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
    require_dims(a.num_vars_ == b.num_vars_, "polynomial arity mismatch");
    Polynomial out(a.num_vars_);
    for (const auto& [ma, ca] : a.terms_) {
      for (const auto& [mb, cb] : b.terms_) out.add_term(monomial_product(ma, mb), ca * cb);
    }
    return out;
  }

  friend Polynomial operator*(double s, const Polynomial& p) {
    Polynomial out(p.num_vars_);
    if (s == 0.0) return out;
    for (const auto& [m, c] : p.terms_) out.terms_.emplace(m, s * c);
    return out;
  }

  friend bool operator==(const Polynomial& a, const Polynomial& b) {
    return a.num_vars_ == b.num_vars_ && a.terms_ == b.terms_;
  }

  std::string to_string(int precision = 17) const {
    if (terms_.empty()) return "0";
    std::ostringstream os;
    os << std::setprecision(precision);
    bool first = true;
    for (const auto& [m, c] : terms_) {
      const std::string mono = monomial_to_string(m);
      if (first) {
        os << c;
      } else {
        os << (c < 0 ? " - " : " + ") << std::abs(c);
      }
      if (!mono.empty()) os << " * " << mono;
      first = false;
    }
    return os.str();
  }

 private:
  int num_vars_;
  TermMap terms_;
};

/// Homogeneous quadratic form y' Q y as a polynomial.
inline Polynomial quadratic_form(const Matrix& q) {
  const int n = static_cast<int>(q.rows());
  Polynomial out(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      Monomial m(n, 0);
      m[i] += 1;
      m[j] += 1;
      out.add_term(m, q(i, j));
    }
  }
  return out;
}

}  // namespace qcbf
