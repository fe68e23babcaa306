#pragma once

#include <string>

#include "qcbf/error.hpp"
#include "qcbf/linalg.hpp"
#include "qcbf/polynomial.hpp"

namespace qcbf {

enum class Orientation {
  kSuperLevelSafe,  // global: invariant set is {b >= 0}
  kSubLevelSafe,    // local: invariant set is {b <= 0}
};

/// b(x) = (x - c)' Omega^{-1} (x - c) - 1.
class CbfFunction {
 public:
  CbfFunction() = default;

  CbfFunction(Vector c, Matrix omega, Orientation orientation)
      : c_(std::move(c)), omega_(symmetrize(omega)), orientation_(orientation) {
    require_dims(omega_.rows() == omega_.cols() && omega_.rows() == c_.size(), "CBF shape mismatch");
    cond_ = condition_number(omega_);
    if (!std::isfinite(cond_) || cond_ > 1e14) {
      throw Error(ErrorCode::kIllConditioned, "Omega is singular to working precision");
    }
    p_ = symmetrize(omega_.fullPivLu().solve(Matrix::Identity(omega_.rows(), omega_.cols())));
  }

  /// Builds from P = Omega^{-1}, as printed for published certificates.
  static CbfFunction from_p(const Vector& c, const Matrix& p, Orientation orientation) {
    const Matrix omega = p.fullPivLu().solve(Matrix::Identity(p.rows(), p.cols()));
    CbfFunction out(c, omega, orientation);
    out.p_ = symmetrize(p);
    return out;
  }

  const Vector& c() const { return c_; }
  const Matrix& omega() const { return omega_; }
  const Matrix& p() const { return p_; }
  Orientation orientation() const { return orientation_; }
  double condition() const { return cond_; }
  int n() const { return static_cast<int>(c_.size()); }

  double value(const Vector& x) const {
    const Vector xc = x - c_;
    return xc.dot(p_ * xc) - 1.0;
  }

  Vector gradient(const Vector& x) const { return 2.0 * p_ * (x - c_); }

  /// The polynomial b over n variables.
  Polynomial polynomial() const {
    const int n = this->n();
    Polynomial q = quadratic_form(p_);
    return q.shifted(-c_) - Polynomial::constant(n, 1.0);
  }

 private:
  Vector c_;
  Matrix omega_;
  Matrix p_;
  Orientation orientation_ = Orientation::kSuperLevelSafe;
  double cond_ = 1.0;
};

/// u(x) = K (x - c) + d.
struct AffineController {
  Matrix k;
  Vector d;
  Vector c;

  Vector operator()(const Vector& x) const { return k * (x - c) + d; }
};

/// K = Y Omega^{-1} by a linear solve, refusing ill-conditioned Omega.
inline AffineController recover_controller(const Matrix& omega, const Matrix& y, const Vector& c, const Vector& d) {
  require_dims(omega.rows() == omega.cols() && y.cols() == omega.rows(), "controller shape mismatch");
  require_dims(c.size() == omega.rows() && d.size() == y.rows(), "controller offset shape mismatch");
  const double cond = condition_number(omega);
  if (!(cond <= 1e12)) {
    throw Error(ErrorCode::kIllConditioned, "Omega condition number " + std::to_string(cond) + " exceeds 1e12");
  }
  const auto lu = omega.transpose().fullPivLu();
  Matrix k = lu.solve(y.transpose()).transpose();
  // One step of refinement keeps the residual at working precision.
  k += lu.solve((y - k * omega).transpose()).transpose();
  const double resid = (k * omega - y).norm();
  if (resid > 1e-8 * std::max(y.norm(), 1e-300) && y.norm() > 0.0) {
    throw Error(ErrorCode::kNumericalFailure, "controller recovery residual " + std::to_string(resid));
  }
  return AffineController{k, d, c};
}

}  // namespace qcbf
