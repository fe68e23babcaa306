#pragma once

#include <algorithm>
#include <vector>

#include "qcbf/error.hpp"
#include "qcbf/model.hpp"
#include "qcbf/polynomial.hpp"

namespace qcbf {

/// Closed-form minimum-norm safety filter for a scalar input:
/// u_s = -min(0, f) / g with f = grad s . A x + alpha s and g = grad s . B.
struct QpOutcome {
  double u = 0.0;
  bool unbounded = false;
  double f = 0.0;
  double g = 0.0;
};

inline QpOutcome cbf_qp_reference(const Polynomial& s, double alpha, const LinearSystem& sys, const Vector& x) {
  if (sys.m() != 1) throw Error(ErrorCode::kSpecInvalid, "closed-form filter needs a scalar input");
  if (!(alpha > 0.0)) throw Error(ErrorCode::kSpecInvalid, "alpha must be positive");
  require_dims(s.num_vars() == sys.n() && x.size() == sys.n(), "filter dimension mismatch");
  Vector grad(sys.n());
  for (int i = 0; i < sys.n(); ++i) grad(i) = s.derivative(i).evaluate(x);
  QpOutcome out;
  out.f = grad.dot(sys.A() * x) + alpha * s.evaluate(x);
  out.g = grad.dot(sys.B().col(0));
  if (out.f >= 0.0) return out;
  if (out.g == 0.0) {
    out.unbounded = true;
    return out;
  }
  out.u = -out.f / out.g;
  return out;
}

struct GridPoint {
  double x1 = 0.0;
  double x2 = 0.0;
  double value = 0.0;
};

/// min(||u_s||^2, cap) on an nx x ny grid over [lo, hi]^2.
inline std::vector<GridPoint> pathology_scan(const Polynomial& s, double alpha, const LinearSystem& sys, int nx,
                                             int ny, double lo = -1.0, double hi = 1.0, double cap = 100.0) {
  if (nx < 1 || ny < 1) throw Error(ErrorCode::kSpecInvalid, "grid needs at least one point per axis");
  if (sys.n() != 2) throw Error(ErrorCode::kSpecInvalid, "pathology scan needs a planar system");
  std::vector<GridPoint> out;
  out.reserve(static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny));
  auto coord = [&](int i, int count) { return count == 1 ? 0.5 * (lo + hi) : lo + (hi - lo) * i / (count - 1); };
  Vector x(2);
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      x << coord(i, nx), coord(j, ny);
      const QpOutcome q = cbf_qp_reference(s, alpha, sys, x);
      out.push_back({x(0), x(1), q.unbounded ? cap : std::min(q.u * q.u, cap)});
    }
  }
  return out;
}

}  // namespace qcbf
