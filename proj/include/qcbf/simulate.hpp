#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include <unsupported/Eigen/MatrixFunctions>

#include "qcbf/cbf.hpp"
#include "qcbf/error.hpp"
#include "qcbf/model.hpp"

namespace qcbf {

struct SimulationOptions {
  double horizon = 1.0;
  double dt = 1e-3;
  /// State norm beyond which the run is declared divergent.
  double divergence_threshold = 1e12;
  bool record = true;
};

struct Trajectory {
  std::vector<double> t;
  std::vector<Vector> x;
  std::vector<double> b;
  std::vector<Vector> u;
  /// min_t b (global orientation) or max_t b (local orientation).
  double barrier_extremum = 0.0;
  std::optional<double> first_violation;
  bool diverged = false;
  double blowup_time = 0.0;
  Vector final_state;
  /// Closed-form endpoint from the matrix exponential and its gap to RK4.
  Vector exact_final;
  double endpoint_error = 0.0;
};

/// Closed-form x(T) for x' = A x + B (K (x - c) + d) via an augmented exponential.
inline Vector exact_endpoint(const LinearSystem& sys, const AffineController& ctrl, const Vector& x0, double horizon) {
  const int n = sys.n();
  Matrix aug = Matrix::Zero(n + 1, n + 1);
  aug.topLeftCorner(n, n) = sys.A() + sys.B() * ctrl.k;
  aug.topRightCorner(n, 1) = sys.A() * ctrl.c + sys.B() * ctrl.d;
  const Matrix e = (aug * horizon).exp();
  Vector z0(n + 1);
  z0 << x0 - ctrl.c, 1.0;
  return ctrl.c + (e * z0).head(n);
}

/// Classical RK4 on the closed loop with the barrier tracked along the way.
inline Trajectory simulate_closed_loop(const LinearSystem& sys, const AffineController& ctrl, const Vector& x0,
                                       const CbfFunction& cbf, const SimulationOptions& opt) {
  if (!(opt.dt > 0.0) || !(opt.horizon >= 0.0) || !std::isfinite(opt.horizon)) {
    throw Error(ErrorCode::kSpecInvalid, "simulation needs dt > 0 and a finite horizon >= 0");
  }
  require_dims(x0.size() == sys.n(), "initial state dimension mismatch");
  require_dims(ctrl.k.rows() == sys.m() && ctrl.k.cols() == sys.n(), "gain dimension mismatch");
  const bool global = cbf.orientation() == Orientation::kSuperLevelSafe;
  auto f = [&](const Vector& x) -> Vector { return sys.A() * x + sys.B() * ctrl(x); };

  const long steps = opt.horizon == 0.0 ? 0 : static_cast<long>(std::ceil(opt.horizon / opt.dt - 1e-9));
  const double h = steps == 0 ? 0.0 : opt.horizon / static_cast<double>(steps);
  Trajectory tr;
  Vector x = x0;
  tr.barrier_extremum = cbf.value(x);
  auto record = [&](double t, const Vector& state) {
    const double bv = cbf.value(state);
    tr.barrier_extremum = global ? std::min(tr.barrier_extremum, bv) : std::max(tr.barrier_extremum, bv);
    if (!tr.first_violation && (global ? bv < -1e-9 : bv > 1e-9)) tr.first_violation = t;
    if (opt.record) {
      tr.t.push_back(t);
      tr.x.push_back(state);
      tr.b.push_back(bv);
      tr.u.push_back(ctrl(state));
    }
  };
  record(0.0, x);
  for (long k = 0; k < steps; ++k) {
    const Vector k1 = f(x);
    const Vector k2 = f(x + 0.5 * h * k1);
    const Vector k3 = f(x + 0.5 * h * k2);
    const Vector k4 = f(x + h * k3);
    x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    const double t = (k + 1 == steps) ? opt.horizon : static_cast<double>(k + 1) * h;
    if (!x.allFinite() || x.norm() > opt.divergence_threshold) {
      tr.diverged = true;
      tr.blowup_time = t;
      tr.final_state = x;
      return tr;
    }
    record(t, x);
  }
  tr.final_state = x;
  tr.exact_final = exact_endpoint(sys, ctrl, x0, opt.horizon);
  tr.endpoint_error = (tr.exact_final - x).norm();
  return tr;
}

}  // namespace qcbf
