#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "qcbf/cbf.hpp"
#include "qcbf/error.hpp"
#include "qcbf/linalg.hpp"
#include "qcbf/model.hpp"
#include "qcbf/result.hpp"
#include "qcbf/sos.hpp"

namespace qcbf {

struct Tolerances {
  /// Eigenvalue slack, relative to the norm of the matrix being checked.
  double psd_tol = 1e-6;
  /// Slack for published certificates whose coefficients were rounded.
  double published_cert_tol = 1e-2;
  int sample_count = 10000;
  double dt = 1e-3;
  std::uint64_t seed = 0;

  /// The same tolerances with psd_tol relaxed to published_cert_tol.
  Tolerances for_published() const {
    Tolerances t = *this;
    t.psd_tol = published_cert_tol;
    return t;
  }
};

namespace verify_detail {

/// Per-name seed so checks draw independent but reproducible streams.
inline std::uint64_t seed_for(std::uint64_t base, const std::string& name) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : name) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  return h ^ (base * 0x9e3779b97f4a7c15ULL);
}

inline Vector random_unit(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> normal;
  Vector z(n);
  do {
    for (int i = 0; i < n; ++i) z(i) = normal(rng);
  } while (z.norm() == 0.0);
  return z / z.norm();
}

/// Lower Cholesky factor L with L L' = Omega, or OrientationUnsupported.
inline Matrix ellipsoid_factor(const CbfFunction& cbf) {
  Eigen::LLT<Matrix> llt(cbf.omega());
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorCode::kOrientationUnsupported, "Omega is not positive definite, so the ellipsoid is undefined");
  }
  return llt.matrixL();
}

}  // namespace verify_detail

/// sup over ||z|| <= 1 of ||M z + d||^2. Uses the eigenbasis of M'M and a
/// scalar secular equation for the Lagrange multiplier.
inline double ball_sup_squared(const Matrix& m, const Vector& d) {
  require_dims(m.rows() == d.size(), "ball_sup_squared shape mismatch");
  const int n = static_cast<int>(m.cols());
  if (n == 0) return d.squaredNorm();
  Eigen::SelfAdjointEigenSolver<Matrix> es(m.transpose() * m);
  const Vector s = es.eigenvalues();
  const Matrix& v = es.eigenvectors();
  const Vector g = v.transpose() * (m.transpose() * d);
  const double s_max = s(n - 1);
  const double top_tol = 1e-12 * std::max(1.0, std::abs(s_max));
  auto value = [&](const Vector& zhat) { return (m * (v * zhat) + d).squaredNorm(); };

  double g_top = 0.0;
  double partial = 0.0;
  Vector zhat = Vector::Zero(n);
  for (int i = 0; i < n; ++i) {
    if (s(i) >= s_max - top_tol) {
      g_top += g(i) * g(i);
    } else {
      zhat(i) = g(i) / (s_max - s(i));
      partial += zhat(i) * zhat(i);
    }
  }
  const double g_scale = std::max(g.norm(), 1e-300);
  if (g_top <= 1e-24 * g_scale * g_scale && partial <= 1.0) {
    // Hard case: the multiplier sits at s_max; fill the top space to the sphere.
    for (int i = n - 1; i >= 0; --i) {
      if (s(i) >= s_max - top_tol) {
        zhat(i) = std::sqrt(std::max(0.0, 1.0 - partial));
        break;
      }
    }
    return value(zhat);
  }
  auto phi = [&](double lambda) {
    double acc = 0.0;
    for (int i = 0; i < n; ++i) acc += g(i) * g(i) / ((lambda - s(i)) * (lambda - s(i)));
    return acc - 1.0;
  };
  double lo = s_max;
  double hi = s_max + g.norm();
  for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(hi)); ++it) {
    const double mid = 0.5 * (lo + hi);
    (phi(mid) > 0.0 ? lo : hi) = mid;
  }
  for (int i = 0; i < n; ++i) zhat(i) = g(i) / (hi - s(i));
  zhat /= std::max(zhat.norm(), 1e-300);
  return value(zhat);
}

/// Exact suprema of the input constraints over the ellipsoid
/// {(x - c)' Omega^{-1} (x - c) <= 1}. L2 yields one value (sup ||u||^2),
/// Linf one per input (sup u_i^2) and a polytope one per row (sup H_i u).
inline std::vector<double> sup_input(const AffineController& ctrl, const CbfFunction& cbf, const InputBoundSpec& bound) {
  if (cbf.orientation() == Orientation::kSuperLevelSafe &&
      ctrl.d.norm() > 1e-12 * std::max(1.0, ctrl.k.norm())) {
    throw Error(ErrorCode::kOrientationUnsupported, "global certificates need d = 0 for input suprema");
  }
  const Matrix kl = ctrl.k * verify_detail::ellipsoid_factor(cbf);
  std::vector<double> out;
  if (std::holds_alternative<L2Bound>(bound.bound)) {
    out.push_back(ball_sup_squared(kl, ctrl.d));
  } else if (std::holds_alternative<LinfBound>(bound.bound)) {
    for (Eigen::Index i = 0; i < kl.rows(); ++i) {
      const double r = std::abs(ctrl.d(i)) + kl.row(i).norm();
      out.push_back(r * r);
    }
  } else if (const auto* p = std::get_if<PolytopeBound>(&bound.bound)) {
    for (Eigen::Index i = 0; i < p->H.rows(); ++i) {
      out.push_back(p->H.row(i).dot(ctrl.d) + (p->H.row(i) * kl).norm());
    }
  }
  return out;
}

/// Sampling counterpart of sup_input: random boundary points, then the best
/// few polished by projected gradient ascent on the sphere.
inline std::vector<double> sup_input_sampled(const AffineController& ctrl, const CbfFunction& cbf,
                                             const InputBoundSpec& bound, int samples, std::uint64_t seed) {
  const Matrix kl = ctrl.k * verify_detail::ellipsoid_factor(cbf);
  const int n = static_cast<int>(kl.cols());
  std::vector<std::function<double(const Vector&)>> objectives;
  if (std::holds_alternative<L2Bound>(bound.bound)) {
    objectives.push_back([&](const Vector& z) { return (kl * z + ctrl.d).squaredNorm(); });
  } else if (std::holds_alternative<LinfBound>(bound.bound)) {
    for (Eigen::Index i = 0; i < kl.rows(); ++i) {
      objectives.push_back([&, i](const Vector& z) {
        const double u = kl.row(i).dot(z) + ctrl.d(i);
        return u * u;
      });
    }
  } else if (const auto* p = std::get_if<PolytopeBound>(&bound.bound)) {
    for (Eigen::Index i = 0; i < p->H.rows(); ++i) {
      objectives.push_back([&, p, i](const Vector& z) { return p->H.row(i).dot(kl * z + ctrl.d); });
    }
  }
  std::mt19937_64 rng(seed);
  std::vector<double> out;
  for (const auto& f : objectives) {
    constexpr int kKeep = 8;
    std::vector<std::pair<double, Vector>> best;
    for (int s = 0; s < samples; ++s) {
      Vector z = verify_detail::random_unit(rng, n);
      const double val = f(z);
      if (static_cast<int>(best.size()) < kKeep) {
        best.emplace_back(val, z);
      } else {
        auto worst = std::min_element(best.begin(), best.end(),
                                      [](const auto& a, const auto& b) { return a.first < b.first; });
        if (val > worst->first) *worst = {val, z};
      }
    }
    double top = -std::numeric_limits<double>::infinity();
    for (auto& [val, z] : best) {
      double step = 0.1;
      for (int it = 0; it < 400 && step > 1e-14; ++it) {
        Vector grad(n);
        for (int k = 0; k < n; ++k) {
          Vector zp = z;
          Vector zm = z;
          zp(k) += 1e-6;
          zm(k) -= 1e-6;
          grad(k) = (f(zp) - f(zm)) / 2e-6;
        }
        Vector cand = z + step * grad;
        cand /= cand.norm();
        const double cv = f(cand);
        if (cv > val) {
          z = cand;
          val = cv;
          step *= 1.5;
        } else {
          step *= 0.5;
        }
      }
      top = std::max(top, val);
    }
    out.push_back(top);
  }
  return out;
}

struct Box {
  Vector lo;
  Vector hi;
};

struct OracleResult {
  int attempts = 0;
  int tested = 0;
  std::vector<Vector> violations;
  /// Smallest margin seen over tested samples.
  double worst_margin = std::numeric_limits<double>::infinity();
};

/// Rejection-samples the box until `count` points land in the region, and
/// records the ones whose margin is negative.
inline OracleResult containment_oracle(const std::function<bool(const Vector&)>& in_region,
                                       const std::function<double(const Vector&)>& margin, const Box& box,
                                       int count, std::uint64_t seed, std::size_t max_violations = 16) {
  require_dims(box.lo.size() == box.hi.size(), "box bounds mismatch");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  OracleResult out;
  const int n = static_cast<int>(box.lo.size());
  const long max_attempts = 1000L * count;
  Vector x(n);
  while (out.tested < count && out.attempts < max_attempts) {
    ++out.attempts;
    for (int i = 0; i < n; ++i) x(i) = box.lo(i) + (box.hi(i) - box.lo(i)) * unit(rng);
    if (!in_region(x)) continue;
    ++out.tested;
    const double mg = margin(x);
    out.worst_margin = std::min(out.worst_margin, mg);
    if (mg < 0.0 && out.violations.size() < max_violations) out.violations.push_back(x);
  }
  return out;
}

namespace verify_detail {

inline CertificateCheck make_check(std::string name, std::string condition, bool ok, double margin,
                                   std::string detail = {}, bool mandatory = true) {
  CertificateCheck c;
  c.name = std::move(name);
  c.condition = std::move(condition);
  c.status = ok ? CheckStatus::kPass : CheckStatus::kFail;
  c.margin = margin;
  c.detail = std::move(detail);
  c.mandatory = mandatory;
  return c;
}

inline std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

/// Box from the options if present, else the ellipsoid's bounding box
/// around c scaled by `grow`, restricted to the leading `dims` coordinates.
inline Box sampling_box(const ProblemSpec& spec, const Vector& c, const Matrix& omega, int dims, double grow) {
  Box box{Vector(dims), Vector(dims)};
  const auto& sb = spec.options.sample_box;
  for (int i = 0; i < dims; ++i) {
    if (static_cast<int>(sb.size()) > i) {
      box.lo(i) = sb[i].first;
      box.hi(i) = sb[i].second;
    } else {
      const double r = grow * std::sqrt(std::max(omega(i, i), 0.0));
      box.lo(i) = c(i) - r;
      box.hi(i) = c(i) + r;
    }
  }
  return box;
}

inline double poly_coeff_inf(const Polynomial& p) {
  double m = 0.0;
  for (const auto& [mono, c] : p.terms()) m = std::max(m, std::abs(c));
  return m;
}

/// Rebuilds the S-procedure identity from the stored Gram matrices and
/// checks PSD-ness, the coefficient match and the square factorization.
inline CertificateCheck sos_witness_check(const SynthesisResult& res, const Tolerances& tol) {
  const std::string name = "containment sos witness";
  const std::string cond = "S-procedure identity with PSD Gram matrices";
  const auto& spec = res.spec;
  const bool global = spec.mode == DesignMode::kGlobal;
  const int nv = global ? spec.partition.n_bar : spec.system.n();
  if (!res.r) return make_check(name, cond, false, -1.0, "no R matrix stored");

  std::vector<Polynomial> constraints;
  const Vector& c = res.center.c;
  if (global) {
    for (const auto& s : std::get<GlobalUnion>(spec.safe_set).pieces) {
      constraints.push_back(s.leading_variables(nv).shifted(c.head(nv)));
    }
  } else {
    for (const auto& w : spec.initial_set->pieces) constraints.push_back(-w.shifted(c));
  }
  const GramRecord* master = nullptr;
  std::vector<const GramRecord*> sigmas;
  for (const auto& g : res.grams) {
    if (g.name.size() >= 4 && g.name.compare(g.name.size() - 4, 4, "gram") == 0) {
      master = &g;
    } else {
      sigmas.push_back(&g);
    }
  }
  if (master == nullptr || sigmas.size() != constraints.size()) {
    return make_check(name, cond, false, -1.0, "Gram matrices missing or mismatched");
  }

  double worst_eig = std::numeric_limits<double>::infinity();
  Polynomial total = Polynomial::constant(nv, 1.0 - (global ? spec.options.sos_epsilon : 0.0));
  total = total - quadratic_form(*res.r);
  for (std::size_t i = 0; i < sigmas.size(); ++i) {
    const MonomialBasis basis(nv, sigmas[i]->degree);
    const double scale = std::max(1.0, sym_norm(sigmas[i]->q));
    worst_eig = std::min(worst_eig, min_eigenvalue(sigmas[i]->q) / scale);
    total = total + constraints[i] * gram_polynomial(sigmas[i]->q, basis);
  }
  const MonomialBasis mbasis(nv, master->degree);
  const double mscale = std::max(1.0, sym_norm(master->q));
  worst_eig = std::min(worst_eig, min_eigenvalue(master->q) / mscale);
  const Polynomial zqz = gram_polynomial(master->q, mbasis);
  const double mismatch = poly_coeff_inf(total - zqz) / std::max(1.0, poly_coeff_inf(zqz));

  // Factor into squares and confirm the squares reproduce z'Qz.
  double refactor = 0.0;
  try {
    const auto squares = extract_sos_witness(master->q, mbasis, tol.psd_tol * mscale);
    Polynomial sum(nv);
    for (const auto& p : squares) sum = sum + p * p;
    refactor = poly_coeff_inf(sum - zqz) / std::max(1.0, poly_coeff_inf(zqz));
  } catch (const Error&) {
    refactor = std::numeric_limits<double>::infinity();
  }
  const double margin = std::min(worst_eig + tol.psd_tol, tol.psd_tol - mismatch);
  const bool ok = worst_eig >= -tol.psd_tol && mismatch <= tol.psd_tol && refactor <= 1e-8;
  return make_check(name, cond, ok, margin,
                    "min Gram eig (rel) " + fmt(worst_eig) + ", coefficient mismatch " + fmt(mismatch) +
                        ", refactorization error " + fmt(refactor));
}

}  // namespace verify_detail

/// Audits a certificate. Every check is deterministic given tol.seed.
inline CertificateReport check_certificate(const SynthesisResult& res, const Tolerances& tol) {
  using namespace verify_detail;
  CertificateReport rep;
  rep.seed = tol.seed;
  rep.psd_tol = tol.psd_tol;
  const auto& spec = res.spec;
  const auto& sys = spec.system;
  const CbfFunction& cbf = res.cbf;
  const Matrix& omega = cbf.omega();
  const Matrix& p = cbf.p();
  const bool global = spec.mode == DesignMode::kGlobal;
  const int n = sys.n();
  const int nb = global ? spec.partition.n_bar : n;
  const Vector& c = cbf.c();

  // (a) structure
  {
    const double scale = std::max(1e-300, sym_norm(omega));
    if (global) {
      const Matrix ob = omega.topLeftCorner(nb, nb);
      double margin = min_eigenvalue(ob) / scale;
      std::string detail = "min eig Omega_bar " + fmt(min_eigenvalue(ob));
      double coupling = 0.0;
      if (nb < n) {
        const Matrix ou = omega.bottomRightCorner(n - nb, n - nb);
        margin = std::min(margin, -max_eigenvalue(ou) / scale);
        coupling = omega.topRightCorner(nb, n - nb).norm() / scale;
        detail += ", max eig Omega_under " + fmt(max_eigenvalue(ou)) + ", coupling " + fmt(coupling);
      }
      rep.checks.push_back(make_check("structure", "Omega_bar > 0, Omega_under < 0, block diagonal",
                                      margin > 0.0 && coupling <= tol.psd_tol, margin, detail));
    } else {
      const double margin = min_eigenvalue(omega) / scale;
      rep.checks.push_back(make_check("structure", "Omega > 0", margin > 0.0, margin,
                                      "min eig Omega " + fmt(min_eigenvalue(omega))));
    }
  }

  // (b) invariance: M = Acl' P + P Acl on the correct side.
  {
    const Matrix acl = sys.A() + sys.B() * res.controller.k;
    const Matrix m = symmetrize(acl.transpose() * p + p * acl);
    const double scale = std::max(1e-300, sym_norm(m));
    const double eig = global ? min_eigenvalue(m) : -max_eigenvalue(m);
    const double margin = eig / scale;
    rep.checks.push_back(make_check("invariance", global ? "A_cl' P + P A_cl >= 0" : "A_cl' P + P A_cl <= 0",
                                    margin >= -tol.psd_tol, margin,
                                    std::string(global ? "min" : "max") + " eig " +
                                        fmt(global ? min_eigenvalue(m) : max_eigenvalue(m)) + ", norm " +
                                        fmt(sym_norm(m))));
  }

  // Offset identity B d + A c = 0 behind the affine controller.
  {
    const double resid = (sys.B() * res.controller.d + sys.A() * c).norm();
    const double scale = std::max(1.0, (sys.A() * c).norm());
    rep.checks.push_back(make_check("offset identity", "B d + A c = 0", resid <= 1e-8 * scale, -resid,
                                    "residual " + fmt(resid)));
  }

  // (c) Schur link
  if (res.r) {
    const Matrix& r = *res.r;
    Matrix link(2 * nb, 2 * nb);
    link << r, Matrix::Identity(nb, nb), Matrix::Identity(nb, nb), omega.topLeftCorner(nb, nb);
    const double margin = min_eigenvalue(link) / std::max(1e-300, sym_norm(link));
    rep.checks.push_back(make_check("schur link", "[[R, I], [I, Omega]] >= 0", margin >= -tol.psd_tol, margin,
                                    "min eig " + fmt(min_eigenvalue(link))));
  }

  // (d) containment
  if (global) {
    const auto& safe = std::get<GlobalUnion>(spec.safe_set);
    const Vector cb = c.head(nb);
    const Matrix pb = p.topLeftCorner(nb, nb);
    // With Omega_under < 0, the largest b over the free block is at x_under = c_under.
    auto b_bar = [&](const Vector& xb) {
      const Vector y = xb - cb;
      return y.dot(pb * y) - 1.0;
    };
    auto unsafe = [&](const Vector& xb) {
      Vector x = c;
      x.head(nb) = xb;
      for (const auto& s : safe.pieces) {
        if (s.evaluate(x) >= 0.0) return false;
      }
      return true;
    };
    Box box = sampling_box(spec, c, omega, nb, 2.0);
    if (spec.options.sample_box.empty() && !safe.vertices.empty()) {
      for (int i = 0; i < nb; ++i) {
        double lo = safe.vertices[0](i);
        double hi = lo;
        for (const auto& v : safe.vertices) {
          lo = std::min(lo, v(i));
          hi = std::max(hi, v(i));
        }
        const double pad = 0.1 * std::max(hi - lo, 1e-3);
        box.lo(i) = std::min(box.lo(i), lo - pad);
        box.hi(i) = std::max(box.hi(i), hi + pad);
      }
    }
    const OracleResult orc = containment_oracle(unsafe, [&](const Vector& xb) { return -b_bar(xb) - 1e-12; },
                                                box, tol.sample_count, seed_for(tol.seed, "containment sampled"));
    const bool ok = orc.tested > 0 && orc.violations.empty();
    std::string detail = std::to_string(orc.tested) + " samples in the unsafe set, " +
                         std::to_string(orc.violations.size()) + " with b >= 0";
    if (orc.tested == 0) detail = "no sample landed in the unsafe set";
    rep.checks.push_back(make_check("containment sampled", "unsafe set inside {b < 0}", ok,
                                    orc.tested > 0 ? orc.worst_margin : -1.0, detail));
    if (!safe.vertices.empty()) {
      double worst = std::numeric_limits<double>::infinity();
      for (const auto& v : safe.vertices) worst = std::min(worst, -b_bar(v));
      rep.checks.push_back(make_check("containment vertices", "b(v) <= 0 at every unsafe vertex",
                                      worst >= -tol.psd_tol, worst));
      if (res.r) {
        double rworst = std::numeric_limits<double>::infinity();
        for (const auto& v : safe.vertices) rworst = std::min(rworst, 1.0 - (v - cb).dot(*res.r * (v - cb)));
        rep.checks.push_back(make_check("containment vertices R", "1 - (v - c)' R (v - c) >= 0",
                                        rworst >= -tol.psd_tol, rworst));
      }
    }
    if (res.containment == "sos") rep.checks.push_back(sos_witness_check(res, tol));
  } else {
    const auto& safe = std::get<LocalHalfspaces>(spec.safe_set);
    std::vector<Vector> normalized;
    try {
      normalized = safe.normalized(c);
    } catch (const Error& e) {
      rep.checks.push_back(make_check("halfspaces", "center inside every halfspace", false, -1.0, e.what()));
    }
    for (std::size_t i = 0; i < normalized.size(); ++i) {
      const double margin = 1.0 - normalized[i].dot(omega * normalized[i]);
      rep.checks.push_back(make_check("halfspace " + std::to_string(i + 1), "1 - a' Omega a >= 0",
                                      margin >= -tol.psd_tol, margin));
    }
    // Boundary of the ellipsoid against the raw halfspaces.
    {
      std::mt19937_64 rng(seed_for(tol.seed, "ellipsoid boundary sampled"));
      Matrix l;
      double worst = std::numeric_limits<double>::infinity();
      bool ok = true;
      try {
        l = ellipsoid_factor(cbf);
      } catch (const Error&) {
        ok = false;
        worst = -1.0;
      }
      if (ok) {
        for (int s = 0; s < tol.sample_count; ++s) {
          const Vector x = c + l * random_unit(rng, n);
          for (const auto& h : safe.rows) {
            worst = std::min(worst, (h.a.dot(x) + h.offset) / std::max(1.0, h.a.norm()));
          }
        }
        ok = worst >= -tol.psd_tol;
      }
      rep.checks.push_back(make_check("ellipsoid boundary sampled", "boundary of the invariant set is safe", ok,
                                      worst, std::to_string(tol.sample_count) + " boundary samples"));
    }
    // Initial set inside the ellipsoid: interior samples plus boundary points by bisection.
    if (spec.initial_set) {
      auto in_init = [&](const Vector& x) {
        for (const auto& w : spec.initial_set->pieces) {
          if (w.evaluate(x) < 0.0) return false;
        }
        return true;
      };
      const Box box = sampling_box(spec, c, omega, n, 2.0);
      const std::uint64_t sd = seed_for(tol.seed, "initial set sampled");
      OracleResult orc = containment_oracle(in_init, [&](const Vector& x) { return -cbf.value(x) + 1e-12; }, box,
                                            tol.sample_count, sd);
      std::mt19937_64 rng(sd + 1);
      std::uniform_real_distribution<double> unit(0.0, 1.0);
      int boundary = 0;
      double worst = orc.worst_margin;
      if (orc.tested > 0) {
        // Pair a known inside point with outside points and bisect to the boundary.
        Vector inside = box.lo;
        std::mt19937_64 rng2(sd);
        for (int a = 0; a < 1000 * tol.sample_count; ++a) {
          for (int i = 0; i < n; ++i) inside(i) = box.lo(i) + (box.hi(i) - box.lo(i)) * unit(rng2);
          if (in_init(inside)) break;
        }
        const int want = std::max(1, tol.sample_count / 10);
        for (int a = 0; a < 100 * want && boundary < want; ++a) {
          Vector out(n);
          for (int i = 0; i < n; ++i) out(i) = box.lo(i) + (box.hi(i) - box.lo(i)) * unit(rng);
          if (in_init(out)) continue;
          Vector lo = inside;
          Vector hi = out;
          for (int k = 0; k < 60; ++k) {
            const Vector mid = 0.5 * (lo + hi);
            (in_init(mid) ? lo : hi) = mid;
          }
          const double mg = -cbf.value(lo) + 1e-12;
          worst = std::min(worst, mg);
          if (mg < 0.0 && orc.violations.size() < 16) orc.violations.push_back(lo);
          ++boundary;
        }
      }
      const bool ok = orc.tested > 0 && orc.violations.empty();
      std::string detail = std::to_string(orc.tested) + " interior and " + std::to_string(boundary) +
                           " boundary samples, " + std::to_string(orc.violations.size()) + " with b > 0";
      if (orc.tested == 0) detail = "no sample landed in the initial set; set sample_box";
      rep.checks.push_back(make_check("initial set sampled", "initial set inside {b <= 0}", ok,
                                      orc.tested > 0 ? worst : -1.0, detail));
    }
    if (res.containment == "sos") rep.checks.push_back(sos_witness_check(res, tol));
  }

  // (e) input bounds
  const auto& ib = spec.input_bound;
  if (!ib.is_none()) {
    try {
      const std::vector<double> sup = sup_input(res.controller, cbf, ib);
      std::vector<double> limit;
      std::string cond;
      if (const auto* b = std::get_if<L2Bound>(&ib.bound)) {
        limit.push_back(b->zeta - ib.epsilon);
        cond = "sup ||u||^2 <= zeta - epsilon";
      } else if (const auto* b = std::get_if<LinfBound>(&ib.bound)) {
        limit.assign(sup.size(), b->zeta - ib.epsilon);
        cond = "sup u_i^2 <= zeta - epsilon";
      } else if (const auto* b = std::get_if<PolytopeBound>(&ib.bound)) {
        for (Eigen::Index i = 0; i < b->h.size(); ++i) limit.push_back(b->h(i) - ib.epsilon / 2.0);
        cond = "sup H_i u <= h_i - epsilon / 2";
      }
      const std::vector<double> sampled =
          sup_input_sampled(res.controller, cbf, ib, 100000, seed_for(tol.seed, "input bound"));
      for (std::size_t i = 0; i < sup.size(); ++i) {
        const double slack = tol.psd_tol * std::max(1.0, std::abs(limit[i]));
        const double margin = limit[i] - sup[i];
        const double agree = std::abs(sup[i] - sampled[i]) / std::max(1.0, std::abs(sup[i]));
        const std::string name = sup.size() == 1 ? "input bound" : "input bound " + std::to_string(i + 1);
        rep.checks.push_back(make_check(name, cond, margin >= -slack && agree <= 1e-3, margin,
                                        "sup " + fmt(sup[i]) + ", sampled " + fmt(sampled[i]) + ", limit " +
                                            fmt(limit[i])));
      }
    } catch (const Error& e) {
      rep.checks.push_back(make_check("input bound", "input suprema", false, -1.0, e.what()));
    }
  }
  rep.sort();
  return rep;
}

/// Human-readable summary, one line per check.
inline std::string format_report(const CertificateReport& rep) {
  std::ostringstream os;
  os.precision(6);
  for (const auto& c : rep.checks) {
    os << (c.status == CheckStatus::kPass ? "PASS " : c.status == CheckStatus::kFail ? "FAIL " : "SKIP ") << c.name
       << "  margin " << c.margin << "  (" << c.condition << ")";
    if (!c.detail.empty()) os << "  " << c.detail;
    os << "\n";
  }
  os << (rep.passed() ? "certificate PASSED" : "certificate FAILED") << " at psd_tol " << rep.psd_tol << "\n";
  return os.str();
}

}  // namespace qcbf
