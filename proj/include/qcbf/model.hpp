#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "qcbf/error.hpp"
#include "qcbf/linalg.hpp"
#include "qcbf/polynomial.hpp"

namespace qcbf {

/// Continuous-time dynamics xdot = A x + B u.
class LinearSystem {
 public:
  LinearSystem() = default;
  LinearSystem(Matrix a, Matrix b) : a_(std::move(a)), b_(std::move(b)) {
    require_dims(a_.rows() == a_.cols() && a_.rows() > 0, "A must be square and nonempty");
    require_dims(b_.rows() == a_.rows() && b_.cols() > 0, "B must have n rows and at least one column");
    if (!a_.allFinite() || !b_.allFinite()) {
      throw Error(ErrorCode::kSpecInvalid, "system matrices contain non-finite entries");
    }
  }

  const Matrix& A() const { return a_; }
  const Matrix& B() const { return b_; }
  int n() const { return static_cast<int>(a_.rows()); }
  int m() const { return static_cast<int>(b_.cols()); }

 private:
  Matrix a_;
  Matrix b_;
};

/// Split x = [x_bar; x_under]; x_bar is the leading block of coordinates.
struct StatePartition {
  int n_bar = 0;
  int n_under = 0;
};

enum class DesignMode { kGlobal, kLocal };

/// Affine halfspace a'x + offset >= 0 in absolute coordinates.
struct Halfspace {
  Vector a;
  double offset = 0.0;
};

struct GlobalUnion {
  /// Safe set is the union of {s_i >= 0}; polynomials are over the full state
  /// (n variables) and may only involve the x_bar coordinates.
  std::vector<Polynomial> pieces;
  /// Optional vertices of the projection of the unsafe set onto x_bar.
  std::vector<Vector> vertices;
};

struct LocalHalfspaces {
  /// Safe set is the intersection of the halfspaces.
  std::vector<Halfspace> rows;

  /// Rows rescaled to the a_i'(x - c) + 1 >= 0 form around an interior c.
  std::vector<Vector> normalized(const Vector& c) const {
    std::vector<Vector> out;
    out.reserve(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const double value = rows[i].a.dot(c) + rows[i].offset;
      if (!(value > 0.0)) {
        throw Error(ErrorCode::kSpecInvalid,
                    "center is not strictly inside halfspace " + std::to_string(i + 1));
      }
      out.push_back(rows[i].a / value);
    }
    return out;
  }
};

using SafeSetSpec = std::variant<GlobalUnion, LocalHalfspaces>;

struct InitialSetSpec {
  /// Initial set is the intersection of {w_i >= 0} over the full state.
  std::vector<Polynomial> pieces;
};

struct NoInputBound {};
struct L2Bound { double zeta = 0.0; };
struct LinfBound { double zeta = 0.0; };
struct PolytopeBound { Matrix H; Vector h; };

/// How the multiplier mu in the input-bound blocks is treated.
enum class MuMode {
  kFixed,   // mu pinned to the maximizer of mu * (budget - mu)
  kLifted,  // mu is a decision scalar in the lifted block
};

struct InputBoundSpec {
  std::variant<NoInputBound, L2Bound, LinfBound, PolytopeBound> bound;
  double epsilon = 1e-3;
  MuMode mu_mode = MuMode::kFixed;

  bool is_none() const { return std::holds_alternative<NoInputBound>(bound); }
};

enum class ContainmentMethod { kSos, kVertices };

struct SolverOptions {
  double feas_tol = 1e-9;
  double gap_tol = 1e-9;
  int max_iterations = 200;
  bool verbose = false;
};

struct SynthesisOptions {
  int multiplier_degree = 2;
  double sos_epsilon = 1e-6;
  double delta = 1e-6;
  double rank_tol = 1e-9;
  /// Box on every decision entry; keeps free directions of the optimal face bounded.
  double variable_bound = 1e3;
  ContainmentMethod containment = ContainmentMethod::kSos;
  std::uint64_t seed = 0;
  int sample_count = 10000;
  /// Optional per-coordinate sampling box used by containment audits.
  std::vector<std::pair<double, double>> sample_box;
  SolverOptions solver;
};

struct ProblemSpec {
  LinearSystem system;
  StatePartition partition;
  DesignMode mode = DesignMode::kGlobal;
  SafeSetSpec safe_set = GlobalUnion{};
  std::optional<InitialSetSpec> initial_set;
  InputBoundSpec input_bound;
  std::optional<Vector> center;
  SynthesisOptions options;
};

struct CenterData {
  Vector c;
  Vector d;
  double residual = 0.0;
};

struct ValidationReport {
  std::vector<std::string> errors;
  std::vector<std::string> warnings;

  bool ok() const { return errors.empty(); }
};

/// PBH test on the closed right half plane.
inline bool is_stabilizable(const LinearSystem& sys, double tol = 1e-9) {
  Eigen::EigenSolver<Matrix> es(sys.A());
  const int n = sys.n();
  for (int i = 0; i < n; ++i) {
    const std::complex<double> lambda = es.eigenvalues()(i);
    if (lambda.real() < -tol) continue;
    Eigen::MatrixXcd pbh(n, n + sys.m());
    pbh.leftCols(n) = sys.A().cast<std::complex<double>>() -
                      lambda * Eigen::MatrixXcd::Identity(n, n);
    pbh.rightCols(sys.m()) = sys.B().cast<std::complex<double>>();
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(pbh);
    const auto& s = svd.singularValues();
    int rank = 0;
    for (Eigen::Index k = 0; k < s.size(); ++k) {
      if (s(k) > tol * std::max(1.0, s(0))) ++rank;
    }
    if (rank < n) return false;
  }
  return true;
}

namespace detail {

/// Far-field probe: returns true if some point at large radius around the
/// center falls in the unsafe set (all pieces negative).
inline bool unsafe_set_reaches_far_field(const GlobalUnion& safe, const Vector& center_bar,
                                         int n_total) {
  const int n_bar = static_cast<int>(center_bar.size());
  std::mt19937_64 rng(0x5eed);
  std::normal_distribution<double> normal;
  Vector x = Vector::Zero(n_total);
  for (double radius : {1e3, 1e5}) {
    for (int k = 0; k < 512; ++k) {
      Vector dir(n_bar);
      for (int i = 0; i < n_bar; ++i) dir(i) = normal(rng);
      dir.normalize();
      x.head(n_bar) = center_bar + radius * dir;
      bool inside_unsafe = true;
      for (const auto& s : safe.pieces) {
        if (s.evaluate(x) >= 0.0) {
          inside_unsafe = false;
          break;
        }
      }
      if (inside_unsafe) return true;
    }
  }
  return false;
}

}  // namespace detail

inline ValidationReport validate_spec(const ProblemSpec& spec) {
  ValidationReport report;
  auto fail = [&](std::string msg) { report.errors.push_back(std::move(msg)); };
  const int n = spec.system.n();
  const int m = spec.system.m();
  if (n == 0) {
    fail("system not set");
    return report;
  }

  const auto& part = spec.partition;
  if (part.n_bar < 0 || part.n_under < 0 || part.n_bar + part.n_under != n) {
    fail("partition n_bar + n_under must equal n = " + std::to_string(n));
  }
  if (spec.mode == DesignMode::kGlobal && part.n_bar == 0) {
    fail("global mode needs n_bar >= 1");
  }
  if (spec.mode == DesignMode::kLocal && part.n_bar != n) {
    fail("local mode requires n_bar = n");
  }

  const bool global_set = std::holds_alternative<GlobalUnion>(spec.safe_set);
  if ((spec.mode == DesignMode::kGlobal) != global_set) {
    fail(spec.mode == DesignMode::kGlobal ? "global mode requires a polynomial union safe set"
                                          : "local mode requires a halfspace safe set");
  }

  if (const auto* g = std::get_if<GlobalUnion>(&spec.safe_set)) {
    if (g->pieces.empty()) fail("safe set union is empty");
    for (std::size_t i = 0; i < g->pieces.size(); ++i) {
      const auto& s = g->pieces[i];
      if (s.num_vars() != n) {
        fail("safe set polynomial " + std::to_string(i + 1) + " has wrong variable count");
        continue;
      }
      for (int k = part.n_bar; k < n; ++k) {
        if (s.depends_on(k)) {
          fail("safe set polynomial " + std::to_string(i + 1) + " depends on x" +
               std::to_string(k + 1) + ", which is outside the constrained block");
        }
      }
    }
    for (const auto& v : g->vertices) {
      if (v.size() != part.n_bar || !v.allFinite()) fail("vertex dimension must equal n_bar");
    }
  }
  if (const auto* l = std::get_if<LocalHalfspaces>(&spec.safe_set)) {
    for (std::size_t i = 0; i < l->rows.size(); ++i) {
      const auto& row = l->rows[i];
      if (row.a.size() != n || !row.a.allFinite() || !std::isfinite(row.offset)) {
        fail("halfspace " + std::to_string(i + 1) + " must be a finite n-vector");
      }
    }
  }

  if (spec.mode == DesignMode::kLocal) {
    if (!spec.initial_set || spec.initial_set->pieces.empty()) fail("initial set required in local mode");
  }
  if (spec.initial_set) {
    for (const auto& w : spec.initial_set->pieces) {
      if (w.num_vars() != n) fail("initial set polynomial has wrong variable count");
    }
  }

  const auto& ib = spec.input_bound;
  if (!ib.is_none() && !(ib.epsilon > 0.0)) fail("input bound epsilon must be positive");
  if (const auto* b = std::get_if<L2Bound>(&ib.bound)) {
    if (!(b->zeta > 0.0)) fail("zeta must be positive");
  }
  if (const auto* b = std::get_if<LinfBound>(&ib.bound)) {
    if (!(b->zeta > 0.0)) fail("zeta must be positive");
    if (spec.mode == DesignMode::kGlobal) fail("infinity-norm input bounds need local mode");
  }
  if (const auto* b = std::get_if<PolytopeBound>(&ib.bound)) {
    if (b->H.cols() != m || b->H.rows() != b->h.size() || b->H.rows() == 0) {
      fail("polytope bound H must be k x m with matching h");
    } else {
      for (Eigen::Index i = 0; i < b->H.rows(); ++i) {
        if (b->H.row(i).cwiseAbs().maxCoeff() == 0.0) {
          fail("polytope bound row " + std::to_string(i + 1) + " is all zeros");
        }
      }
    }
    if (spec.mode == DesignMode::kGlobal) fail("polytope input bounds need local mode");
  }
  if (std::holds_alternative<L2Bound>(ib.bound) && spec.mode == DesignMode::kGlobal &&
      part.n_under != 0) {
    fail("global input bound requires n_under = 0");
  }

  const auto& opt = spec.options;
  if (opt.multiplier_degree < 0 || opt.multiplier_degree % 2 != 0) {
    fail("multiplier_degree must be even and nonnegative");
  }
  if (!(opt.sos_epsilon >= 0.0) || !(opt.delta > 0.0) || !(opt.rank_tol > 0.0)) {
    fail("epsilon must be nonnegative, delta and rank_tol positive");
  }
  if (opt.sample_count <= 0) fail("sample_count must be positive");
  if (!(opt.variable_bound >= 0.0)) fail("variable_bound must be nonnegative");
  if (!opt.sample_box.empty() && static_cast<int>(opt.sample_box.size()) != n) {
    fail("sample_box needs one interval per state coordinate");
  }
  if (opt.containment == ContainmentMethod::kVertices) {
    const auto* g = std::get_if<GlobalUnion>(&spec.safe_set);
    if (g == nullptr || g->vertices.empty()) fail("vertex containment requires safe set vertices");
  }

  if (spec.center) {
    if (spec.center->size() != n || !spec.center->allFinite()) fail("center must be a finite n-vector");
  } else if (spec.mode == DesignMode::kGlobal) {
    fail("global mode requires a center inside the unsafe set");
  }

  if (report.ok() && spec.mode == DesignMode::kGlobal) {
    const auto& g = std::get<GlobalUnion>(spec.safe_set);
    if (detail::unsafe_set_reaches_far_field(g, spec.center->head(part.n_bar), n)) {
      report.warnings.push_back("unsafe set appears unbounded on the constrained coordinates");
    }
  }

  if (!is_stabilizable(spec.system)) report.warnings.push_back("system is not stabilizable");
  return report;
}

/// Finds d with B d + A c = 0 (least squares) and checks rank([B, Ac]) = rank(B).
inline CenterData prepare_center(const LinearSystem& sys, const Vector& c, double tol = 1e-9) {
  require_dims(c.size() == sys.n(), "center dimension mismatch");
  if (!c.allFinite()) throw Error(ErrorCode::kSpecInvalid, "center has non-finite entries");

  const Vector ac = sys.A() * c;
  Matrix augmented(sys.n(), sys.m() + 1);
  augmented << sys.B(), ac;
  const int rank_b = numerical_rank(sys.B(), tol);
  const int rank_aug = numerical_rank(augmented, tol);
  if (rank_aug > rank_b) {
    throw Error(ErrorCode::kRankConditionViolated, "A c is not in the range of B");
  }

  CenterData out;
  out.c = c;
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(sys.B());
  out.d = cod.solve(-ac);
  out.residual = (sys.B() * out.d + ac).norm();
  const double scale = std::max(1.0, ac.norm());
  if (out.residual > tol * scale * 1e3) {
    throw Error(ErrorCode::kRankConditionViolated,
                "residual of B d + A c too large: " + std::to_string(out.residual));
  }
  return out;
}

}  // namespace qcbf
