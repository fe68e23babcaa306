// Program assembly, synthesis, certificate audit, simulation and the QP filter.

#include <gtest/gtest.h>

#include <chrono>
#include <cmath>

#include "fixtures.hpp"

using namespace qcbf;
using namespace fixtures;

namespace {

template <class F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an Error";
  return ErrorCode::kIo;
}

const LMIBlock* find_lmi(const ConicProblem& p, const std::string& name) {
  for (const auto& l : p.lmis) {
    if (l.name == name) return &l;
  }
  return nullptr;
}

const InteriorPointBackend kBackend;

BuiltProgram built(const ProblemSpec& s) {
  return build_program(s, prepare_center(s.system, *s.center, s.options.rank_tol));
}

ProblemSpec case1_unbounded() {
  ProblemSpec s = load("case1.prob");
  s.input_bound = {};
  return s;
}

}  // namespace

// ---- global program ---------------------------------------------------------

TEST(GlobalProgram, DoubleIntegratorMeetsClosedFormConditions) {
  ProblemSpec s = example1();
  s.options.multiplier_degree = 0;
  const BuiltProgram bp = built(s);
  const Solution sol = solve(bp.problem, kBackend);
  ASSERT_TRUE(sol.optimal()) << sol.message;
  const auto& l = bp.problem.layout;
  const double ob = l.value(*bp.omega_bar, sol.values)(0, 0);
  const double ou = l.value(*bp.omega_under, sol.values)(0, 0);
  const Matrix y = l.value(bp.y, sol.values);
  const double r = l.value(bp.r, sol.values)(0, 0);
  const double sigma = l.value(bp.sos->multipliers.at(0).q, sol.values)(0, 0);
  const double eps = s.options.sos_epsilon;
  EXPECT_GT(y(0, 1), 0.0);
  EXPECT_LE(std::abs(y(0, 0) + ou), 1e-6 * std::abs(ou));
  EXPECT_GE(sigma, r - 1e-7);
  EXPECT_GE(r, 1.0 / ob - 1e-7);
  EXPECT_LE(sigma + eps, 1.0 + 1e-7);
  EXPECT_GT(sol.objective, 1.0 - 1e-6);
  EXPECT_LE(sol.objective, 1.1);
}

TEST(GlobalProgram, FullPartitionHasNoNegativeBlock) {
  const BuiltProgram bp = built(case1_unbounded());
  EXPECT_FALSE(bp.omega_under.has_value());
  EXPECT_EQ(bp.omega_bar->rows, 2);
  EXPECT_EQ(find_lmi(bp.problem, "Omega_under negative"), nullptr);
}

TEST(GlobalProgram, MixedPartitionShapes) {
  const BuiltProgram bp = built(load("case2.prob"));
  EXPECT_EQ(bp.omega_bar->rows, 2);
  EXPECT_EQ(bp.omega_under->rows, 1);
  EXPECT_EQ(bp.y.rows, 2);
  EXPECT_EQ(bp.y.cols, 3);
}

TEST(GlobalProgram, OptimalBlocksAreFeasible) {
  for (const char* name : {"example1.prob", "case1.prob", "case2.prob", "omni_global.prob"}) {
    const BuiltProgram bp = built(load(name));
    const Solution sol = solve(bp.problem, kBackend, load(name).options.solver);
    ASSERT_TRUE(sol.optimal()) << name << ": " << sol.message;
    for (std::size_t i = 0; i < bp.problem.lmis.size(); ++i) {
      const double scale = std::max(1.0, bp.problem.lmis[i].evaluate(sol.values).norm());
      EXPECT_GE(sol.lmi_margins[i], -10.0 * load(name).options.solver.feas_tol * scale)
          << name << " " << bp.problem.lmis[i].name;
    }
  }
}

TEST(GlobalProgram, InvarianceBlocksFlipSignBetweenModes) {
  ProblemSpec g = case1_unbounded();
  ProblemSpec l = integrator_box(2);
  l.system = g.system;
  const BuiltProgram bg = built(g);
  const BuiltProgram bl = built(l);
  const LMIBlock* ig = find_lmi(bg.problem, "invariance");
  const LMIBlock* il = find_lmi(bl.problem, "invariance");
  ASSERT_TRUE(ig && il);
  EXPECT_EQ(ig->sense, Sense::kPsd);
  EXPECT_EQ(il->sense, Sense::kNsd);
  std::mt19937_64 rng(2);
  std::normal_distribution<double> nd;
  Matrix om(2, 2), y(1, 2);
  om << 2, 0.3, 0.3, 1;
  y << nd(rng), nd(rng);
  Vector wg = Vector::Zero(bg.problem.layout.size());
  Vector wl = Vector::Zero(bl.problem.layout.size());
  bg.problem.layout.assign(*bg.omega_bar, om, wg);
  bg.problem.layout.assign(bg.y, y, wg);
  bl.problem.layout.assign(*bl.omega, om, wl);
  bl.problem.layout.assign(bl.y, y, wl);
  EXPECT_LE((ig->evaluate(wg) - il->evaluate(wl)).norm(), 1e-14);
}

// ---- vertex containment ------------------------------------------------------

namespace {

SolveStatus square_with_r(double r) {
  BuiltProgram bp;
  bp.r = bp.problem.layout.add_symmetric("R", 2);
  add_vertex_containment(bp, {vec({1, 1}), vec({1, -1}), vec({-1, 1}), vec({-1, -1})}, Vector::Zero(2));
  for (int i = 0; i < 2; ++i) {
    for (int j = i; j < 2; ++j) {
      bp.problem.add_equality("pin", AffineExpr::var(bp.r.index(i, j)) - AffineExpr(i == j ? r : 0.0));
    }
  }
  bp.problem.add_lmi("R psd", AffineMatrix::variable(bp.r));
  return solve(bp.problem, kBackend).status;
}

}  // namespace

TEST(VertexContainment, CenterVertexIsVacuous) {
  BuiltProgram bp;
  bp.r = bp.problem.layout.add_symmetric("R", 2);
  add_vertex_containment(bp, {vec({0.5, -2})}, vec({0.5, -2}));
  ASSERT_EQ(bp.problem.inequalities.size(), 1u);
  EXPECT_TRUE(bp.problem.inequalities[0].expr.is_constant());
  EXPECT_EQ(bp.problem.inequalities[0].expr.constant(), 1.0);
}

TEST(VertexContainment, SquareThreshold) {
  EXPECT_EQ(square_with_r(0.5), SolveStatus::kOptimal);
  EXPECT_EQ(square_with_r(0.45), SolveStatus::kOptimal);
  EXPECT_EQ(square_with_r(0.55), SolveStatus::kInfeasible);
}

TEST(VertexContainment, EmptyListRejected) {
  BuiltProgram bp;
  bp.r = bp.problem.layout.add_symmetric("R", 2);
  EXPECT_EQ(code_of([&] { add_vertex_containment(bp, {}, Vector::Zero(2)); }), ErrorCode::kEmptyVertexList);
}

TEST(VertexContainment, PentagonReplacesSosBlock) {
  const BuiltProgram sos = built(load("omni_global.prob"));
  const BuiltProgram vx = built(load("omni_global_vertices.prob"));
  EXPECT_TRUE(sos.sos.has_value());
  EXPECT_FALSE(vx.sos.has_value());
  int count = 0;
  for (const auto& c : vx.problem.inequalities) count += c.name.rfind("vertex", 0) == 0;
  EXPECT_EQ(count, 5);
}

// ---- local program ----------------------------------------------------------

TEST(LocalProgram, IntegratorBoxIsFeasibleAndCertified) {
  const auto res = synthesize(integrator_box(2), kBackend);
  EXPECT_TRUE(res.report.passed()) << format_report(res.report);
  EXPECT_LE(max_eigenvalue(symmetrize(res.controller.k)), 1e-6);
}

TEST(LocalProgram, HalfspaceRowsHoldAtOptimum) {
  const ProblemSpec s = load("omni_local.prob");
  const BuiltProgram bp = built(s);
  const Solution sol = solve(bp.problem, kBackend, s.options.solver);
  ASSERT_TRUE(sol.optimal()) << sol.message;
  const Matrix om = bp.problem.layout.value(*bp.omega, sol.values);
  for (const Vector& a : std::get<LocalHalfspaces>(s.safe_set).normalized(*s.center)) {
    EXPECT_LE(a.dot(om * a), 1.0 + 1e-8);
  }
}

TEST(LocalProgram, HalfspaceThroughCenterRejected) {
  ProblemSpec s = integrator_box(2);
  std::get<LocalHalfspaces>(s.safe_set).rows.push_back({vec({1, 0}), 0.0});
  EXPECT_EQ(code_of([&] { built(s); }), ErrorCode::kSpecInvalid);
}

// ---- input bounds -------------------------------------------------------------

TEST(InputBound, FixedMuIsHalfTheBudget) {
  ProblemSpec s = integrator_box(2);
  s.input_bound.bound = L2Bound{4.0};
  const BuiltProgram bp = built(s);
  const LMIBlock* blk = find_lmi(bp.problem, "input l2");
  ASSERT_NE(blk, nullptr);
  const int n = 2;
  EXPECT_DOUBLE_EQ(blk->constant(n + 1, n + 1), (4.0 - 1e-3) / 2.0);
  EXPECT_EQ(bp.mu_mode, "fixed");
}

TEST(InputBound, OffsetConsumingBudgetIsExhausted) {
  BuiltProgram bp = built(integrator_box(2));
  const Vector d = vec({1.0, 1.0});
  EXPECT_EQ(code_of([&] { add_input_bound_l2(bp, d.squaredNorm(), 0.0, d); }), ErrorCode::kBudgetExhausted);
  EXPECT_EQ(code_of([&] { add_input_bound_linf(bp, 1.0, 0.0, d); }), ErrorCode::kBudgetExhausted);
  Matrix h = Matrix::Identity(2, 2);
  EXPECT_EQ(code_of([&] { add_input_bound_polytope(bp, h, h * d, 1e-3, d); }), ErrorCode::kBudgetExhausted);
}

TEST(InputBound, OmniLocalMeetsAccelerationLimit) {
  const auto res = synthesize(load("omni_local.prob"), kBackend);
  ASSERT_TRUE(res.report.passed()) << format_report(res.report);
  const double sup = sup_input(res.controller, res.cbf, res.spec.input_bound).at(0);
  EXPECT_LE(sup, 4.0 - 1e-3 + 1e-6 * 4.0);
}

TEST(InputBound, FixedMuSupWithinBudget) {
  ProblemSpec s = load("omni_local.prob");
  s.input_bound.mu_mode = MuMode::kFixed;
  const auto res = synthesize(s, kBackend);
  ASSERT_TRUE(res.report.passed()) << format_report(res.report);
  EXPECT_LE(sup_input(res.controller, res.cbf, s.input_bound).at(0), 4.0 - 1e-3 + 1e-6 * 4.0);
}

TEST(InputBound, SingleInputLinfMatchesL2Shape) {
  ProblemSpec a = integrator_box(1);
  ProblemSpec b = a;
  a.input_bound.bound = L2Bound{1.0};
  b.input_bound.bound = LinfBound{1.0};
  const LMIBlock* la = find_lmi(built(a).problem, "input l2");
  const BuiltProgram bb = built(b);
  ASSERT_NE(la, nullptr);
  ASSERT_FALSE(bb.problem.lmis.empty());
  const LMIBlock& lb = bb.problem.lmis.back();
  EXPECT_EQ(la->constant, lb.constant);
  EXPECT_EQ(la->terms.size(), lb.terms.size());
}

TEST(InputBound, LinfVariantIsCertified) {
  ProblemSpec s = load("omni_local.prob");
  s.input_bound.bound = LinfBound{2.0};
  const auto res = synthesize(s, kBackend);
  EXPECT_TRUE(res.report.passed()) << format_report(res.report);
  for (double v : sup_input(res.controller, res.cbf, s.input_bound)) EXPECT_LE(v, 2.0 - 1e-3 + 1e-6 * 2.0);
}

TEST(InputBound, TightLinfIsInfeasible) {
  ProblemSpec s = load("omni_local.prob");
  s.input_bound.bound = LinfBound{0.01};
  EXPECT_EQ(code_of([&] { synthesize(s, kBackend); }), ErrorCode::kInfeasible);
}

TEST(InputBound, BoxPolytopeIsCertified) {
  ProblemSpec s = load("omni_local.prob");
  s.input_bound.bound = PolytopeBound{mat(4, 2, {1, 0, -1, 0, 0, 1, 0, -1}), vec({1.5, 1.5, 1.5, 1.5})};
  const auto res = synthesize(s, kBackend);
  EXPECT_TRUE(res.report.passed()) << format_report(res.report);
  const auto sups = sup_input(res.controller, res.cbf, s.input_bound);
  ASSERT_EQ(sups.size(), 4u);
  for (double v : sups) EXPECT_LE(v, 1.5 - 0.5e-3 + 1e-6 * 1.5);
}

TEST(InputBound, GlobalBoundOnUnitDisk) {
  const auto res = synthesize(load("case1.prob"), kBackend);
  ASSERT_TRUE(res.report.passed()) << format_report(res.report);
  EXPECT_LE(sup_input(res.controller, res.cbf, res.spec.input_bound).at(0), 8.0 - 1e-3 + 8e-6);
  BuiltProgram bp = built(case1_unbounded());
  EXPECT_EQ(code_of([&] { add_global_input_bound_l2(bp, 1e-3, 1e-2); }), ErrorCode::kBudgetExhausted);
}

TEST(InputBound, GlobalBoundWithZeroGainReducesToOmegaPsd) {
  BuiltProgram bp = built(case1_unbounded());
  add_global_input_bound_l2(bp, 8.0, 1e-3);
  const LMIBlock* blk = find_lmi(bp.problem, "input l2 global");
  ASSERT_NE(blk, nullptr);
  Vector w = Vector::Zero(bp.problem.layout.size());
  bp.problem.layout.assign(*bp.omega_bar, Matrix::Identity(2, 2), w);
  EXPECT_GE(min_eigenvalue(blk->evaluate(w)), 0.0);
}

// ---- solving and synthesis ----------------------------------------------------

TEST(Synthesis, DoubleIntegratorObjective) {
  const auto res = synthesize(example1(), kBackend);
  EXPECT_NEAR(res.objective, 1.0, 0.1);
  EXPECT_TRUE(res.report.passed()) << format_report(res.report);
}

TEST(Synthesis, EmptySafeSetIsInfeasible) {
  EXPECT_EQ(code_of([] { synthesize(load("empty_safe.prob"), kBackend); }), ErrorCode::kInfeasible);
}

TEST(Synthesis, MixedPartitionIsCertified) {
  const auto res = synthesize(load("case2.prob"), kBackend);
  EXPECT_TRUE(res.report.passed()) << format_report(res.report);
  EXPECT_EQ(res.containment, "sos");
}

TEST(Synthesis, InvalidSpecIsRejected) {
  ProblemSpec s = integrator_box(2);
  s.initial_set.reset();
  EXPECT_EQ(code_of([&] { synthesize(s, kBackend); }), ErrorCode::kSpecInvalid);
}

TEST(Synthesis, InvarianceDerivativeNonnegativeEverywhere) {
  const auto res = synthesize(case1_unbounded(), kBackend);
  const Matrix& p = res.cbf.p();
  const Matrix acl = res.spec.system.A() + res.spec.system.B() * res.controller.k;
  const Matrix m = acl.transpose() * p + p * acl;
  EXPECT_GE(min_eigenvalue(m), -1e-6 * sym_norm(m));
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  int inside = 0;
  for (int i = 0; i < 10000; ++i) {
    const Vector xs = vec({u(rng), u(rng)});
    inside += res.cbf.value(xs) < 0.0;
    const Vector xdot = res.spec.system.A() * xs + res.spec.system.B() * res.controller(xs);
    EXPECT_GE(res.cbf.gradient(xs).dot(xdot), -1e-6 * sym_norm(m) * xs.squaredNorm());
  }
  EXPECT_GT(inside, 0);
}

// ---- controller recovery ---------------------------------------------------

TEST(Controller, ZeroYGivesConstantInput) {
  const auto c = recover_controller(Matrix::Identity(2, 2), Matrix::Zero(1, 2), Vector::Zero(2), vec({0.7}));
  EXPECT_EQ(c.k.norm(), 0.0);
  EXPECT_DOUBLE_EQ(c(vec({4, -3}))(0), 0.7);
}

TEST(Controller, DoubleIntegratorClosedForm) {
  const auto c = recover_controller(mat(2, 2, {2, 0, 0, -4}), mat(1, 2, {4, 4}), Vector::Zero(2), vec({0}));
  EXPECT_NEAR(c.k(0, 0), 2.0, 1e-14);
  EXPECT_NEAR(c.k(0, 1), -1.0, 1e-14);
}

TEST(Controller, ScaleInvariant) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g;
  Matrix l(3, 3), y(2, 3);
  for (Eigen::Index i = 0; i < l.size(); ++i) l.data()[i] = g(rng);
  for (Eigen::Index i = 0; i < y.size(); ++i) y.data()[i] = g(rng);
  const Matrix om = l * l.transpose() + Matrix::Identity(3, 3);
  const auto a = recover_controller(om, y, Vector::Zero(3), Vector::Zero(2));
  const auto b = recover_controller(7.5 * om, 7.5 * y, Vector::Zero(3), Vector::Zero(2));
  EXPECT_LE((a.k - b.k).norm(), 1e-10 * a.k.norm());
  EXPECT_LE((a.k * om - y).norm(), 1e-8 * y.norm());
}

TEST(Controller, IllConditionedOmegaRefused) {
  EXPECT_EQ(code_of([] {
              recover_controller(mat(2, 2, {1, 0, 0, 1e-14}), Matrix::Ones(1, 2), Vector::Zero(2), vec({0}));
            }),
            ErrorCode::kIllConditioned);
}

TEST(Controller, PublishedMixedGains) {
  const auto r = load_result(problem_path("case2_published.result"));
  EXPECT_DOUBLE_EQ(r.controller.k(0, 0), -2.0);
  EXPECT_DOUBLE_EQ(r.controller.k(0, 1), 38.9);
  EXPECT_DOUBLE_EQ(r.controller.k(1, 0), 76.8);
  EXPECT_DOUBLE_EQ(r.controller.k(1, 2), -0.5);
}

// ---- certificate audit -------------------------------------------------------

TEST(Verify, PublishedUnitDiskCertificatePasses) {
  const auto r = load_result(problem_path("case1_published.result"));
  const auto rep = check_certificate(r, Tolerances{});
  EXPECT_TRUE(rep.passed()) << format_report(rep);
  const Matrix& p = r.cbf.p();
  const Matrix acl = r.spec.system.A() + r.spec.system.B() * r.controller.k;
  const Matrix m = acl.transpose() * p + p * acl;
  // Computed directly from the printed P and K.
  EXPECT_NEAR(min_eigenvalue(m), 1.017e-3, 1e-5);
  EXPECT_NEAR(max_eigenvalue(p), 0.973, 5e-3);
}

TEST(Verify, PublishedMixedCertificateNeedsRoundingSlack) {
  const auto r = load_result(problem_path("case2_published.result"));
  EXPECT_FALSE(check_certificate(r, Tolerances{}).passed());
  const auto rep = check_certificate(r, Tolerances{}.for_published());
  EXPECT_TRUE(rep.passed()) << format_report(rep);
}

TEST(Verify, IdentitySanityLocal) {
  SynthesisResult r;
  r.spec = integrator_box(2);
  r.spec.system = LinearSystem(-Matrix::Identity(2, 2), Matrix::Identity(2, 2));
  std::get<LocalHalfspaces>(r.spec.safe_set).rows.clear();
  for (const auto& [a0, a1] : {std::pair{1.0, 0.0}, {-1.0, 0.0}, {0.0, 1.0}, {0.0, -1.0}}) {
    std::get<LocalHalfspaces>(r.spec.safe_set).rows.push_back({vec({a0, a1}), 1.0});
  }
  r.cbf = CbfFunction(Vector::Zero(2), Matrix::Identity(2, 2), Orientation::kSubLevelSafe);
  r.controller = AffineController{Matrix::Zero(2, 2), Vector::Zero(2), Vector::Zero(2)};
  r.center.c = Vector::Zero(2);
  r.center.d = Vector::Zero(2);
  const auto rep = check_certificate(r, Tolerances{});
  const auto* inv = rep.find("invariance");
  ASSERT_NE(inv, nullptr);
  EXPECT_EQ(inv->status, CheckStatus::kPass);
  // Margin is min eig of -M relative to |M|; here M = -2I.
  EXPECT_NEAR(inv->margin, 1.0, 1e-12);
}

TEST(Verify, TamperedOmegaFails) {
  auto r = synthesize(case1_unbounded(), kBackend);
  r.cbf = CbfFunction(r.cbf.c(), 0.5 * r.cbf.omega(), r.cbf.orientation());
  EXPECT_FALSE(check_certificate(r, Tolerances{}).passed());
}

TEST(Verify, PublishedUnitDiskSupremum) {
  const auto r = load_result(problem_path("case1_published.result"));
  InputBoundSpec l2;
  l2.bound = L2Bound{8.0};
  const double sup = sup_input(r.controller, r.cbf, l2).at(0);
  const Matrix& k = r.controller.k;
  EXPECT_NEAR(sup, (k * r.cbf.omega() * k.transpose())(0, 0), 1e-10);
  EXPECT_NEAR(sup, 7.89, 0.05);
}

TEST(Verify, ZeroGainSupIsOffsetNorm) {
  const Vector d = vec({0.3, -1.2});
  EXPECT_NEAR(ball_sup_squared(Matrix::Zero(2, 3), d), d.squaredNorm(), 1e-15);
}

TEST(Verify, ExactSupMatchesSampling) {
  std::mt19937_64 rng(21);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 20; ++trial) {
    Matrix l(3, 3), k(2, 3);
    for (Eigen::Index i = 0; i < l.size(); ++i) l.data()[i] = g(rng);
    for (Eigen::Index i = 0; i < k.size(); ++i) k.data()[i] = g(rng);
    const Vector d = vec({g(rng), g(rng)});
    const CbfFunction cbf(Vector::Zero(3), l * l.transpose() + 0.1 * Matrix::Identity(3, 3),
                          Orientation::kSubLevelSafe);
    const AffineController ctrl{k, d, Vector::Zero(3)};
    for (InputBoundSpec b : {InputBoundSpec{L2Bound{1.0}}, InputBoundSpec{LinfBound{1.0}},
                             InputBoundSpec{PolytopeBound{mat(3, 2, {1, 0, 0, 1, -1, -1}), vec({1, 1, 1})}}}) {
      const auto exact = sup_input(ctrl, cbf, b);
      const auto sampled = sup_input_sampled(ctrl, cbf, b, 20000, 100 + trial);
      ASSERT_EQ(exact.size(), sampled.size());
      for (std::size_t i = 0; i < exact.size(); ++i) {
        EXPECT_LE(sampled[i], exact[i] + 1e-9 * std::max(1.0, std::abs(exact[i])));
        EXPECT_LE(exact[i] - sampled[i], 1e-3 * std::max(1.0, std::abs(exact[i])));
      }
    }
  }
}

TEST(Verify, ContainmentOracleNestedBalls) {
  const Box box{vec({-1, -1}), vec({1, 1})};
  auto inner = [](const Vector& v) { return v.squaredNorm() <= 0.25; };
  const auto ok = containment_oracle(inner, [](const Vector& v) { return 1.0 - v.squaredNorm(); },
                                                    box, 2000, 1);
  EXPECT_EQ(ok.tested, 2000);
  EXPECT_TRUE(ok.violations.empty());
  auto wide = [](const Vector& v) { return v.squaredNorm() <= 1.0; };
  const auto bad = containment_oracle(wide, [](const Vector& v) { return 0.5 - v.squaredNorm(); },
                                                     box, 2000, 1);
  EXPECT_FALSE(bad.violations.empty());
  EXPECT_LT(bad.worst_margin, 0.0);
}

TEST(Verify, PublishedUnitDiskContainsObstacle) {
  const auto r = load_result(problem_path("case1_published.result"));
  const Box box{vec({-1, -1}), vec({1, 1})};
  auto disk = [](const Vector& v) { return v.squaredNorm() <= 1.0; };
  const auto res = containment_oracle(disk, [&](const Vector& v) { return -r.cbf.value(v); }, box,
                                                     10000, 3);
  EXPECT_EQ(res.tested, 10000);
  EXPECT_TRUE(res.violations.empty());
}

TEST(Verify, ShrunkBarrierViolatesContainment) {
  const auto r = load_result(problem_path("case1_published.result"));
  const auto shrunk = CbfFunction::from_p(r.cbf.c(), 2.0 * r.cbf.p(), r.cbf.orientation());
  const Box box{vec({-1, -1}), vec({1, 1})};
  auto disk = [](const Vector& v) { return v.squaredNorm() <= 1.0; };
  const auto res = containment_oracle(disk, [&](const Vector& v) { return -shrunk.value(v); }, box,
                                                     10000, 3);
  EXPECT_FALSE(res.violations.empty());
}

TEST(Verify, ReportIsDeterministic) {
  const auto r = load_result(problem_path("case1_published.result"));
  const auto a = check_certificate(r, Tolerances{});
  const auto b = check_certificate(r, Tolerances{});
  EXPECT_EQ(format_report(a), format_report(b));
}

// ---- simulation --------------------------------------------------------------

TEST(Simulate, DoubleIntegratorMatchesClosedForm) {
  const ProblemSpec s = example1();
  const auto ctrl = recover_controller(mat(2, 2, {2, 0, 0, -4}), mat(1, 2, {4, 4}), Vector::Zero(2), vec({0}));
  const CbfFunction cbf(Vector::Zero(2), mat(2, 2, {2, 0, 0, -4}), Orientation::kSuperLevelSafe);
  SimulationOptions opt;
  const auto tr = simulate_closed_loop(s.system, ctrl, vec({2, 0}), cbf, opt);
  const double e = std::exp(1.0);
  const double em2 = std::exp(-2.0);
  const Vector expected = (2.0 / 3.0) * vec({em2 + 2 * e, -2 * em2 + 2 * e});
  EXPECT_LE((tr.final_state - expected).norm(), 1e-6);
  EXPECT_LE((tr.exact_final - expected).norm(), 1e-9 * expected.norm());
  EXPECT_GE(tr.barrier_extremum, cbf.value(vec({2, 0})) - 1e-12);
}

TEST(Simulate, ZeroDynamicsStayPut) {
  const LinearSystem sys(Matrix::Zero(2, 2), mat(2, 1, {0, 1}));
  const AffineController ctrl{Matrix::Zero(1, 2), vec({0}), Vector::Zero(2)};
  const CbfFunction cbf(Vector::Zero(2), Matrix::Identity(2, 2), Orientation::kSubLevelSafe);
  SimulationOptions opt;
  opt.horizon = 3.0;
  const auto tr = simulate_closed_loop(sys, ctrl, vec({0.3, -0.4}), cbf, opt);
  for (const auto& xs : tr.x) EXPECT_EQ(xs, vec({0.3, -0.4}));
}

TEST(Simulate, ZeroHorizonRecordsOneRow) {
  const auto r = load_result(problem_path("case1_published.result"));
  SimulationOptions opt;
  opt.horizon = 0.0;
  const auto tr = simulate_closed_loop(r.spec.system, r.controller, vec({1.5, 0}), r.cbf, opt);
  EXPECT_EQ(tr.t.size(), 1u);
  EXPECT_EQ(tr.final_state, vec({1.5, 0}));
}

TEST(Simulate, RungeKuttaIsFourthOrder) {
  const LinearSystem sys(mat(2, 2, {0, 1, -2, -0.3}), mat(2, 1, {0, 1}));
  const AffineController ctrl{mat(1, 2, {-1, 0.5}), vec({0}), Vector::Zero(2)};
  const CbfFunction cbf(Vector::Zero(2), Matrix::Identity(2, 2), Orientation::kSubLevelSafe);
  SimulationOptions opt;
  opt.horizon = 2.0;
  opt.record = false;
  opt.dt = 0.1;
  const double e1 = simulate_closed_loop(sys, ctrl, vec({1, 0}), cbf, opt).endpoint_error;
  opt.dt = 0.05;
  const double e2 = simulate_closed_loop(sys, ctrl, vec({1, 0}), cbf, opt).endpoint_error;
  EXPECT_NEAR(std::log2(e1 / e2), 4.0, 0.3);
}

TEST(Simulate, UnstableLoopDiverges) {
  const LinearSystem sys(Matrix::Identity(1, 1), mat(1, 1, {1}));
  const AffineController ctrl{Matrix::Zero(1, 1), vec({0}), Vector::Zero(1)};
  const CbfFunction cbf(Vector::Zero(1), Matrix::Identity(1, 1), Orientation::kSubLevelSafe);
  SimulationOptions opt;
  opt.horizon = 100.0;
  opt.dt = 1e-2;
  const auto tr = simulate_closed_loop(sys, ctrl, vec({1}), cbf, opt);
  EXPECT_TRUE(tr.diverged);
  EXPECT_NEAR(tr.blowup_time, std::log(1e12), 0.5);
}

TEST(Simulate, MixedPartitionStaysSafeFromBoundary) {
  const auto res = synthesize(load("case2.prob"), kBackend);
  ASSERT_TRUE(res.report.passed());
  // Point on the zero level set, pushed 1e-3 into the safe side.
  const Matrix& p = res.cbf.p();
  const Vector dir = vec({1, 0, 0});
  const double scale = std::sqrt(1.0 / dir.dot(p * dir));
  Vector x0 = scale * dir;
  x0 *= std::sqrt(1.0 + 1e-3);
  SimulationOptions opt;
  opt.horizon = 10.0;
  opt.record = false;
  const auto tr = simulate_closed_loop(res.spec.system, res.controller, x0, res.cbf, opt);
  EXPECT_NEAR(res.cbf.value(x0), 1e-3, 1e-9);
  EXPECT_GE(tr.barrier_extremum, -5e-3);
}

// ---- QP filter reference -----------------------------------------------------

TEST(Filter, OutsideObstacleNeedsNoInput) {
  const ProblemSpec s = case1_unbounded();
  const Polynomial sp = std::get<GlobalUnion>(s.safe_set).pieces.at(0);
  const auto q = cbf_qp_reference(sp, 10.0, s.system, vec({1, 1}));
  // 8 - 2 + 8 - 10
  EXPECT_NEAR(q.f, 4.0, 1e-12);
  EXPECT_NEAR(q.g, 4.0, 1e-12);
  EXPECT_FALSE(q.unbounded);
  EXPECT_EQ(q.u, 0.0);
}

TEST(Filter, DegenerateDirectionIsUnbounded) {
  const ProblemSpec s = case1_unbounded();
  const Polynomial sp = std::get<GlobalUnion>(s.safe_set).pieces.at(0);
  const auto q = cbf_qp_reference(sp, 10.0, s.system, vec({0.5, -0.5}));
  EXPECT_NEAR(q.f, -5.5, 1e-12);
  EXPECT_EQ(q.g, 0.0);
  EXPECT_TRUE(q.unbounded);
}

TEST(Filter, ScanCapsNearDegenerateLine) {
  const ProblemSpec s = case1_unbounded();
  const Polynomial sp = std::get<GlobalUnion>(s.safe_set).pieces.at(0);
  const auto t0 = std::chrono::steady_clock::now();
  const auto grid = pathology_scan(sp, 10.0, s.system, 101, 101, -1.0, 1.0, 100.0);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  EXPECT_EQ(grid.size(), 101u * 101u);
  EXPECT_LT(secs, 0.1);
  bool capped = false;
  for (const auto& gp : grid) {
    if (std::abs(gp.x1 + gp.x2) < 1e-12 && gp.x1 * gp.x1 + gp.x2 * gp.x2 < 0.5) capped |= gp.value == 100.0;
    const auto q = cbf_qp_reference(sp, 10.0, s.system, vec({gp.x1, gp.x2}));
    if (q.f >= 0.0) {
      EXPECT_EQ(gp.value, 0.0);
    }
  }
  EXPECT_TRUE(capped);
}
