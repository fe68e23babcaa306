// Model, polynomial, basis, Gram compilation, conic plumbing and text formats.

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <set>
#include <sstream>

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

bool has_error(const ValidationReport& r, const std::string& needle) {
  for (const auto& e : r.errors) {
    if (e.find(needle) != std::string::npos) return true;
  }
  return false;
}

Solution solve_default(const ConicProblem& p) { return solve(p, InteriorPointBackend{}); }

double naive_eval(const Polynomial& p, const Vector& pt) {
  double total = 0.0;
  for (const auto& [m, c] : p.terms()) {
    double term = c;
    for (std::size_t i = 0; i < m.size(); ++i) {
      for (int e = 0; e < m[i]; ++e) term *= pt(static_cast<Eigen::Index>(i));
    }
    total += term;
  }
  return total;
}

}  // namespace

// ---- validation -------------------------------------------------------------

TEST(Validate, DoubleIntegratorGlobalIsValid) {
  const auto r = validate_spec(example1());
  EXPECT_TRUE(r.ok()) << (r.errors.empty() ? "" : r.errors.front());
}

TEST(Validate, LocalWithoutInitialSetIsRejected) {
  ProblemSpec s = integrator_box(2);
  s.initial_set.reset();
  const auto r = validate_spec(s);
  EXPECT_FALSE(r.ok());
  EXPECT_TRUE(has_error(r, "initial set required"));
}

TEST(Validate, GlobalSafeSetOnUnconstrainedCoordinateIsRejected) {
  ProblemSpec s = example1();
  std::get<GlobalUnion>(s.safe_set).pieces = {x(2, 1) * x(2, 1) - k(2, 1)};
  const auto r = validate_spec(s);
  EXPECT_FALSE(r.ok());
  EXPECT_TRUE(has_error(r, "depends on x2"));
}

TEST(Validate, ModeAndSafeSetMustAgree) {
  ProblemSpec s = integrator_box(2);
  s.mode = DesignMode::kGlobal;
  EXPECT_FALSE(validate_spec(s).ok());
}

TEST(Validate, UnstabilizableSystemOnlyWarns) {
  ProblemSpec s = example1();
  s.system = LinearSystem(mat(2, 2, {0, 1, 0, 1}), mat(2, 1, {0, 0}));
  const auto r = validate_spec(s);
  EXPECT_TRUE(r.ok());
  bool warned = false;
  for (const auto& w : r.warnings) warned |= w.find("stabilizable") != std::string::npos;
  EXPECT_TRUE(warned);
}

TEST(Validate, ZeroPolytopeRowIsRejected) {
  ProblemSpec s = integrator_box(2);
  s.input_bound.bound = PolytopeBound{mat(1, 2, {0, 0}), vec({1})};
  EXPECT_TRUE(has_error(validate_spec(s), "all zeros"));
}

// ---- centers ----------------------------------------------------------------

TEST(Center, ZeroCenterHasZeroOffset) {
  const auto cd = prepare_center(example1().system, Vector::Zero(2), 1e-9);
  EXPECT_EQ(cd.d.norm(), 0.0);
  EXPECT_EQ(cd.residual, 0.0);
}

TEST(Center, PositionOnlyCenterNeedsNoOffset) {
  const auto cd = prepare_center(example1().system, vec({3.5, 0}), 1e-9);
  EXPECT_NEAR(cd.d(0), 0.0, 1e-15);
  EXPECT_NEAR(cd.residual, 0.0, 1e-15);
}

TEST(Center, VelocityCenterViolatesRankCondition) {
  EXPECT_EQ(code_of([] { prepare_center(example1().system, vec({0, 1}), 1e-9); }),
            ErrorCode::kRankConditionViolated);
}

TEST(Center, RecoversOffsetAndIsIdempotent) {
  // xdot = A x + B u with A c = -B d solvable for d = 2.
  const LinearSystem sys(mat(2, 2, {-1, 0, 0, 0}), mat(2, 1, {1, 0}));
  const auto cd = prepare_center(sys, vec({2, 0}), 1e-9);
  EXPECT_NEAR(cd.d(0), 2.0, 1e-12);
  EXPECT_LE((sys.B() * cd.d + sys.A() * cd.c).norm(), 1e-9);
  const auto again = prepare_center(sys, cd.c, 1e-9);
  EXPECT_EQ(again.d, cd.d);
}

// ---- polynomials ------------------------------------------------------------

TEST(Polynomial, UnitCircleBoundaryPoint) {
  const Polynomial s = x(2, 0) * x(2, 0) + x(2, 1) * x(2, 1) - k(2, 1);
  EXPECT_EQ(s.evaluate(vec({1, 0})), 0.0);
}

TEST(Polynomial, PublishedBarrierAtOriginIsMinusOne) {
  const Matrix p = mat(2, 2, {0.88391, -0.253835, -0.253835, 0.25205});
  const auto cbf = CbfFunction::from_p(Vector::Zero(2), p, Orientation::kSuperLevelSafe);
  EXPECT_DOUBLE_EQ(cbf.value(Vector::Zero(2)), -1.0);
  EXPECT_NEAR(cbf.polynomial().evaluate(Vector::Zero(2)), -1.0, 1e-15);
}

TEST(Polynomial, RandomQuarticsMatchNaiveEvaluation) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int trial = 0; trial < 50; ++trial) {
    const Polynomial p = random_poly(rng, 3, 4);
    const Vector pt = vec({u(rng), u(rng), u(rng)});
    const double ref = naive_eval(p, pt);
    EXPECT_NEAR(p.evaluate(pt), ref, 1e-12 * std::max(1.0, std::abs(ref)));
  }
}

TEST(Polynomial, EvaluationIsLinearInCoefficients) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  for (int trial = 0; trial < 50; ++trial) {
    const Polynomial p = random_poly(rng, 2, 4);
    const Polynomial q = random_poly(rng, 2, 3);
    const Vector pt = vec({u(rng), u(rng)});
    const double lhs = (p + q).evaluate(pt);
    const double rhs = p.evaluate(pt) + q.evaluate(pt);
    EXPECT_NEAR(lhs, rhs, 1e-12 * std::max(1.0, std::abs(rhs)));
  }
}

TEST(Polynomial, DimensionMismatchThrows) {
  const Polynomial p = x(2, 0);
  EXPECT_EQ(code_of([&] { p.evaluate(vec({1, 2, 3})); }), ErrorCode::kDimensionMismatch);
}

TEST(Polynomial, ShiftAndDerivative) {
  const Polynomial p = x(2, 0) * x(2, 0) * x(2, 1);
  const Polynomial shifted = p.shifted(vec({1, -1}));
  EXPECT_NEAR(shifted.evaluate(vec({0.5, 0.25})), p.evaluate(vec({1.5, -0.75})), 1e-14);
  EXPECT_NEAR(p.derivative(0).evaluate(vec({3, 2})), 12.0, 1e-14);
}

// ---- monomial bases ---------------------------------------------------------

TEST(Basis, TwoVariablesDegreeOne) {
  const auto b = build_basis(2, 1);
  ASSERT_EQ(b.size(), 3);
  EXPECT_EQ(b[0], (Monomial{0, 0}));
  EXPECT_EQ(b[1], (Monomial{1, 0}));
  EXPECT_EQ(b[2], (Monomial{0, 1}));
}

TEST(Basis, TwoVariablesDegreeTwo) { EXPECT_EQ(build_basis(2, 2).size(), 6); }

TEST(Basis, MatchesExhaustiveEnumeration) {
  for (int n = 1; n <= 3; ++n) {
    for (int d = 0; d <= 4; ++d) {
      std::set<Monomial> expected;
      Monomial m(n, 0);
      std::function<void(int)> rec = [&](int var) {
        if (var == n) {
          if (total_degree(m) <= d) expected.insert(m);
          return;
        }
        for (int e = 0; e <= d; ++e) {
          m[var] = e;
          rec(var + 1);
        }
        m[var] = 0;
      };
      rec(0);
      const auto b = build_basis(n, d);
      std::set<Monomial> got(b.monomials().begin(), b.monomials().end());
      EXPECT_EQ(got, expected) << "n=" << n << " d=" << d;
      EXPECT_EQ(static_cast<std::size_t>(b.size()), expected.size());
      for (int i = 1; i < b.size(); ++i) EXPECT_TRUE(GradedLex{}(b[i - 1], b[i]));
    }
  }
}

TEST(Basis, OrderingIsDeterministic) {
  EXPECT_EQ(build_basis(3, 3).monomials(), build_basis(3, 3).monomials());
}

// ---- Gram compilation -------------------------------------------------------

TEST(Gram, SquareOfVariableHasUniqueGram) {
  ConicProblem p;
  const Polynomial e = x(1, 0) * x(1, 0);
  const auto g = gram_constraints(p, AffinePoly::from(e), build_basis(1, 1), "q");
  EXPECT_EQ(p.equalities.size(), 3u);
  const auto sol = solve_default(p);
  ASSERT_TRUE(sol.optimal()) << sol.message;
  const Matrix q = p.layout.value(g.q, sol.values);
  EXPECT_NEAR(q(0, 0), 0.0, 1e-7);
  EXPECT_NEAR(q(0, 1), 0.0, 1e-7);
  EXPECT_NEAR(q(1, 1), 1.0, 1e-7);
}

TEST(Gram, SquaredSumIsFeasibleWithRankOneWitness) {
  ConicProblem p;
  const Polynomial s = x(2, 0) + x(2, 1);
  const auto basis = build_basis(2, 1);
  const auto g = gram_constraints(p, AffinePoly::from(s * s), basis, "q");
  const auto sol = solve_default(p);
  ASSERT_TRUE(sol.optimal()) << sol.message;
  const Matrix q = p.layout.value(g.q, sol.values);
  const Vector v = vec({0, 1, 1});
  EXPECT_LE((q - v * v.transpose()).norm(), 1e-6);
  EXPECT_EQ(numerical_rank(q, 1e-6), 1);
}

TEST(Gram, OddPolynomialIsInfeasible) {
  ConicProblem p;
  gram_constraints(p, AffinePoly::from(x(1, 0)), build_basis(1, 1), "q");
  EXPECT_EQ(solve_default(p).status, SolveStatus::kInfeasible);
}

TEST(Gram, DegreeOverflowIsReported) {
  ConicProblem p;
  const Polynomial cubic = x(1, 0) * x(1, 0) * x(1, 0);
  EXPECT_EQ(code_of([&] { gram_constraints(p, AffinePoly::from(cubic), build_basis(1, 1), "q"); }),
            ErrorCode::kDegreeOverflow);
}

TEST(Gram, RandomSumsOfSquaresRoundTrip) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    Polynomial p(2);
    for (int i = 0; i < 3; ++i) {
      const Polynomial q = random_poly(rng, 2, 2);
      p = p + q * q;
    }
    ConicProblem cp;
    const auto basis = build_basis(2, 2);
    const auto g = gram_constraints(cp, AffinePoly::from(p), basis, "q");
    const auto sol = solve_default(cp);
    ASSERT_TRUE(sol.optimal()) << sol.message;
    Polynomial back(2);
    for (const auto& w : extract_sos_witness(cp.layout.value(g.q, sol.values), basis, 1e-7)) back = back + w * w;
    EXPECT_LE(coeff_error(back, p), 1e-8 * std::max(1.0, p.max_abs_coefficient()));
  }
}

// ---- S-procedure ------------------------------------------------------------

TEST(SProcedure, ConstantWithMarginIsFeasible) {
  ConicProblem p;
  sprocedure_emptiness(p, AffinePoly::from(k(1, 1)), {}, 0, AffineExpr(0.5), "t");
  EXPECT_TRUE(solve_default(p).optimal());
}

TEST(SProcedure, NegativeConstantIsInfeasible) {
  ConicProblem p;
  sprocedure_emptiness(p, AffinePoly::from(k(1, -1)), {}, 0, AffineExpr(0.0), "t");
  EXPECT_EQ(solve_default(p).status, SolveStatus::kInfeasible);
}

namespace {

// 1 - R x^2 with x^2 - 1 >= 0 and a constant multiplier: feasible iff R <= 1 - eps.
SolveStatus slab_sprocedure(double r_value) {
  ConicProblem p;
  const VarRef r = p.layout.add_scalar("R");
  AffinePoly target = AffinePoly::from(k(1, 1));
  target.add_term(Monomial{2}, AffineExpr::var(r.index(0), -1.0));
  sprocedure_emptiness(p, target, {x(1, 0) * x(1, 0) - k(1, 1)}, 0, AffineExpr(1e-3), "slab");
  p.add_equality("pin", AffineExpr::var(r.index(0)) - AffineExpr(r_value));
  return solve_default(p).status;
}

}  // namespace

TEST(SProcedure, SlabConditionMatchesClosedForm) {
  EXPECT_EQ(slab_sprocedure(0.9), SolveStatus::kOptimal);
  EXPECT_EQ(slab_sprocedure(0.998), SolveStatus::kOptimal);
  EXPECT_EQ(slab_sprocedure(1.1), SolveStatus::kInfeasible);
}

TEST(SProcedure, OddMultiplierDegreeRejected) {
  ConicProblem p;
  EXPECT_EQ(code_of([&] { sprocedure_emptiness(p, AffinePoly::from(k(1, 1)), {x(1, 0)}, 1, AffineExpr(0.0), "t"); }),
            ErrorCode::kSpecInvalid);
}

// ---- witness extraction -----------------------------------------------------

TEST(Witness, IdentityGramGivesOneAndX) {
  const auto basis = build_basis(1, 1);
  const auto w = extract_sos_witness(Matrix::Identity(2, 2), basis, 1e-9);
  ASSERT_EQ(w.size(), 2u);
  Polynomial sum(1);
  for (const auto& p : w) sum = sum + p * p;
  EXPECT_LE(coeff_error(sum, k(1, 1) + x(1, 0) * x(1, 0)), 1e-14);
}

TEST(Witness, RankOneGramGivesSingleSquare) {
  const Vector v = vec({0, 1, 1});
  const auto w = extract_sos_witness(v * v.transpose(), build_basis(2, 1), 1e-9);
  ASSERT_EQ(w.size(), 1u);
  const Polynomial target = x(2, 0) + x(2, 1);
  EXPECT_LE(std::min(coeff_error(w[0], target), coeff_error(w[0], -target)), 1e-12);
}

TEST(Witness, RandomPsdRoundTrip) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g;
  const auto basis = build_basis(2, 2);
  for (int trial = 0; trial < 20; ++trial) {
    Matrix l(4, basis.size());
    for (Eigen::Index i = 0; i < l.size(); ++i) l.data()[i] = g(rng);
    const Matrix q = l.transpose() * l;
    Polynomial sum(2);
    for (const auto& p : extract_sos_witness(q, basis, 1e-9)) sum = sum + p * p;
    EXPECT_LE(coeff_error(sum, gram_polynomial(q, basis)), 1e-8);
  }
}

TEST(Witness, IndefiniteGramIsNotPsd) {
  EXPECT_EQ(code_of([] { extract_sos_witness(mat(2, 2, {1, 0, 0, -1}), build_basis(1, 1), 1e-9); }),
            ErrorCode::kNotPsd);
}

// ---- layout and conic plumbing ----------------------------------------------

TEST(Layout, SymmetricBlocksShareMirroredEntries) {
  DecisionLayout l;
  const VarRef s = l.add_symmetric("S", 3);
  const VarRef y = l.add_dense("Y", 2, 3);
  EXPECT_EQ(l.size(), 6 + 6);
  EXPECT_EQ(s.index(0, 2), s.index(2, 0));
  EXPECT_NE(y.index(0, 1), y.index(1, 0));
}

TEST(Conic, SvecSmatRoundTrip) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g;
  Matrix m(4, 4);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = g(rng);
  m = symmetrize(m);
  const Vector v = svec(m);
  EXPECT_EQ(v.size(), svec_length(4));
  EXPECT_NEAR(v.squaredNorm(), m.squaredNorm(), 1e-12);
  EXPECT_LE((smat(v, 4) - m).norm(), 1e-14);
}

TEST(Conic, StandardFormSerializationRoundTrip) {
  const auto bp = build_program(example1(), prepare_center(example1().system, Vector::Zero(2)));
  const StandardForm sf = to_standard_form(bp.problem);
  std::stringstream ss;
  write_standard_form(ss, sf);
  const StandardForm back = read_standard_form(ss);
  EXPECT_EQ(back.num_vars, sf.num_vars);
  EXPECT_EQ(back.zero_rows, sf.zero_rows);
  EXPECT_EQ(back.nonneg_rows, sf.nonneg_rows);
  EXPECT_EQ(back.psd_sizes, sf.psd_sizes);
  EXPECT_EQ(back.c, sf.c);
  EXPECT_EQ(back.b, sf.b);
  EXPECT_EQ(back.dense_a(), sf.dense_a());
}

TEST(Conic, BoxedLinearProgram) {
  // min -w s.t. 1 - w >= 0.
  ConicProblem p;
  const VarRef w = p.layout.add_scalar("w");
  p.objective = AffineExpr::var(w.index(0), -1.0);
  p.add_inequality("cap", AffineExpr(1.0) - AffineExpr::var(w.index(0)));
  p.add_lmi("w psd", AffineMatrix::variable(w));
  const auto sol = solve_default(p);
  ASSERT_TRUE(sol.optimal());
  EXPECT_NEAR(sol.values(w.index(0)), 1.0, 1e-7);
}

// ---- problem files ----------------------------------------------------------

namespace {

std::string parse_error(const std::string& text) {
  try {
    parse_problem_string(text);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kParse);
    return e.what();
  }
  ADD_FAILURE() << "expected a parse error for:\n" << text;
  return {};
}

const char* kGood =
    "[system]\nA = 0 1; 0 0\nB = 0; 1\n[partition]\nn_bar = 1\n[mode]\nglobal\n"
    "[safe_set]\nx1^2 - 1\n[center]\n0 0\n";

}  // namespace

TEST(ProblemFile, ParsesDoubleIntegrator) {
  const auto s = parse_problem_string(kGood);
  EXPECT_EQ(s.system.n(), 2);
  EXPECT_EQ(s.partition.n_bar, 1);
  EXPECT_EQ(s.partition.n_under, 1);
  EXPECT_TRUE(validate_spec(s).ok());
  const auto& g = std::get<GlobalUnion>(s.safe_set);
  EXPECT_EQ(g.pieces.at(0), x(2, 0) * x(2, 0) - k(2, 1));
}

TEST(ProblemFile, PolynomialGrammar) {
  const Polynomial p = parse_polynomial("3*x1^2 - 2 x2 + (x1 + 1)^2 - -1", 2);
  const Polynomial ref = 3.0 * x(2, 0) * x(2, 0) - 2.0 * x(2, 1) + (x(2, 0) + k(2, 1)).pow(2) + k(2, 1);
  EXPECT_LE(coeff_error(p, ref), 1e-15);
  EXPECT_NE(parse_error("[system]\nA = 0\nB = 1\n[mode]\nglobal\n[safe_set]\nx3 - 1\n").find("line 7"),
            std::string::npos);
}

TEST(ProblemFile, ErrorsCarryLineNumbers) {
  EXPECT_NE(parse_error("[system]\nA = 0 1; 0 zero\nB = 0; 1\n").find("line 2"), std::string::npos);
  EXPECT_NE(parse_error("A = 1\n").find("line 1"), std::string::npos);
  EXPECT_NE(parse_error(std::string(kGood) + "[mystery]\n").find("line 12"), std::string::npos);
  EXPECT_NE(parse_error(std::string(kGood) + "[options]\nwarp = 9\n").find("unknown key"), std::string::npos);
  EXPECT_NE(parse_error(std::string(kGood) + "[center]\n0 0\n").find("duplicate section"), std::string::npos);
  EXPECT_NE(parse_error("[system]\nA = 1\nA = 2\nB = 1\n").find("line 3"), std::string::npos);
  EXPECT_NE(parse_error("[system]\nA = 0 1; 0\nB = 1; 1\n").find("line 2"), std::string::npos);
}

TEST(ProblemFile, ShippedProblemsRoundTrip) {
  int seen = 0;
  for (const auto& entry : std::filesystem::directory_iterator(QCBF_PROBLEMS_DIR)) {
    if (entry.path().extension() != ".prob") continue;
    ++seen;
    const ProblemSpec s = load_problem(entry.path().string());
    const std::string once = write_problem(s);
    const std::string twice = write_problem(parse_problem_string(once));
    EXPECT_EQ(once, twice) << entry.path();
    EXPECT_EQ(spec_hash(s), spec_hash(parse_problem_string(once)));
  }
  EXPECT_GE(seen, 5);
}

TEST(ProblemFile, MissingFileIsIoError) {
  EXPECT_EQ(code_of([] { load_problem("/nonexistent/none.prob"); }), ErrorCode::kIo);
}

// ---- result documents -------------------------------------------------------

TEST(ResultFile, SynthesizedResultRoundTripsWithIdenticalReport) {
  const auto res = synthesize(example1(), InteriorPointBackend{});
  std::istringstream in(result_to_string(res));
  const auto back = read_result(in);
  EXPECT_EQ(back.cbf.omega(), res.cbf.omega());
  EXPECT_EQ(back.controller.k, res.controller.k);
  EXPECT_EQ(back.controller.d, res.controller.d);
  EXPECT_EQ(spec_hash(back.spec), spec_hash(res.spec));
  Tolerances t;
  t.seed = res.spec.options.seed;
  t.sample_count = res.spec.options.sample_count;
  const auto rep = check_certificate(back, t);
  ASSERT_EQ(rep.checks.size(), res.report.checks.size());
  for (std::size_t i = 0; i < rep.checks.size(); ++i) {
    EXPECT_EQ(rep.checks[i].name, res.report.checks[i].name);
    EXPECT_EQ(rep.checks[i].status, res.report.checks[i].status);
    EXPECT_EQ(rep.checks[i].margin, res.report.checks[i].margin) << rep.checks[i].name;
  }
}

TEST(ResultFile, TamperedProblemFailsHashCheck) {
  const auto res = synthesize(example1(), InteriorPointBackend{});
  std::string text = result_to_string(res);
  const std::string piece = "-1 + 1 * x1^2";
  const auto pos = text.find(piece);
  ASSERT_NE(pos, std::string::npos);
  text.replace(pos, piece.size(), "-4 + 1 * x1^2");
  std::istringstream in(text);
  EXPECT_EQ(code_of([&] { read_result(in); }), ErrorCode::kParse);
}

TEST(ResultFile, PublishedCertificateRecoversOffset) {
  const auto r = load_result(problem_path("case2_published.result"));
  EXPECT_EQ(r.source, "external");
  EXPECT_EQ(r.controller.d.size(), 2);
  EXPECT_LE(r.controller.d.norm(), 1e-12);
}
