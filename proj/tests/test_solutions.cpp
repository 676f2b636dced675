#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "infharm/catalogue.hpp"
#include "infharm/solutions.hpp"
#include "infharm/verify.hpp"

using namespace infharm;

namespace {
constexpr double pi = std::numbers::pi;

bool verifies(const SeparatedSolution& sol, std::size_t n = 20) {
  const auto steps = default_h_ladder();
  return verify_solution(sol, sample_points(sol, n, 0), steps).summary.passes;
}
}  // namespace

TEST(CaseI, Examples) {
  const auto s = build_thm1_i(0.5, 0.5);
  EXPECT_NEAR(evaluate(s, {4.0, 0.0}), 2.0, 1e-14);
  EXPECT_NEAR(evaluate(s, {1.0, 2.0}), std::exp(1.0), 1e-14);
  const auto lin = build_thm1_i(1.0, 0.0);
  EXPECT_NEAR(evaluate(lin, {3.0, 0.4}), 3.0, 1e-14);
  EXPECT_THROW(build_thm1_i(0.5, 0.6), ConstraintError);
}

TEST(CaseI, CircleValidation) {
  EXPECT_TRUE(validate_case_i(0.5, 0.5));
  EXPECT_TRUE(validate_case_i(0.0, 0.0));
  EXPECT_TRUE(validate_case_i(1.0, 0.0));
  EXPECT_TRUE(validate_case_i(0.25, std::sqrt(3.0) / 4));
  EXPECT_FALSE(validate_case_i(0.5, 0.6));
  EXPECT_FALSE(validate_case_i(2.0, 0.0));
}

TEST(CaseI, WholeCircleVerifies) {
  for (int k = 0; k < 16; ++k) {
    const double phi = 2 * pi * k / 16;
    const double A = 0.5 + 0.5 * std::cos(phi), B = 0.5 * std::sin(phi);
    EXPECT_TRUE(verifies(build_thm1_i(A, B))) << A << " " << B;
  }
}

TEST(Aronsson, ClosedForms) {
  EXPECT_DOUBLE_EQ(closed_aronsson(1.0, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(closed_aronsson(0.0, 1.0), -1.0);
  EXPECT_DOUBLE_EQ(closed_aronsson(1.0, 1.0), 0.0);
  EXPECT_DOUBLE_EQ(closed_aronsson_negexp(1.0, 0.0), 1.0);
  EXPECT_NEAR(closed_aronsson_negexp(1.0, pi), -1.0, 1e-15);
  EXPECT_THROW(closed_aronsson_negexp(0.0, 0.0), DomainError);
  EXPECT_THROW(closed_aronsson_negexp(-1.0, 0.0), DomainError);
}

TEST(Aronsson, SolutionsMatchClosedForms) {
  const auto a = build_aronsson();
  const auto b = build_aronsson_negexp();
  for (double r : {0.3, 1.0, 2.7})
    for (double t = -3.0; t <= 3.0; t += 0.13) {
      const double x = r * std::cos(t), y = r * std::sin(t);
      EXPECT_NEAR(evaluate(a, {r, t}), closed_aronsson(x, y), 1e-12 * (1 + r * r));
      EXPECT_NEAR(evaluate(b, {r, t}), closed_aronsson_negexp(r, t), 1e-12 / r);
    }
  EXPECT_TRUE(verifies(a));
  EXPECT_TRUE(verifies(b));
}

TEST(Aronsson, TabulatedRatioReconstructsClosedForm) {
  // the A = 4/3 table, normalized at theta = 0, equals cos^{4/3} - sin^{4/3}
  const auto s = build_thm1_ii(4.0 / 3.0);
  for (double t = 0.0; t <= pi / 4 - 0.05; t += (pi / 4 - 0.05) / 200) {
    const double g = real_pow_third(std::cos(t), 4) - real_pow_third(std::sin(t), 4);
    EXPECT_NEAR(evaluate(s, {1.0, t}), g, 1e-6) << t;
  }
}

TEST(Thm4CaseIII, HFactor) {
  EXPECT_DOUBLE_EQ(thm4_case3_h(pi / 2, 0.2, 0.5, 1), 1.0);
  // 30-digit quadrature of exp(-int_{alpha}^{pi/2} sqrt(C^2 - B^2/sin^2))
  EXPECT_NEAR(thm4_case3_h(1.2, 0.2, 0.5, 1), 0.844397434756023000563, 1e-12);
  EXPECT_NEAR(thm4_case3_h(1.2, 0.2, 0.5, 1) * thm4_case3_h(1.2, 0.2, 0.5, -1), 1.0, 1e-14);
  const double h = 1e-5;
  for (double a : {1.0, 1.2, 1.9, 2.1}) {
    const double d = (std::log(thm4_case3_h(a + h, 0.2, 0.5, 1)) - std::log(thm4_case3_h(a - h, 0.2, 0.5, 1))) / (2 * h);
    const double s = std::sin(a);
    EXPECT_NEAR(d, std::sqrt(0.25 - 0.04 / (s * s)), 1e-8) << a;
  }
  // B = 0: log-derivative is the constant sign * C
  const double d0 = (std::log(thm4_case3_h(1.0 + h, 0.0, 0.5, 1)) - std::log(thm4_case3_h(1.0 - h, 0.0, 0.5, 1))) / (2 * h);
  EXPECT_NEAR(d0, 0.5, 1e-8);
  EXPECT_THROW(thm4_case3_h(1.0, 0.5, 0.5, 1), DomainError);
  EXPECT_THROW(thm4_case3_h(0.1, 0.2, 0.5, 1), DomainError);
}

TEST(Thm4CaseIII, Constraint) {
  Thm4Params p;
  p.B = 0.5;
  p.C = 0.5;
  EXPECT_THROW(build_thm4(Thm4Case::III, p), ConstraintError);
  p.B = 0.2;
  EXPECT_TRUE(verifies(build_thm4(Thm4Case::III, p)));
  p.sign = -1;
  EXPECT_TRUE(verifies(build_thm4(Thm4Case::III, p)));
}

TEST(Thm2, LinearAtZeroCoefficient) {
  // A = 0: F' = -F^2 gives g affine in y
  const auto s = build_thm2(Thm2Case::I, 0.0);
  const double a = evaluate(s, {0.3, 0.5}), b = evaluate(s, {0.3, 1.0}), c = evaluate(s, {0.3, 1.5});
  EXPECT_NEAR(b - a, c - b, 1e-9);
  EXPECT_NEAR(evaluate(s, {-0.7, 1.0}), b, 1e-14);
}

TEST(Thm2, MirrorSwapsRoles) {
  const auto i = build_thm2(Thm2Case::I, 0.25);
  const auto ii = build_thm2(Thm2Case::II, 0.25);
  for (double x = -1.0; x <= 1.0; x += 0.25)
    for (double y = -1.0; y <= 1.0; y += 0.25) EXPECT_NEAR(evaluate(ii, {x, y}), evaluate(i, {y, x}), 1e-12);
}

TEST(Reductions, Thm3TwoDimensionalIsThm2) {
  UniformStream rng(11);
  const auto a = build_thm3({0.25}, 2);
  const auto b = build_thm2(Thm2Case::I, 0.25);
  for (int k = 0; k < 100; ++k) {
    const double x = rng.in(-1, 1), y = rng.in(-1, 1);
    EXPECT_NEAR(evaluate(a, {x, y}), evaluate(b, {x, y}), 1e-12);
  }
}

TEST(Reductions, Thm4CaseIILiftsThm1CaseII) {
  UniformStream rng(12);
  Thm4Params p;
  p.A = 4.0 / 3.0;
  const auto s4 = build_thm4(Thm4Case::II, p);
  const auto s1 = build_thm1_ii(4.0 / 3.0);
  for (int k = 0; k < 100; ++k) {
    const double r = rng.in(0.5, 2), t = rng.in(-0.7, 0.7), a = rng.in(0.3, pi - 0.3);
    const double v1 = evaluate(s1, {r * std::sin(a), t});
    EXPECT_NEAR(evaluate(s4, {r, t, a}), v1, 1e-12 * std::max(1.0, std::abs(v1)));
  }
}

TEST(Reductions, Thm4CaseIIAtOneIsLinear) {
  Thm4Params p;
  p.A = 1.0;
  const auto s = build_thm4(Thm4Case::II, p);
  for (double r : {0.5, 1.5})
    for (double t : {-0.5, 0.2})
      for (double a : {0.7, 2.0})
        EXPECT_NEAR(evaluate(s, {r, t, a}), r * std::sin(a) * std::cos(t), 1e-14);
  EXPECT_TRUE(verifies(s));
}

TEST(Constant, ExactlyHarmonic) {
  const auto s = build_constant(3, 2.5);
  const auto pts = sample_points(s, 10, 0);
  const auto steps = default_h_ladder();
  const auto res = verify_solution(s, pts, steps);
  for (const auto& rep : res.reports)
    for (double v : rep.raw) EXPECT_EQ(v, 0.0);
  EXPECT_TRUE(res.summary.all_exact);
}

TEST(Profiles, AnchorNormalization) {
  for (const auto& e : catalogue()) {
    const auto sol = build_case(e.id, {});
    std::vector<double> p;
    for (const auto& f : sol.factors()) p.push_back(f.anchor_t());
    EXPECT_NEAR(evaluate(sol, p), 1.0, 1e-14) << e.id;
  }
}

TEST(Profiles, OutsideDomainThrows) {
  const auto s = build_thm1_i(0.5, 0.5);
  EXPECT_THROW(evaluate(s, {-1.0, 0.0}), DomainError);
  EXPECT_THROW(evaluate(s, {1.0}), DomainError);
}

TEST(Catalogue, DefaultsVerify) {
  for (const auto& e : catalogue()) {
    const auto sol = build_case(e.id, {});
    EXPECT_TRUE(verifies(sol)) << e.id;
  }
}

TEST(Catalogue, RejectsUnknownParameters) {
  CaseParams p;
  p.C = 1.0;
  EXPECT_THROW(build_case("thm1.ii", p), ConstraintError);
  EXPECT_THROW(build_case("nope", {}), ConstraintError);
}

TEST(Catalogue, FigureSetsBuild) {
  const auto sets = figure_sets();
  EXPECT_EQ(sets.size(), 26u);
  for (const auto& f : sets) EXPECT_NO_THROW(build_case(f.case_id, f.params)) << f.case_id;
}

TEST(Degenerate, CandidatesAreClosedForms) {
  const auto plus = thm3_degenerate_candidate(3, 2, 0.5, 1);
  const auto minus = thm3_degenerate_candidate(3, 2, 0.5, -1);
  const double ratio = evaluate(plus, {0.1, 1.5, -0.3}) / evaluate(plus, {0.1, 0.5, -0.3});
  EXPECT_NEAR(ratio, 2.0, 1e-14);
  const double ratio_m = evaluate(minus, {0.1, 1.5, -0.3}) / evaluate(minus, {0.1, 0.5, -0.3});
  EXPECT_NEAR(ratio_m, 0.5, 1e-14);
}
