#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "infharm/profiles.hpp"

using namespace infharm;

namespace {
constexpr double pi = std::numbers::pi;
}

TEST(OdeRhs, DirectSubstitution) {
  EXPECT_DOUBLE_EQ(ode_rhs(OdeSpec::polar_angular(1.0), 0.7, 1.0), -2.0);
  EXPECT_DOUBLE_EQ(ode_rhs(OdeSpec::polar_angular(0.0), -3.0, 2.0), -4.0);
  EXPECT_DOUBLE_EQ(ode_rhs(OdeSpec::cartesian(0.0), 5.0, 1.0), -1.0);
  EXPECT_NEAR(ode_rhs(OdeSpec::spherical_polar(0.0, 0.0), pi / 2, 1.0), -1.0, 1e-15);
  // radial: -(y^2 + B^2)(y^2 - y + B^2)/y^2 at B = 0.5, y = 1 -> -(1.25)(0.25)
  EXPECT_DOUBLE_EQ(ode_rhs(OdeSpec::polar_radial(0.5), 0.0, 1.0), -0.3125);
}

TEST(OdeRhs, DomainErrors) {
  EXPECT_THROW(ode_rhs(OdeSpec::polar_angular(1.0), 0.0, 0.0), DomainError);
  EXPECT_THROW(ode_rhs(OdeSpec::spherical_polar(0.5, 0.2), 0.0, 1.0), DomainError);
  EXPECT_THROW(OdeSpec::cartesian(-1.0), DomainError);
  EXPECT_THROW(OdeSpec::polar_angular(std::nan("")), DomainError);
}

TEST(Integrate, ReciprocalProfile) {
  IntegrationOptions opt;
  opt.t_hi = 5.0;
  const auto tab = integrate_profile(OdeSpec::cartesian(0.0), {0.0, 1.0}, +1, opt);
  EXPECT_DOUBLE_EQ(tab.t_min(), 0.0);
  EXPECT_NEAR(tab.t_max(), 5.0, 1e-12);
  EXPECT_EQ(tab.log_integral(0.0), 0.0);
  for (double t = 0.0; t <= 5.0; t += 0.0371) {
    EXPECT_NEAR(tab.value(t), 1.0 / (1.0 + t), 1e-9) << t;
    EXPECT_NEAR(tab.log_integral(t), std::log1p(t), 1e-9) << t;
  }
  const auto n = tab.nodes();
  for (std::size_t k = 1; k < n.size(); ++k) ASSERT_LT(n[k - 1], n[k]);
}

TEST(Integrate, ZeroAnchorRejected) {
  EXPECT_THROW(integrate_profile(OdeSpec::polar_angular(1.0), {0.0, 0.0}, +1), DomainError);
}

TEST(Integrate, MatchesAronssonClosedForm) {
  const double t0 = pi / 8;
  const auto tab = integrate_profile_both(OdeSpec::polar_angular(4.0 / 3.0), {t0, aronsson_G(t0)});
  double worst = 0.0;
  for (double t = -pi / 4 + 0.05; t <= pi / 4 - 0.05; t += 0.0123) {
    if (!tab.contains(t)) continue;
    worst = std::max(worst, std::abs(tab.value(t) - aronsson_G(t)) / (1.0 + std::abs(aronsson_G(t))));
  }
  EXPECT_LT(worst, 1e-6);
  // the trajectory crosses G = 0 at t = 0 and is still tabulated beyond it
  EXPECT_LT(tab.t_min(), -0.5);
}

// Reference values below come from 40-digit Taylor-series integration
// (mpmath.odefun) of the same initial value problems.
TEST(Integrate, FrozenHighPrecisionTrajectories) {
  IntegrationOptions opt;
  opt.t_lo = -1.5;
  opt.t_hi = 1.5;
  IntegrationOptions sph;
  sph.t_lo = 0.05;
  sph.t_hi = std::numbers::pi - 0.05;
  {
    const auto tab = integrate_profile_both(OdeSpec::cartesian(0.25), {0.0, 1.0}, opt);
    EXPECT_NEAR(tab.value(0.5), 0.42101400548825000448, 1e-9);
    EXPECT_NEAR(tab.log_integral(0.5), 0.34419464456965104465, 1e-9);
    EXPECT_NEAR(tab.value(-0.3), 1.6767453510176332210, 1e-9);
    EXPECT_NEAR(tab.log_integral(-0.3), -0.38870662523162849381, 1e-9);
  }
  {
    const auto tab = integrate_profile_both(OdeSpec::polar_radial(1.0 / 3.0), {0.0, 2.0}, opt);
    EXPECT_NEAR(tab.value(0.4), 1.4618925757287071319, 1e-9);
    EXPECT_NEAR(tab.log_integral(0.4), 0.67523094951638609850, 1e-9);
  }
  {
    const auto tab = integrate_profile_both(OdeSpec::polar_angular(0.5), {0.0, 1.0}, opt);
    EXPECT_NEAR(tab.value(0.3), 0.78873103916845398549, 1e-9);
    EXPECT_NEAR(tab.log_integral(0.3), 0.26522953532828152818, 1e-9);
  }
  {
    const auto tab = integrate_profile_both(OdeSpec::spherical_polar(0.5, 0.2), {pi / 2, 1.0}, sph);
    EXPECT_NEAR(tab.value(1.2), 1.6110483152578660360, 1e-9);
    EXPECT_NEAR(tab.log_integral(1.2), -0.46616449132488665527, 1e-9);
  }
}

TEST(Integrate, BlowUpIsMonotone) {
  const auto tab = integrate_profile(OdeSpec::cartesian(0.0), {0.0, 1.0}, -1);
  EXPECT_EQ(tab.stop_low(), StopReason::BlowUp);
  EXPECT_NEAR(tab.t_min(), -1.0, 1e-6);
  const auto y = tab.values();
  ASSERT_GE(y.size(), 6u);
  for (std::size_t k = 0; k < 4; ++k) EXPECT_GT(std::abs(y[k]), std::abs(y[k + 1]));
}

TEST(Implicit, Examples) {
  const ImplicitRelation one(RelationCase::AngularOne, 1.0);
  EXPECT_NEAR(invert_implicit(one, pi / 4, {-10.0, 0.0}), -1.0, 1e-12);
  EXPECT_NEAR(implicit_residual(one, pi / 4, -1.0), 0.0, 1e-15);

  const ImplicitRelation zero(RelationCase::AngularZero, 0.0);
  EXPECT_NEAR(invert_implicit(zero, 2.0, {0.1, 10.0}), 0.5, 1e-12);
  EXPECT_NEAR(implicit_residual(zero, 2.0, 0.5), 0.0, 1e-15);

  const auto aron = ImplicitRelation::for_ode(OdeSpec::polar_angular(4.0 / 3.0));
  const double g = aronsson_G(pi / 8);
  EXPECT_NEAR(solve_on_branch(aron, pi / 8, aron.branches().front()) - g, 0.0, 1e-10 * std::abs(g));
  EXPECT_LE(std::abs(implicit_residual(aron, pi / 8, g)), 1e-10);
}

TEST(Implicit, CaseConsistency) {
  EXPECT_THROW(ImplicitRelation(RelationCase::AngularOne, 0.9), DomainError);
  EXPECT_THROW(ImplicitRelation(RelationCase::RadialNegative, 0.6), DomainError);
  EXPECT_EQ(ImplicitRelation::for_ode(OdeSpec::polar_radial(0.5)).case_tag(), RelationCase::RadialCritical);
  EXPECT_EQ(ImplicitRelation::for_ode(OdeSpec::cartesian(0.0)).case_tag(), RelationCase::CartesianZero);
  EXPECT_THROW(ImplicitRelation::for_ode(OdeSpec::spherical_polar(1, 1)), DomainError);
}

TEST(Implicit, BracketMustStraddle) {
  const ImplicitRelation zero(RelationCase::AngularZero, 0.0);
  EXPECT_THROW(invert_implicit(zero, 2.0, {1.0, 10.0}), BracketError);
}

TEST(Implicit, InverseOfPsiIsIdentity) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (double A : {4.0 / 3.0, 0.5, -1.0 / 3.0, 0.0}) {
    const auto rel = ImplicitRelation::for_ode(OdeSpec::polar_angular(A));
    for (const auto& [blo, bhi] : rel.branches()) {
      const double lo = std::isfinite(blo) ? blo + 0.05 : -10.0;
      const double hi = std::isfinite(bhi) ? bhi - 0.05 : 10.0;
      for (int k = 0; k < 40; ++k) {
        const double y = lo + (hi - lo) * U(rng);
        if (std::abs(y) < 0.1) continue;
        const double t = rel.psi(y) - rel.c();
        EXPECT_NEAR(solve_on_branch(rel, t, {blo, bhi}), y, 1e-10 * std::max(1.0, std::abs(y))) << A << " " << y;
      }
    }
  }
}

TEST(Implicit, TablesAgreeWithRelations) {
  for (const auto& spec : {OdeSpec::polar_angular(4.0 / 3.0), OdeSpec::polar_angular(0.15),
                           OdeSpec::polar_angular(-0.15), OdeSpec::polar_radial(1.0), OdeSpec::polar_radial(1.0 / 3.0),
                           OdeSpec::cartesian(0.25)}) {
    IntegrationOptions opt;
    opt.t_lo = -3.0;
    opt.t_hi = 3.0;
    const auto tab = integrate_profile_both(spec, {0.0, 0.7}, opt);
    const auto rel0 = ImplicitRelation::for_ode(spec);
    const auto rel = rel0.with_c(rel0.psi(0.7));  // c fixed by the anchor
    double worst = 0.0;
    const auto t = tab.nodes();
    const auto y = tab.values();
    for (std::size_t k = 0; k < t.size(); ++k) {
      try {
        worst = std::max(worst, std::abs(implicit_residual(rel, t[k], y[k])));
      } catch (const DomainError&) {
      }
    }
    EXPECT_LE(worst, 1e-6) << to_string(spec.kind) << " " << spec.a << " " << spec.b << " " << spec.s;
  }
}

TEST(Aronsson, ClosedFormValues) {
  EXPECT_EQ(aronsson_G(0.0), 0.0);
  EXPECT_THROW(aronsson_G(pi / 4), PoleError);
  EXPECT_THROW(aronsson_G(pi / 2), PoleError);
  // 50-digit evaluation of the closed form at pi/8
  EXPECT_NEAR(aronsson_G(pi / 8), -2.2368675984054132732835251572428339679455551275378, 4e-15);
}

TEST(Aronsson, SatisfiesProfileOde) {
  const auto spec = OdeSpec::polar_angular(4.0 / 3.0);
  const double h = 1e-5;
  for (double t = -pi / 2 + 0.05; t < pi / 2 - 0.05; t += 0.01) {
    if (std::abs(std::abs(t) - pi / 4) < 0.05 || std::abs(t) < 0.05) continue;
    const double d = (aronsson_G(t + h) - aronsson_G(t - h)) / (2 * h);
    const double f = ode_rhs(spec, t, aronsson_G(t));
    EXPECT_LE(std::abs(d - f), 1e-6 * (1 + std::abs(f))) << t;
  }
}

TEST(FirstIntegral, Examples) {
  EXPECT_DOUBLE_EQ(first_integral_thm4i(0.0, 0.3, 1.1, 0.7, 5.0), 1.0);
  const double t = pi / 2;
  EXPECT_NEAR(first_integral_thm4i(1.0, 0.0, t, std::cos(t) / std::sin(t), 0.0), 0.0, 1e-30);
  EXPECT_THROW(first_integral_thm4i(0.5, 0.2, 0.0, 1.0, 0.0), DomainError);
}

TEST(FirstIntegral, ConservedAlongTrajectory) {
  const auto tab = integrate_profile_both(OdeSpec::spherical_polar(0.5, 0.2), {pi / 2, 1.0});
  const auto t = tab.nodes();
  const auto y = tab.values();
  const auto I = tab.inverse_integrals();
  const auto c_at = [&](double tt) {
    const auto k = static_cast<std::size_t>(std::lower_bound(t.begin(), t.end(), tt) - t.begin());
    return first_integral_thm4i(0.5, 0.2, t[k], y[k], I[k]);
  };
  const double c0 = c_at(pi / 2), c1 = c_at(1.0);
  EXPECT_NEAR(c1 / c0, 1.0, 1e-6);
}
