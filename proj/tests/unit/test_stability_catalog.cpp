#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "stiffgrad/stability_catalog.hpp"

using namespace stiffgrad;

TEST(Catalog, EightMethodsPlusMobius) {
  const auto& all = catalog_list();
  ASSERT_EQ(all.size(), 9u);
  const std::vector<std::string> expected{"backward-euler", "trapezoid", "radau3",    "radau5",   "bdf2",
                                          "if-euler",       "rational2", "rational3", "mobius"};
  for (std::size_t i = 0; i < expected.size(); ++i) EXPECT_EQ(all[i].name, expected[i]);
  EXPECT_EQ(table_methods().size(), 8u);
}

TEST(Catalog, Radau5Degrees) {
  const auto* r = find_method("radau5").rational();
  ASSERT_NE(r, nullptr);
  EXPECT_EQ(r->numerator().degree(), 2);
  EXPECT_EQ(r->denominator().degree(), 3);
}

TEST(Catalog, FormsAndSteps) {
  EXPECT_TRUE(find_method("bdf2").is_quadratic_root());
  EXPECT_EQ(find_method("bdf2").steps, 2);
  EXPECT_EQ(find_method("bdf2").expected_decay.to_string(), "-3/2");
  EXPECT_TRUE(find_method("if-euler").is_exponential());
  EXPECT_EQ(find_method("if-euler").expected_decay, DecayClass::exponential());
}

TEST(Catalog, UnknownMethodRaises) {
  try {
    (void)find_method("rk4");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnknownMethod);
  }
}

TEST(Catalog, TrapezoidAndRational2Identical) {
  EXPECT_EQ(*find_method("trapezoid").rational(), *find_method("rational2").rational());
}

TEST(StabilityValue, ConsistencyAtOrigin) {
  for (const auto& m : table_methods()) {
    EXPECT_NEAR(std::abs(stability_value(m, 0.0) - 1.0), 0.0, 1e-15) << m.name;
    EXPECT_NEAR(std::abs(stability_derivative_value(m, 0.0) - 1.0), 0.0, 1e-15) << m.name;
  }
}

TEST(StabilityValue, BackwardEulerAtMinusOne) {
  const auto& be = find_method("backward-euler");
  EXPECT_DOUBLE_EQ(stability_value(be, -1.0).real(), 0.5);
  EXPECT_DOUBLE_EQ(stability_derivative_value(be, -1.0).real(), 0.25);
}

TEST(Bdf2, PrincipalRootModulusBeyondBranchPoint) {
  // For z < -1/2 the roots are complex conjugates with product 1/(3 - 2z).
  const auto& bdf2 = find_method("bdf2");
  for (double z : {-0.75, -4.0, -100.0, -1e6}) {
    const double expected = 1.0 / std::sqrt(3.0 - 2.0 * z);
    EXPECT_NEAR(std::abs(stability_value(bdf2, z)), expected, 1e-14 * (1 + expected)) << z;
  }
}

TEST(Bdf2, RootsSolveCharacteristicEquation) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-10.0, 0.0);
  for (int i = 0; i < 50; ++i) {
    const Complex z{u(rng), u(rng)};
    const auto [zeta, spurious] = bdf2_roots(z);
    for (Complex r : {zeta, spurious}) EXPECT_LT(std::abs((3.0 - 2.0 * z) * r * r - 4.0 * r + 1.0), 1e-12);
    EXPECT_GE(std::abs(zeta), std::abs(spurious) * (1 - 1e-12));
  }
}

TEST(Bdf2, DerivativeMatchesCentralDifference) {
  const auto& bdf2 = find_method("bdf2");
  for (Complex z : {Complex{-0.25, 0.0}, Complex{-3.0, 1.0}, Complex{-0.1, -2.0}}) {
    const double eps = 1e-6;
    const Complex fd = (stability_value(bdf2, z + eps) - stability_value(bdf2, z - eps)) / (2 * eps);
    EXPECT_LT(std::abs(fd - stability_derivative_value(bdf2, z)), 1e-7) << z;
  }
}

TEST(Bdf2, BranchPointRaises) {
  try {
    (void)stability_derivative_value(find_method("bdf2"), -0.5);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::BranchPoint);
  }
}

TEST(PrintedSensitivity, Radau3AtOrigin) {
  EXPECT_DOUBLE_EQ(printed_sensitivity_value(find_method("radau3"), 0.0, 1.0, 1.0).real(), 1.0);
}

TEST(PrintedSensitivity, Rational3PrintedSignIsFlipped) {
  EXPECT_DOUBLE_EQ(printed_sensitivity_value(find_method("rational3"), 0.0, 1.0, 1.0).real(), -1.0);
}

TEST(PrintedSensitivity, UsesHAndState) {
  // Backward Euler: h y_n / (1 - z)^2 with z = -1, h = 0.1, y_n = 1 gives 0.025.
  EXPECT_NEAR(printed_sensitivity_value(find_method("backward-euler"), -1.0, 0.1, 1.0).real(), 0.025, 1e-17);
}

TEST(PrintedSensitivity, MobiusHasNoPrintedRow) {
  try {
    (void)printed_sensitivity_value(find_method("mobius"), -1.0, 0.1, 1.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotApplicable);
  }
}

TEST(PrintedSensitivity, AgreesWithDerivativeAtRandomPoints) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> mag(-3.0, 3.0), phase(-1.5, 1.5);
  for (const auto& m : table_methods()) {
    const double sign = m.name == "rational3" ? -1.0 : 1.0;
    for (int i = 0; i < 100; ++i) {
      const Complex z = -std::pow(10.0, mag(rng)) * std::polar(1.0, phase(rng));
      const Complex printed = printed_sensitivity_value(m, z, 0.3, Complex{1.5, -0.5});
      const Complex derived = stability_derivative_value(m, z) * 0.3 * Complex{1.5, -0.5};
      EXPECT_LE(std::abs(printed - sign * derived), 1e-10 * std::abs(derived)) << m.name << " " << z;
    }
  }
}

TEST(PolynomialRoots, Quadratic) {
  const auto roots = polynomial_roots(Polynomial({6, -4, 1}));  // 2 +- i sqrt(2)
  ASSERT_EQ(roots.size(), 2u);
  for (Complex r : roots) {
    EXPECT_NEAR(r.real(), 2.0, 1e-12);
    EXPECT_NEAR(std::abs(r.imag()), std::sqrt(2.0), 1e-12);
  }
}

TEST(Verdicts, AStabilityAndLStability) {
  const std::map<std::string, bool> l_expected{{"backward-euler", true}, {"trapezoid", false}, {"radau3", true},
                                               {"radau5", true},         {"bdf2", true},       {"if-euler", true},
                                               {"rational2", false},     {"rational3", false}};
  for (const auto& m : table_methods()) {
    const auto report = check_l_stability(m);
    EXPECT_TRUE(report.verdict_a) << m.name;
    EXPECT_FALSE(report.lhp_pole_found) << m.name;
    EXPECT_LE(report.max_boundary_modulus, 1.0 + 1e-12) << m.name;
    EXPECT_EQ(report.verdict_l, l_expected.at(m.name)) << m.name;
    EXPECT_EQ(report.verdict_a, m.a_stable) << m.name;
    EXPECT_EQ(report.verdict_l, m.l_stable) << m.name;
  }
}

TEST(Verdicts, LimitValues) {
  EXPECT_DOUBLE_EQ(check_l_stability(find_method("rational3")).l_limit, 1.0);
  EXPECT_DOUBLE_EQ(check_l_stability(find_method("trapezoid")).l_limit, 1.0);
  EXPECT_DOUBLE_EQ(check_l_stability(find_method("radau5")).l_limit, 0.0);
  EXPECT_EQ(check_l_stability(find_method("if-euler")).limit_direction, "negative-real-axis");
}

TEST(Verdicts, SyntheticLeftHalfPlanePole) {
  // (2 - z)/(2 + z) has |R(it)| = 1 on the axis but a pole at z = -2.
  const auto m = make_rational_method("reflected", 2, RationalFunction({2, -1}, {2, 1}), false, false);
  const auto report = check_a_stability(m);
  EXPECT_TRUE(report.lhp_pole_found);
  EXPECT_FALSE(report.verdict_a);
}

TEST(Verdicts, ExplicitEulerIsNotAStable) {
  const auto m = make_rational_method("explicit-euler", 1, RationalFunction({1, 1}, {1}), false, false);
  EXPECT_FALSE(check_a_stability(m).verdict_a);
}

TEST(Verdicts, TooFewBoundarySamples) {
  StabilityConfig cfg;
  cfg.boundary_samples = 10;
  EXPECT_THROW((void)check_a_stability(find_method("trapezoid"), cfg), Error);
}

TEST(Mobius, BetaFamily) {
  const auto half = mobius_method(Coefficient{1, 2});
  EXPECT_EQ(half.order, 0);  // R'(0) = 1/2: inconsistent
  EXPECT_NEAR(stability_derivative_value(half, 0.0).real(), 0.5, 1e-15);
  EXPECT_TRUE(check_l_stability(half).verdict_l);
  const auto negative = mobius_method(Coefficient{-1});
  EXPECT_FALSE(check_a_stability(negative).verdict_a);
}
