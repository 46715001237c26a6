#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "stiffgrad/sensitivity.hpp"

using namespace stiffgrad;

namespace {

double rel(Complex a, Complex b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

LinearTrace run(const char* name, double h, double lambda, int steps, Bdf2Mode mode = Bdf2Mode::TwoStep) {
  return integrate_linear_with_sensitivity(StepContext(find_method(name), h, {lambda, 0.0}), 1.0, steps, mode);
}

// States only, used for a central-difference oracle in lambda.
Complex final_state(const char* name, double h, double lambda, int steps) { return run(name, h, lambda, steps).final_state(); }

}  // namespace

TEST(StepContext, RejectsNonPositiveStep) {
  EXPECT_THROW(StepContext(find_method("trapezoid"), 0.0, {-1.0, 0.0}), Error);
  EXPECT_THROW(StepContext(find_method("trapezoid"), -0.1, {-1.0, 0.0}), Error);
}

TEST(LinearSensitivity, BackwardEulerOneStep) {
  // z = -1: s_1 = h y0 / (1 - z)^2 = 0.1 / 4.
  const auto trace = run("backward-euler", 0.1, -10.0, 1);
  EXPECT_NEAR(trace.final_state().real(), 0.5, 1e-16);
  EXPECT_NEAR(trace.final_sensitivity().real(), 0.025, 1e-17);
}

TEST(LinearSensitivity, TrapezoidMatchesHandClosedForm) {
  const double h = 0.05, lambda = -30.0;
  const int n = 17;
  const double z = h * lambda;
  const double r = (2 + z) / (2 - z), rp = 4 / ((2 - z) * (2 - z));
  const double expected = n * h * std::pow(r, n - 1) * rp;
  EXPECT_LT(rel(run("trapezoid", h, lambda, n).final_sensitivity(), expected), 1e-13);
}

TEST(LinearSensitivity, RecursionMatchesClosedFormForOneStepMethods) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> lam(-1e3, -0.1), step(1e-3, 0.5);
  std::uniform_int_distribution<int> count(1, 200);
  for (const auto& m : table_methods()) {
    for (int i = 0; i < 50; ++i) {
      const StepContext ctx(m, step(rng), {lam(rng), lam(rng) * 0.1});
      const int n = count(rng);
      const auto trace = integrate_linear_with_sensitivity(ctx, {1.0, 0.5}, n, Bdf2Mode::PrincipalRoot);
      const Complex closed = closed_form_sensitivity(ctx, {1.0, 0.5}, n);
      if (std::abs(closed) < 1e-280) continue;  // both underflow
      EXPECT_LT(rel(trace.final_sensitivity(), closed), 1e-10) << m.name << " z=" << ctx.z() << " N=" << n;
    }
  }
}

TEST(LinearSensitivity, IfEulerEqualsExactFlow) {
  const double h = 0.1, lambda = -3.0;
  for (int n : {1, 5, 40}) {
    const auto trace = run("if-euler", h, lambda, n);
    const Complex exact = exact_solution_sensitivity(lambda, n * h, 1.0);
    EXPECT_LT(rel(trace.final_sensitivity(), exact), 1e-14) << n;
  }
}

TEST(LinearSensitivity, ZeroLambdaGivesHorizon) {
  for (const auto& m : table_methods()) {
    const auto trace =
        integrate_linear_with_sensitivity(StepContext(m, 0.2, {0.0, 0.0}), 1.0, 7, Bdf2Mode::PrincipalRoot);
    EXPECT_NEAR(trace.final_sensitivity().real(), 7 * 0.2, 1e-14) << m.name;
    EXPECT_NEAR(trace.final_state().real(), 1.0, 1e-15) << m.name;
  }
}

TEST(LinearSensitivity, RejectsZeroSteps) { EXPECT_THROW((void)run("trapezoid", 0.1, -1.0, 0), Error); }

TEST(LinearSensitivity, DivergenceIsReported) {
  try {
    (void)run("if-euler", 1.0, 200.0, 10);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Divergence);
  }
}

TEST(Bdf2TwoStep, MatchesCentralDifferenceOfStates) {
  for (double lambda : {-1.0, -7.0, -0.3}) {
    const double h = 0.1, eps = 1e-6;
    const int n = 12;
    const Complex fd = (final_state("bdf2", h, lambda + eps, n) - final_state("bdf2", h, lambda - eps, n)) / (2 * eps);
    EXPECT_LT(rel(run("bdf2", h, lambda, n).final_sensitivity(), fd), 1e-7) << lambda;
  }
}

TEST(Bdf2TwoStep, MatchesTwoRootClosedForm) {
  for (double lambda : {-1.0, -20.0, -1e3}) {
    const auto trace = run("bdf2", 0.1, lambda, 25);
    const auto closed = bdf2_two_step_closed_form(0.1, lambda, 1.0, 25);
    EXPECT_LT(rel(trace.final_state(), closed.state), 1e-10) << lambda;
    EXPECT_LT(rel(trace.final_sensitivity(), closed.sensitivity), 1e-10) << lambda;
  }
}

TEST(Bdf2TwoStep, StartupIsBackwardEuler) {
  const auto bdf2 = run("bdf2", 0.1, -10.0, 1);
  const auto be = run("backward-euler", 0.1, -10.0, 1);
  EXPECT_EQ(bdf2.final_state(), be.final_state());
  EXPECT_EQ(bdf2.final_sensitivity(), be.final_sensitivity());
}

TEST(Dual, ProductAndQuotientRules) {
  using D = Dual<double>;
  const D x{3.0, 1.0};
  const D f = (x * x + D::constant(1.0)) / x;  // x + 1/x
  EXPECT_DOUBLE_EQ(f.value, 3.0 + 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(f.derivative, 1.0 - 1.0 / 9.0);
  EXPECT_DOUBLE_EQ(sqrt(x).derivative, 0.5 / std::sqrt(3.0));
  EXPECT_DOUBLE_EQ(pow(x, 4).derivative, 4 * 27.0);
}

TEST(Diagonal, ModesAreIndependent) {
  const std::vector<double> theta{-1.0, -100.0}, y0{1.0, 2.0};
  const auto d = integrate_diagonal_with_sensitivity(find_method("radau3"), theta, 0.1, 10, y0);
  for (std::size_t i = 0; i < 2; ++i) {
    const auto single = integrate_linear_with_sensitivity(StepContext(find_method("radau3"), 0.1, {theta[i], 0.0}),
                                                          y0[i], 10);
    EXPECT_DOUBLE_EQ(d.state[i], single.final_state().real());
    EXPECT_DOUBLE_EQ(d.jacobian_diagonal[i], single.final_sensitivity().real());
  }
  const auto jac = d.jacobian();
  EXPECT_EQ(jac(0, 1), 0.0);
  EXPECT_EQ(jac(1, 0), 0.0);
}

TEST(Nonlinear, SchemeMapping) {
  EXPECT_EQ(implicit_scheme(find_method("backward-euler")), ImplicitScheme::BackwardEuler);
  EXPECT_EQ(implicit_scheme(find_method("trapezoid")), ImplicitScheme::Trapezoid);
  EXPECT_THROW((void)implicit_scheme(find_method("radau5")), Error);
}

TEST(Nonlinear, LogisticBackwardEulerAgainstBisection) {
  // y1 solves h theta y^2 + (1 - h theta) y - y0 = 0; bisection on [0, 1] gives an independent root.
  const double h = 0.5, theta = 3.0, y0 = 0.2;
  const auto g = [&](double y) { return h * theta * y * y + (1 - h * theta) * y - y0; };
  double lo = 0.0, hi = 1.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (g(lo) * g(mid) <= 0 ? hi : lo) = mid;
  }
  const double y1 = 0.5 * (lo + hi);
  const Eigen::VectorXd th = Eigen::VectorXd::Constant(1, theta);
  const auto trace = nonlinear_forward_sensitivity(logistic_problem(y0), ImplicitScheme::BackwardEuler, h, 1, th);
  EXPECT_NEAR(trace.final_state()[0], y1, 1e-12);
  // Implicit differentiation of y1 = y0 + h theta y1 (1 - y1).
  const double s1 = h * y1 * (1 - y1) / (1 - h * theta * (1 - 2 * y1));
  EXPECT_NEAR(trace.final_sensitivity()(0, 0), s1, 1e-12);
}

TEST(Nonlinear, LinearRhsMatchesStepLinear) {
  for (auto [scheme, name] : {std::pair{ImplicitScheme::BackwardEuler, "backward-euler"},
                              std::pair{ImplicitScheme::Trapezoid, "trapezoid"}}) {
    const double h = 0.1, lambda = -40.0;
    const Eigen::VectorXd th = Eigen::VectorXd::Constant(1, lambda);
    const auto nl = nonlinear_forward_sensitivity(linear_problem(1.0), scheme, h, 9, th);
    const auto lin = run(name, h, lambda, 9);
    EXPECT_LT(std::abs(nl.final_state()[0] - lin.final_state().real()), 1e-14) << name;
    EXPECT_LT(rel(nl.final_sensitivity()(0, 0), lin.final_sensitivity()), 1e-10) << name;
  }
}

TEST(Nonlinear, FiniteDifferenceErrorIsSecondOrder) {
  const Eigen::VectorXd th = Eigen::VectorXd::Constant(1, 2.0);
  const auto problem = logistic_problem(0.1);
  for (auto scheme : {ImplicitScheme::BackwardEuler, ImplicitScheme::Trapezoid}) {
    const double exact = nonlinear_forward_sensitivity(problem, scheme, 0.1, 20, th).final_sensitivity()(0, 0);
    const double e1 = std::abs(finite_difference_sensitivity(problem, scheme, 0.1, 20, th, 1e-2)(0, 0) - exact);
    const double e2 = std::abs(finite_difference_sensitivity(problem, scheme, 0.1, 20, th, 1e-3)(0, 0) - exact);
    EXPECT_GT(e1 / e2, 50.0);
    EXPECT_LT(e2 / e1, 0.02);
    EXPECT_LT(std::abs(finite_difference_sensitivity(problem, scheme, 0.1, 20, th)(0, 0) - exact), 1e-8);
  }
}

TEST(Nonlinear, ZeroRhsGivesZeroSensitivity) {
  OdeProblem p;
  p.rhs = [](double, const Eigen::VectorXd& y, const Eigen::VectorXd&) -> Eigen::VectorXd { return Eigen::VectorXd::Zero(y.size()); };
  p.jacobian_state = [](double, const Eigen::VectorXd& y, const Eigen::VectorXd&) -> Eigen::MatrixXd {
    return Eigen::MatrixXd::Zero(y.size(), y.size());
  };
  p.jacobian_params = [](double, const Eigen::VectorXd& y, const Eigen::VectorXd& th) -> Eigen::MatrixXd {
    return Eigen::MatrixXd::Zero(y.size(), th.size());
  };
  p.y0 = Eigen::Vector2d(1.0, -2.0);
  const auto trace = nonlinear_forward_sensitivity(p, ImplicitScheme::Trapezoid, 0.3, 5, Eigen::Vector3d(1, 2, 3));
  EXPECT_EQ(trace.final_state(), p.y0);
  EXPECT_TRUE(trace.final_sensitivity().isZero());
  EXPECT_EQ(trace.final_sensitivity().cols(), 3);
}

TEST(Nonlinear, SingularStepMatrixReported) {
  // Backward Euler on y' = theta y with h theta = 1 makes I - h J singular.
  const Eigen::VectorXd th = Eigen::VectorXd::Constant(1, 10.0);
  OdeProblem p = linear_problem(0.0);  // y0 = 0 keeps Newton at its converged start
  try {
    (void)nonlinear_forward_sensitivity(p, ImplicitScheme::BackwardEuler, 0.1, 1, th);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SingularStepMatrix);
  }
}

TEST(Nonlinear, NewtonDivergenceOnSingularNewtonMatrix) {
  const Eigen::VectorXd th = Eigen::VectorXd::Constant(1, 10.0);
  try {
    (void)newton_implicit_step(linear_problem(1.0), ImplicitScheme::BackwardEuler, 0.0, Eigen::VectorXd::Ones(1), 0.1, th);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NewtonDivergence);
  }
}

TEST(Nonlinear, FiniteDifferenceRejectsBadEpsilon) {
  const Eigen::VectorXd th = Eigen::VectorXd::Constant(1, 1.0);
  EXPECT_THROW((void)finite_difference_sensitivity(logistic_problem(0.1), ImplicitScheme::BackwardEuler, 0.1, 1, th, 0.0),
               Error);
}
