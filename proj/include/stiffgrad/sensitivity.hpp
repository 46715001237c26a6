#pragma once

// Forward (discretize-then-optimize) parameter sensitivities: every derivative here is the
// exact derivative of the discrete update map, accumulated step by step via
//   s_{n+1} = dPhi/dy_n * s_n + dPhi/dtheta.

#include <cmath>
#include <complex>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "stiffgrad/errors.hpp"
#include "stiffgrad/stability_catalog.hpp"

namespace stiffgrad {

/// Linear test problem y' = lambda y stepped with a fixed h; z = h lambda is derived.
struct StepContext {
  MethodDescriptor method;
  double h = 0.1;
  Complex lambda{0.0, 0.0};

  StepContext(MethodDescriptor m, double step, Complex rate) : method(std::move(m)), h(step), lambda(rate) {
    if (!(h > 0.0)) throw Error(ErrorCode::InvalidArgument, "step size must be positive");
  }

  [[nodiscard]] Complex z() const { return h * lambda; }
};

template <class State, class Sensitivity = State>
struct SensitivityTrace {
  std::vector<State> states;
  std::vector<Sensitivity> sensitivities;

  [[nodiscard]] std::size_t steps() const { return states.empty() ? 0 : states.size() - 1; }
  [[nodiscard]] const State& final_state() const { return states.back(); }
  [[nodiscard]] const Sensitivity& final_sensitivity() const { return sensitivities.back(); }
};

using LinearTrace = SensitivityTrace<Complex>;

/// How BDF2 is run on the linear test problem: as the genuine two-step recurrence with a
/// backward-Euler startup step, or as the one-step map through its principal root.
enum class Bdf2Mode { TwoStep, PrincipalRoot };

inline constexpr double kDivergenceLimit = 1e300;

[[nodiscard]] inline Complex step_linear(const StepContext& ctx, Complex y_n) {
  return stability_value(ctx.method, ctx.z()) * y_n;
}

namespace detail {

inline void guard_divergence(Complex y, std::size_t step) {
  if (!std::isfinite(y.real()) || !std::isfinite(y.imag()) || std::abs(y) > kDivergenceLimit)
    throw Error(ErrorCode::Divergence, "state exceeded 1e300 at step " + std::to_string(step));
}

/// Repeated squaring; more accurate than std::pow's exp(n log r) for large n.
inline Complex integer_power(Complex base, int exponent) {
  Complex result{1.0, 0.0};
  for (; exponent > 0; exponent >>= 1) {
    if (exponent & 1) result *= base;
    base *= base;
  }
  return result;
}

}  // namespace detail

[[nodiscard]] inline LinearTrace integrate_linear_with_sensitivity(const StepContext& ctx, Complex y0, int steps,
                                                                   Bdf2Mode bdf2_mode = Bdf2Mode::TwoStep) {
  if (steps < 1) throw Error(ErrorCode::InvalidArgument, "need at least one step");
  const Complex z = ctx.z();
  const double h = ctx.h;
  LinearTrace trace;
  trace.states.reserve(static_cast<std::size_t>(steps) + 1);
  trace.sensitivities.reserve(static_cast<std::size_t>(steps) + 1);
  trace.states.push_back(y0);
  trace.sensitivities.push_back(Complex{0.0, 0.0});

  if (ctx.method.is_quadratic_root() && bdf2_mode == Bdf2Mode::TwoStep) {
    // Startup: one backward-Euler step, differentiated like any other step.
    const Complex be = 1.0 / (1.0 - z);
    trace.states.push_back(be * y0);
    trace.sensitivities.push_back(h * be * be * y0);
    detail::guard_divergence(trace.states.back(), 1);
    // (3 - 2z) y_{n+1} = 4 y_n - y_{n-1};  d/dlambda adds -2h y_{n+1} on the left.
    const Complex a = 3.0 - 2.0 * z;
    if (std::abs(a) < 1e-300) throw Error(ErrorCode::PoleEvaluation, "BDF2 step matrix vanishes at z = 3/2");
    for (int n = 1; n < steps; ++n) {
      const auto k = static_cast<std::size_t>(n);
      const Complex y_next = (4.0 * trace.states[k] - trace.states[k - 1]) / a;
      const Complex s_next = (4.0 * trace.sensitivities[k] - trace.sensitivities[k - 1] + 2.0 * h * y_next) / a;
      detail::guard_divergence(y_next, k + 1);
      trace.states.push_back(y_next);
      trace.sensitivities.push_back(s_next);
    }
    return trace;
  }

  const Complex r = stability_value(ctx.method, z);
  const Complex r_prime = stability_derivative_value(ctx.method, z);
  for (int n = 0; n < steps; ++n) {
    const auto k = static_cast<std::size_t>(n);
    const Complex y = trace.states[k];
    const Complex s = trace.sensitivities[k];
    const Complex y_next = r * y;
    detail::guard_divergence(y_next, k + 1);
    trace.states.push_back(y_next);
    trace.sensitivities.push_back(r * s + h * r_prime * y);
  }
  return trace;
}

/// d/dlambda of R(h lambda)^N y0 = N h R^{N-1} R' y0 (principal root for BDF2).
[[nodiscard]] inline Complex closed_form_sensitivity(const StepContext& ctx, Complex y0, int steps) {
  if (steps < 1) throw Error(ErrorCode::InvalidArgument, "need at least one step");
  const Complex z = ctx.z();
  const Complex r = stability_value(ctx.method, z);
  const Complex r_prime = stability_derivative_value(ctx.method, z);
  const Complex power = detail::integer_power(r, steps - 1);
  return static_cast<double>(steps) * ctx.h * power * r_prime * y0;
}

/// Sensitivity of the exact flow after one step: h y0 e^{h lambda}.
[[nodiscard]] inline Complex exact_solution_sensitivity(Complex lambda, double h, Complex y0) {
  return h * y0 * std::exp(h * lambda);
}

/// Forward-mode dual number, used to differentiate closed-form expressions.
template <class T>
struct Dual {
  T value{};
  T derivative{};

  friend Dual operator+(Dual a, Dual b) { return {a.value + b.value, a.derivative + b.derivative}; }
  friend Dual operator-(Dual a, Dual b) { return {a.value - b.value, a.derivative - b.derivative}; }
  friend Dual operator*(Dual a, Dual b) { return {a.value * b.value, a.derivative * b.value + a.value * b.derivative}; }
  friend Dual operator/(Dual a, Dual b) {
    return {a.value / b.value, (a.derivative * b.value - a.value * b.derivative) / (b.value * b.value)};
  }
  friend Dual sqrt(Dual a) {
    const T root = std::sqrt(a.value);
    return {root, a.derivative / (T{2} * root)};
  }
  friend Dual pow(Dual a, int n) {
    Dual result{T{1}, T{0}};
    Dual base = a;
    for (; n > 0; n >>= 1) {
      if (n & 1) result = result * base;
      base = base * base;
    }
    return result;
  }
  static Dual constant(T v) { return {v, T{0}}; }
};

struct ClosedFormValue {
  Complex state;
  Complex sensitivity;
};

/// Exact solution of the BDF2 recurrence with backward-Euler startup,
/// y_N = A zeta_+^N + B zeta_-^N, differentiated in lambda by dual numbers.
/// Independent of the step-by-step recursion; ill-conditioned near z = -1/2 where the roots merge.
[[nodiscard]] inline ClosedFormValue bdf2_two_step_closed_form(double h, Complex lambda, Complex y0, int steps) {
  using D = Dual<Complex>;
  const D z{h * lambda, Complex{h, 0.0}};
  const D one = D::constant(1.0), two = D::constant(2.0), three = D::constant(3.0);
  const D y_start = D::constant(y0);
  const D s = sqrt(one + two * z);
  const D a = three - two * z;
  const D plus = (two + s) / a;
  const D minus = (two - s) / a;
  const D y_one = y_start / (one - z);
  const D weight_plus = (y_one - minus * y_start) / (plus - minus);
  const D weight_minus = (plus * y_start - y_one) / (plus - minus);
  const D y_n = weight_plus * pow(plus, steps) + weight_minus * pow(minus, steps);
  return {y_n.value, y_n.derivative};
}

struct DiagonalSensitivity {
  std::vector<double> state;
  /// dy_N,i / dtheta_i; off-diagonal entries are zero.
  std::vector<double> jacobian_diagonal;

  [[nodiscard]] Eigen::MatrixXd jacobian() const {
    Eigen::VectorXd d = Eigen::Map<const Eigen::VectorXd>(jacobian_diagonal.data(), static_cast<Eigen::Index>(jacobian_diagonal.size()));
    return d.asDiagonal();
  }
};

/// y' = diag(theta) y, each mode stepped independently.
[[nodiscard]] inline DiagonalSensitivity integrate_diagonal_with_sensitivity(const MethodDescriptor& method,
                                                                             std::span<const double> theta, double h,
                                                                             int steps, std::span<const double> y0) {
  if (theta.size() != y0.size()) throw Error(ErrorCode::InvalidArgument, "theta and y0 must have equal length");
  DiagonalSensitivity out;
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const StepContext ctx(method, h, Complex{theta[i], 0.0});
    const auto trace = integrate_linear_with_sensitivity(ctx, Complex{y0[i], 0.0}, steps, Bdf2Mode::TwoStep);
    out.state.push_back(trace.final_state().real());
    out.jacobian_diagonal.push_back(trace.final_sensitivity().real());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Nonlinear problems with caller-supplied Jacobians.
// ---------------------------------------------------------------------------

struct OdeProblem {
  using Vector = Eigen::VectorXd;
  using Matrix = Eigen::MatrixXd;
  using Field = std::function<Vector(double, const Vector&, const Vector&)>;
  using JacobianField = std::function<Matrix(double, const Vector&, const Vector&)>;

  Field rhs;
  JacobianField jacobian_state;   // d x d
  JacobianField jacobian_params;  // d x p
  Vector y0;
  double t0 = 0.0;

  [[nodiscard]] Eigen::Index dimension() const { return y0.size(); }
};

enum class ImplicitScheme { BackwardEuler, Trapezoid };

[[nodiscard]] inline ImplicitScheme implicit_scheme(const MethodDescriptor& m) {
  if (m.name == "backward-euler") return ImplicitScheme::BackwardEuler;
  if (m.name == "trapezoid") return ImplicitScheme::Trapezoid;
  throw Error(ErrorCode::NotApplicable, "nonlinear stepping supports backward-euler and trapezoid only, not " + m.name);
}

struct NewtonOptions {
  double tolerance = 1e-12;
  int max_iterations = 50;
  int max_halvings = 10;
};

/// Damped Newton on the implicit residual, starting from y_n.
///   backward Euler: G(y) = y - y_n - h f(t_n + h, y)
///   trapezoid:      G(y) = y - y_n - h/2 (f(t_n, y_n) + f(t_n + h, y))
[[nodiscard]] inline Eigen::VectorXd newton_implicit_step(const OdeProblem& problem, ImplicitScheme scheme, double t_n,
                                                          const Eigen::VectorXd& y_n, double h,
                                                          const Eigen::VectorXd& theta, const NewtonOptions& options = {}) {
  if (!(h > 0.0)) throw Error(ErrorCode::InvalidArgument, "step size must be positive");
  const double weight = scheme == ImplicitScheme::BackwardEuler ? h : 0.5 * h;
  const double t_next = t_n + h;
  Eigen::VectorXd explicit_part = y_n;
  if (scheme == ImplicitScheme::Trapezoid) explicit_part += weight * problem.rhs(t_n, y_n, theta);
  const auto residual = [&](const Eigen::VectorXd& y) -> Eigen::VectorXd {
    return y - explicit_part - weight * problem.rhs(t_next, y, theta);
  };
  const double tolerance = options.tolerance * (1.0 + y_n.norm());
  const Eigen::Index d = y_n.size();

  Eigen::VectorXd y = y_n;
  Eigen::VectorXd g = residual(y);
  double g_norm = g.norm();
  for (int iteration = 0; iteration <= options.max_iterations; ++iteration) {
    if (!std::isfinite(g_norm) || !y.allFinite())
      throw Error(ErrorCode::NewtonDivergence, "non-finite Newton iterate");
    if (g_norm <= tolerance) return y;
    if (iteration == options.max_iterations) break;
    const Eigen::MatrixXd jac =
        Eigen::MatrixXd::Identity(d, d) - weight * problem.jacobian_state(t_next, y, theta);
    const Eigen::PartialPivLU<Eigen::MatrixXd> lu(jac);
    if (!(lu.rcond() > 1e-14)) throw Error(ErrorCode::NewtonDivergence, "singular Newton matrix");
    const Eigen::VectorXd delta = lu.solve(g);
    double step = 1.0;
    Eigen::VectorXd candidate = y - delta;
    Eigen::VectorXd g_candidate = residual(candidate);
    for (int halving = 0; halving < options.max_halvings && !(g_candidate.norm() < g_norm); ++halving) {
      step *= 0.5;
      candidate = y - step * delta;
      g_candidate = residual(candidate);
    }
    y = std::move(candidate);
    g = std::move(g_candidate);
    g_norm = g.norm();
  }
  throw Error(ErrorCode::NewtonDivergence, "no convergence after " + std::to_string(options.max_iterations) + " iterations");
}

using NonlinearTrace = SensitivityTrace<Eigen::VectorXd, Eigen::MatrixXd>;

/// Exact derivative of the discrete scheme with respect to theta; s_0 = 0.
///   BE:   (I - h J_{n+1}) S_{n+1} = S_n + h F_{n+1}
///   trap: (I - h/2 J_{n+1}) S_{n+1} = (I + h/2 J_n) S_n + h/2 (F_n + F_{n+1})
/// with J = df/dy, F = df/dtheta.
[[nodiscard]] inline NonlinearTrace nonlinear_forward_sensitivity(const OdeProblem& problem, ImplicitScheme scheme,
                                                                  double h, int steps, const Eigen::VectorXd& theta) {
  if (steps < 1) throw Error(ErrorCode::InvalidArgument, "need at least one step");
  const Eigen::Index d = problem.dimension();
  const Eigen::Index p = theta.size();
  const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(d, d);
  NonlinearTrace trace;
  trace.states.push_back(problem.y0);
  trace.sensitivities.push_back(Eigen::MatrixXd::Zero(d, p));
  double t = problem.t0;
  for (int n = 0; n < steps; ++n) {
    const Eigen::VectorXd& y = trace.states.back();
    const Eigen::MatrixXd& s = trace.sensitivities.back();
    const Eigen::VectorXd y_next = newton_implicit_step(problem, scheme, t, y, h, theta);
    const Eigen::MatrixXd j_next = problem.jacobian_state(t + h, y_next, theta);
    const Eigen::MatrixXd f_next = problem.jacobian_params(t + h, y_next, theta);
    Eigen::MatrixXd lhs, rhs;
    if (scheme == ImplicitScheme::BackwardEuler) {
      lhs = identity - h * j_next;
      rhs = s + h * f_next;
    } else {
      const Eigen::MatrixXd j_now = problem.jacobian_state(t, y, theta);
      const Eigen::MatrixXd f_now = problem.jacobian_params(t, y, theta);
      lhs = identity - 0.5 * h * j_next;
      rhs = (identity + 0.5 * h * j_now) * s + 0.5 * h * (f_now + f_next);
    }
    const Eigen::PartialPivLU<Eigen::MatrixXd> lu(lhs);
    if (!(lu.rcond() > 1e-14))
      throw Error(ErrorCode::SingularStepMatrix, "sensitivity step matrix condition estimate exceeds 1e14");
    Eigen::MatrixXd s_next = lu.solve(rhs);
    trace.states.push_back(y_next);
    trace.sensitivities.push_back(std::move(s_next));
    t += h;
  }
  return trace;
}

[[nodiscard]] inline Eigen::VectorXd integrate_implicit(const OdeProblem& problem, ImplicitScheme scheme, double h,
                                                        int steps, const Eigen::VectorXd& theta) {
  Eigen::VectorXd y = problem.y0;
  double t = problem.t0;
  for (int n = 0; n < steps; ++n) {
    y = newton_implicit_step(problem, scheme, t, y, h, theta);
    t += h;
  }
  return y;
}

/// Central differences (y_N(theta + e_j eps_j) - y_N(theta - e_j eps_j)) / (2 eps_j) with the same
/// integrator. Default eps_j = 1e-6 (1 + |theta_j|).
[[nodiscard]] inline Eigen::MatrixXd finite_difference_sensitivity(const OdeProblem& problem, ImplicitScheme scheme,
                                                                   double h, int steps, const Eigen::VectorXd& theta,
                                                                   std::optional<double> epsilon = std::nullopt) {
  if (epsilon && !(*epsilon > 0.0)) throw Error(ErrorCode::InvalidArgument, "epsilon must be positive");
  Eigen::MatrixXd out(problem.dimension(), theta.size());
  for (Eigen::Index j = 0; j < theta.size(); ++j) {
    const double eps = epsilon.value_or(1e-6 * (1.0 + std::abs(theta[j])));
    Eigen::VectorXd up = theta, down = theta;
    up[j] += eps;
    down[j] -= eps;
    out.col(j) = (integrate_implicit(problem, scheme, h, steps, up) - integrate_implicit(problem, scheme, h, steps, down)) /
                 (2.0 * eps);
  }
  return out;
}

/// y' = theta y (1 - y) with its Jacobians.
[[nodiscard]] inline OdeProblem logistic_problem(double y0) {
  OdeProblem p;
  p.rhs = [](double, const Eigen::VectorXd& y, const Eigen::VectorXd& th) -> Eigen::VectorXd {
    return (th[0] * y.array() * (1.0 - y.array())).matrix();
  };
  p.jacobian_state = [](double, const Eigen::VectorXd& y, const Eigen::VectorXd& th) -> Eigen::MatrixXd {
    Eigen::MatrixXd j(1, 1);
    j(0, 0) = th[0] * (1.0 - 2.0 * y[0]);
    return j;
  };
  p.jacobian_params = [](double, const Eigen::VectorXd& y, const Eigen::VectorXd&) -> Eigen::MatrixXd {
    Eigen::MatrixXd j(1, 1);
    j(0, 0) = y[0] * (1.0 - y[0]);
    return j;
  };
  p.y0 = Eigen::VectorXd::Constant(1, y0);
  return p;
}

/// y' = theta y.
[[nodiscard]] inline OdeProblem linear_problem(double y0) {
  OdeProblem p;
  p.rhs = [](double, const Eigen::VectorXd& y, const Eigen::VectorXd& th) -> Eigen::VectorXd { return th[0] * y; };
  p.jacobian_state = [](double, const Eigen::VectorXd&, const Eigen::VectorXd& th) -> Eigen::MatrixXd {
    return Eigen::MatrixXd::Constant(1, 1, th[0]);
  };
  p.jacobian_params = [](double, const Eigen::VectorXd& y, const Eigen::VectorXd&) -> Eigen::MatrixXd {
    return Eigen::MatrixXd::Constant(1, 1, y[0]);
  };
  p.y0 = Eigen::VectorXd::Constant(1, y0);
  return p;
}

}  // namespace stiffgrad
