#pragma once

// Stability functions R(z) of the stiff integrators studied here, the derivative
// R'(z) that governs parameter sensitivities, and numerical A-/L-stability checks.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "stiffgrad/errors.hpp"
#include "stiffgrad/rational_algebra.hpp"

namespace stiffgrad {

struct RationalForm {
  explicit RationalForm(RationalFunction r) : function(std::move(r)), derivative(rational_derivative(function)) {}

  RationalFunction function;
  RationalFunction derivative;  // cached quotient-rule result
};

struct ExponentialForm {};

/// BDF2 on y' = lambda*y: (3 - 2z) zeta^2 - 4 zeta + 1 = 0.
struct QuadraticRootForm {};

using MethodForm = std::variant<ExponentialForm, RationalForm, QuadraticRootForm>;

struct MethodDescriptor {
  std::string name;
  int order = 1;
  int steps = 1;
  MethodForm form;
  DecayClass expected_decay = DecayClass::power_law(-2);
  bool a_stable = true;
  bool l_stable = false;
  /// Only meaningful for the Moebius family.
  std::optional<Coefficient> beta;

  [[nodiscard]] const RationalFunction* rational() const {
    if (const auto* r = std::get_if<RationalForm>(&form)) return &r->function;
    return nullptr;
  }
  [[nodiscard]] const RationalFunction* rational_derivative_form() const {
    if (const auto* r = std::get_if<RationalForm>(&form)) return &r->derivative;
    return nullptr;
  }
  [[nodiscard]] bool is_exponential() const { return std::holds_alternative<ExponentialForm>(form); }
  [[nodiscard]] bool is_quadratic_root() const { return std::holds_alternative<QuadraticRootForm>(form); }

  [[nodiscard]] std::string_view form_name() const {
    if (rational()) return "rational";
    if (is_exponential()) return "exponential";
    return "quadratic-root";
  }
};

[[nodiscard]] inline MethodDescriptor make_rational_method(std::string name, int order, RationalFunction r,
                                                           bool a_stable, bool l_stable) {
  MethodDescriptor m;
  m.name = std::move(name);
  m.order = order;
  m.expected_decay = asymptotic_decay_class(r);
  m.form = RationalForm{std::move(r)};
  m.a_stable = a_stable;
  m.l_stable = l_stable;
  return m;
}

/// R_beta(z) = 1/(1 - beta z). Consistent (R'(0) = 1) only for beta = 1.
[[nodiscard]] inline MethodDescriptor mobius_method(Coefficient beta = Coefficient{1}) {
  Polynomial q(std::vector<Coefficient>{Coefficient{1}, -beta});
  auto m = make_rational_method("mobius", beta == Coefficient{1} ? 1 : 0, RationalFunction(Polynomial{1}, std::move(q)),
                                beta.numerator() > 0, beta.numerator() > 0);
  m.beta = beta;
  return m;
}

/// The eight methods of the comparison table followed by the Moebius family (beta = 1).
[[nodiscard]] inline const std::vector<MethodDescriptor>& catalog_list() {
  static const std::vector<MethodDescriptor> catalog = [] {
    std::vector<MethodDescriptor> c;
    c.push_back(make_rational_method("backward-euler", 1, RationalFunction({1}, {1, -1}), true, true));
    c.push_back(make_rational_method("trapezoid", 2, RationalFunction({2, 1}, {2, -1}), true, false));
    c.push_back(make_rational_method("radau3", 3, RationalFunction({6, 2}, {6, -4, 1}), true, true));
    c.push_back(make_rational_method("radau5", 5, RationalFunction({60, 24, 3}, {60, -36, 9, -1}), true, true));

    MethodDescriptor bdf2;
    bdf2.name = "bdf2";
    bdf2.order = 2;
    bdf2.steps = 2;
    bdf2.form = QuadraticRootForm{};
    bdf2.expected_decay = DecayClass::power_law_doubled(-3);
    bdf2.a_stable = true;
    bdf2.l_stable = true;
    c.push_back(bdf2);

    MethodDescriptor if_euler;
    if_euler.name = "if-euler";
    if_euler.order = 1;
    if_euler.form = ExponentialForm{};
    if_euler.expected_decay = DecayClass::exponential();
    if_euler.a_stable = true;
    if_euler.l_stable = true;
    c.push_back(if_euler);

    c.push_back(make_rational_method("rational2", 2, RationalFunction({2, 1}, {2, -1}), true, false));
    c.push_back(make_rational_method("rational3", 3, RationalFunction({12, 6, 1}, {12, -6, 1}), true, false));
    c.push_back(mobius_method());
    return c;
  }();
  return catalog;
}

/// The eight table methods, without the Moebius family.
[[nodiscard]] inline std::vector<MethodDescriptor> table_methods() {
  const auto& all = catalog_list();
  return {all.begin(), all.begin() + 8};
}

[[nodiscard]] inline const MethodDescriptor& find_method(std::string_view name) {
  for (const auto& m : catalog_list())
    if (m.name == name) return m;
  throw Error(ErrorCode::UnknownMethod, std::string(name));
}

namespace detail {

inline Complex checked_divide(Complex num, Complex den) {
  if (std::abs(den) < 1e-300) throw Error(ErrorCode::PoleEvaluation, "denominator vanishes at evaluation point");
  return num / den;
}

inline void check_bdf2_branch(Complex z) {
  if (std::abs(z + 0.5) < 1e-12) throw Error(ErrorCode::BranchPoint, "BDF2 root is not differentiable at z = -1/2");
}

}  // namespace detail

/// Both roots of the BDF2 characteristic quadratic; `first` is the principal root
/// (zeta(0) = 1) on the principal square-root branch, `second` the spurious one.
[[nodiscard]] inline std::pair<Complex, Complex> bdf2_roots(Complex z) {
  const Complex a = 3.0 - 2.0 * z;
  const Complex disc = std::sqrt(16.0 - 4.0 * a);
  return {detail::checked_divide(4.0 + disc, 2.0 * a), detail::checked_divide(4.0 - disc, 2.0 * a)};
}

[[nodiscard]] inline Complex stability_value(const MethodDescriptor& m, Complex z) {
  if (const auto* r = m.rational()) return r->evaluate(z);
  if (m.is_exponential()) return std::exp(z);
  return bdf2_roots(z).first;
}

/// R'(z). For BDF2 this differentiates the characteristic equation implicitly,
/// zeta' = zeta^2 / ((3 - 2z) zeta - 2), which is independent of the printed closed form.
[[nodiscard]] inline Complex stability_derivative_value(const MethodDescriptor& m, Complex z) {
  if (const auto* d = m.rational_derivative_form()) return d->evaluate(z);
  if (m.is_exponential()) return std::exp(z);
  detail::check_bdf2_branch(z);
  const Complex zeta = bdf2_roots(z).first;
  return detail::checked_divide(zeta * zeta, (3.0 - 2.0 * z) * zeta - 2.0);
}

/// The table's "Parameter Sensitivity" entries, evaluated as printed (rational3 keeps
/// its printed numerator 12z^2 - 144, which has the opposite sign of the quotient rule).
[[nodiscard]] inline Complex printed_sensitivity_value(const MethodDescriptor& m, Complex z, double h, Complex y_n) {
  const Complex hy = h * y_n;
  const auto& n = m.name;
  if (n == "backward-euler") return detail::checked_divide(hy, (1.0 - z) * (1.0 - z));
  if (n == "trapezoid" || n == "rational2") return detail::checked_divide(4.0 * hy, (2.0 - z) * (2.0 - z));
  if (n == "radau3") {
    const Complex num = -2.0 * z * z - 12.0 * z + 36.0;
    const Complex den = (((z - 8.0) * z + 28.0) * z - 48.0) * z + 36.0;
    return detail::checked_divide(num, den) * hy;
  }
  if (n == "radau5") {
    const Complex num = (((3.0 * z + 48.0) * z - 144.0) * z - 720.0) * z + 3600.0;
    const Complex den = (((((z - 18.0) * z + 153.0) * z - 768.0) * z + 2376.0) * z - 4320.0) * z + 3600.0;
    return detail::checked_divide(num, den) * hy;
  }
  if (n == "bdf2") {
    detail::check_bdf2_branch(z);
    const Complex root = std::sqrt(1.0 + 2.0 * z);
    const Complex a = 3.0 - 2.0 * z;
    return detail::checked_divide(5.0 + 2.0 * z + 4.0 * root, a * a * root) * hy;
  }
  if (n == "if-euler") return std::exp(z) * hy;
  if (n == "rational3") {
    const Complex q = 12.0 - 6.0 * z + z * z;
    return detail::checked_divide(12.0 * z * z - 144.0, q * q) * hy;
  }
  throw Error(ErrorCode::NotApplicable, "no printed sensitivity formula for " + n);
}

struct StabilityConfig {
  int boundary_samples = 2000;
  double t_min = 1e-6;
  double t_max = 1e9;
  double tolerance = 1e-12;
};

struct StabilityReport {
  std::string method;
  double max_boundary_modulus = 0.0;
  bool lhp_pole_found = false;
  std::vector<Complex> poles;
  double l_limit = 0.0;
  std::string limit_direction = "any";
  bool verdict_a = false;
  bool verdict_l = false;
};

/// Roots of p via eigenvalues of its companion matrix.
[[nodiscard]] inline std::vector<Complex> polynomial_roots(const Polynomial& p) {
  const int n = p.degree();
  if (n <= 0) return {};
  Eigen::MatrixXcd companion = Eigen::MatrixXcd::Zero(n, n);
  const double lead = to_double(p.leading());
  for (int i = 1; i < n; ++i) companion(i, i - 1) = 1.0;
  for (int i = 0; i < n; ++i) companion(i, n - 1) = -to_double(p.coefficient(i)) / lead;
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(companion, false);
  std::vector<Complex> roots(solver.eigenvalues().data(), solver.eigenvalues().data() + n);
  std::sort(roots.begin(), roots.end(), [](Complex a, Complex b) {
    return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
  });
  return roots;
}

/// Imaginary-axis sample points: t = 0 and +-t for t log-spaced in [t_min, t_max].
[[nodiscard]] inline std::vector<double> imaginary_axis_samples(int count, double t_min, double t_max) {
  std::vector<double> ts{0.0};
  const int half = std::max(count / 2, 2);
  const double lo = std::log10(t_min), hi = std::log10(t_max);
  for (int k = 0; k < half; ++k) {
    const double t = std::pow(10.0, lo + (hi - lo) * k / (half - 1));
    ts.push_back(t);
    ts.push_back(-t);
  }
  return ts;
}

/// Samples |R(it)| along the imaginary axis and locates the poles of rational R; with every
/// pole in the right half-plane the maximum-modulus principle extends the boundary bound
/// to the whole left half-plane. BDF2 uses the larger modulus of its two roots.
[[nodiscard]] inline StabilityReport check_a_stability(const MethodDescriptor& m, const StabilityConfig& config = {}) {
  if (config.boundary_samples < 100) throw Error(ErrorCode::InvalidArgument, "boundary_samples must be >= 100");
  StabilityReport report;
  report.method = m.name;
  for (double t : imaginary_axis_samples(config.boundary_samples, config.t_min, config.t_max)) {
    const Complex z{0.0, t};
    double modulus;
    if (m.is_quadratic_root()) {
      const auto [principal, spurious] = bdf2_roots(z);
      modulus = std::max(std::abs(principal), std::abs(spurious));
    } else {
      modulus = std::abs(stability_value(m, z));
    }
    report.max_boundary_modulus = std::max(report.max_boundary_modulus, modulus);
  }
  if (const auto* r = m.rational()) {
    report.poles = polynomial_roots(r->denominator());
    report.lhp_pole_found =
        std::any_of(report.poles.begin(), report.poles.end(), [](Complex p) { return p.real() <= 0.0; });
  } else if (m.is_quadratic_root()) {
    report.poles = {Complex{1.5, 0.0}};
  }
  // Rational R with deg P > deg Q is unbounded at infinity regardless of boundary samples.
  bool bounded_at_infinity = true;
  if (const auto* r = m.rational())
    bounded_at_infinity = r->numerator().is_zero() || r->numerator().degree() <= r->denominator().degree();
  report.verdict_a =
      bounded_at_infinity && !report.lhp_pole_found && report.max_boundary_modulus <= 1.0 + config.tolerance;
  return report;
}

/// L-stability: lim |R(z)| as |z| -> infinity. Rational: |a_m/b_n| for m = n, 0 for m < n.
/// Exponential: limit taken along the negative real axis. BDF2: principal root ~ (2z)^(-1/2).
[[nodiscard]] inline StabilityReport check_l_stability(const MethodDescriptor& m, const StabilityConfig& config = {}) {
  StabilityReport report = check_a_stability(m, config);
  if (const auto* r = m.rational()) {
    const int deg_p = r->numerator().degree();
    const int deg_q = r->denominator().degree();
    if (r->numerator().is_zero() || deg_p < deg_q) {
      report.l_limit = 0.0;
    } else if (deg_p == deg_q) {
      report.l_limit = std::abs(to_double(r->numerator().leading() / r->denominator().leading()));
    } else {
      report.l_limit = std::numeric_limits<double>::infinity();
    }
  } else if (m.is_exponential()) {
    report.l_limit = 0.0;
    report.limit_direction = "negative-real-axis";
  } else {
    report.l_limit = 0.0;
  }
  report.verdict_l = report.l_limit == 0.0 && report.verdict_a;
  return report;
}

}  // namespace stiffgrad
