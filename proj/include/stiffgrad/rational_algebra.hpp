#pragma once

// Exact-coefficient polynomials and rational functions over the complex plane.
// Coefficients are integer rationals; evaluation converts to double precision,
// so leading-term cancellation in P'Q - PQ' is detected exactly.

#include <algorithm>
#include <complex>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <boost/rational.hpp>

#include "stiffgrad/errors.hpp"

namespace stiffgrad {

using Complex = std::complex<double>;
// Compare Coefficient against Coefficient (or via numerator()); boost 1.74 rational == int
// recurses forever under C++20 rewritten comparisons.
using Coefficient = boost::rational<std::int64_t>;

[[nodiscard]] inline double to_double(const Coefficient& c) {
  return static_cast<double>(c.numerator()) / static_cast<double>(c.denominator());
}

class Polynomial {
 public:
  /// Degree reported for the zero polynomial.
  static constexpr int kZeroDegree = std::numeric_limits<int>::min();

  Polynomial() = default;

  Polynomial(std::initializer_list<std::int64_t> ascending) {
    coeffs_.reserve(ascending.size());
    for (auto c : ascending) coeffs_.emplace_back(c);
    trim();
  }

  explicit Polynomial(std::vector<Coefficient> ascending) : coeffs_(std::move(ascending)) { trim(); }

  [[nodiscard]] static Polynomial monomial(Coefficient c, int power) {
    std::vector<Coefficient> v(static_cast<std::size_t>(power) + 1, Coefficient{0});
    v.back() = c;
    return Polynomial(std::move(v));
  }

  [[nodiscard]] bool is_zero() const noexcept { return coeffs_.empty(); }

  [[nodiscard]] int degree() const noexcept {
    return is_zero() ? kZeroDegree : static_cast<int>(coeffs_.size()) - 1;
  }

  [[nodiscard]] Coefficient coefficient(int power) const {
    if (power < 0 || power >= static_cast<int>(coeffs_.size())) return Coefficient{0};
    return coeffs_[static_cast<std::size_t>(power)];
  }

  [[nodiscard]] Coefficient leading() const { return is_zero() ? Coefficient{0} : coeffs_.back(); }

  [[nodiscard]] std::span<const Coefficient> coefficients() const noexcept { return coeffs_; }

  /// Horner evaluation in double-precision complex arithmetic.
  [[nodiscard]] Complex evaluate(Complex z) const {
    Complex acc{0.0, 0.0};
    for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * z + to_double(*it);
    return acc;
  }

  [[nodiscard]] Polynomial derivative() const {
    if (coeffs_.size() <= 1) return {};
    std::vector<Coefficient> d(coeffs_.size() - 1);
    for (std::size_t k = 1; k < coeffs_.size(); ++k)
      d[k - 1] = coeffs_[k] * static_cast<std::int64_t>(k);
    return Polynomial(std::move(d));
  }

  friend Polynomial operator+(const Polynomial& a, const Polynomial& b) {
    std::vector<Coefficient> out(std::max(a.coeffs_.size(), b.coeffs_.size()), Coefficient{0});
    for (std::size_t k = 0; k < a.coeffs_.size(); ++k) out[k] += a.coeffs_[k];
    for (std::size_t k = 0; k < b.coeffs_.size(); ++k) out[k] += b.coeffs_[k];
    return Polynomial(std::move(out));
  }

  friend Polynomial operator-(const Polynomial& a) {
    std::vector<Coefficient> out(a.coeffs_);
    for (auto& c : out) c = -c;
    return Polynomial(std::move(out));
  }

  friend Polynomial operator-(const Polynomial& a, const Polynomial& b) { return a + (-b); }

  friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
    if (a.is_zero() || b.is_zero()) return {};
    std::vector<Coefficient> out(a.coeffs_.size() + b.coeffs_.size() - 1, Coefficient{0});
    for (std::size_t i = 0; i < a.coeffs_.size(); ++i)
      for (std::size_t j = 0; j < b.coeffs_.size(); ++j) out[i + j] += a.coeffs_[i] * b.coeffs_[j];
    return Polynomial(std::move(out));
  }

  friend Polynomial operator*(const Coefficient& s, const Polynomial& p) {
    std::vector<Coefficient> out(p.coeffs_);
    for (auto& c : out) c *= s;
    return Polynomial(std::move(out));
  }

  friend bool operator==(const Polynomial& a, const Polynomial& b) { return a.coeffs_ == b.coeffs_; }

  /// Human-readable ascending form, e.g. "12 - 6z + z^2".
  [[nodiscard]] std::string to_string() const {
    if (is_zero()) return "0";
    std::string out;
    for (std::size_t k = 0; k < coeffs_.size(); ++k) {
      const Coefficient& c = coeffs_[k];
      if (c.numerator() == 0) continue;
      const bool negative = c.numerator() < 0;
      const Coefficient mag = negative ? -c : c;
      if (out.empty()) {
        if (negative) out += "-";
      } else {
        out += negative ? " - " : " + ";
      }
      const bool unit = mag.numerator() == 1 && mag.denominator() == 1 && k > 0;
      if (!unit) {
        out += std::to_string(mag.numerator());
        if (mag.denominator() != 1) out += "/" + std::to_string(mag.denominator());
      }
      if (k >= 1) out += "z";
      if (k >= 2) out += "^" + std::to_string(k);
    }
    return out;
  }

 private:
  void trim() {
    while (!coeffs_.empty() && coeffs_.back().numerator() == 0) coeffs_.pop_back();
  }

  std::vector<Coefficient> coeffs_;
};

[[nodiscard]] inline Complex poly_eval(const Polynomial& p, Complex z) { return p.evaluate(z); }

[[nodiscard]] inline Polynomial poly_derivative(const Polynomial& p) { return p.derivative(); }

/// Euclidean division over the rationals: a = q*b + r with deg r < deg b.
[[nodiscard]] inline std::pair<Polynomial, Polynomial> poly_divmod(const Polynomial& a, const Polynomial& b) {
  if (b.is_zero()) throw Error(ErrorCode::InvalidArgument, "polynomial division by zero");
  Polynomial quotient;
  Polynomial remainder = a;
  while (!remainder.is_zero() && remainder.degree() >= b.degree()) {
    const Polynomial term =
        Polynomial::monomial(remainder.leading() / b.leading(), remainder.degree() - b.degree());
    quotient = quotient + term;
    remainder = remainder - term * b;
  }
  return {quotient, remainder};
}

/// Monic greatest common divisor.
[[nodiscard]] inline Polynomial poly_gcd(Polynomial a, Polynomial b) {
  while (!b.is_zero()) {
    auto r = poly_divmod(a, b).second;
    a = std::move(b);
    b = std::move(r);
  }
  if (a.is_zero()) return a;
  return (Coefficient{1} / a.leading()) * a;
}

class RationalFunction {
 public:
  RationalFunction(Polynomial numerator, Polynomial denominator)
      : numerator_(std::move(numerator)), denominator_(std::move(denominator)) {
    if (denominator_.is_zero())
      throw Error(ErrorCode::InvalidArgument, "rational function with zero denominator");
  }

  [[nodiscard]] const Polynomial& numerator() const noexcept { return numerator_; }
  [[nodiscard]] const Polynomial& denominator() const noexcept { return denominator_; }

  /// P(z)/Q(z); raises PoleEvaluation when |Q(z)| < 1e-300.
  [[nodiscard]] Complex evaluate(Complex z) const {
    const Complex q = denominator_.evaluate(z);
    if (std::abs(q) < 1e-300) throw Error(ErrorCode::PoleEvaluation, "denominator vanishes at evaluation point");
    return numerator_.evaluate(z) / q;
  }

  /// Cancels the exact common factor of P and Q. Opt-in; nothing else normalizes.
  [[nodiscard]] RationalFunction reduce() const {
    if (numerator_.is_zero()) return {Polynomial{}, Polynomial{1}};
    const Polynomial g = poly_gcd(numerator_, denominator_);
    return {poly_divmod(numerator_, g).first, poly_divmod(denominator_, g).first};
  }

  friend bool operator==(const RationalFunction& a, const RationalFunction& b) {
    return a.numerator_ == b.numerator_ && a.denominator_ == b.denominator_;
  }

  [[nodiscard]] std::string to_string() const {
    return "(" + numerator_.to_string() + ")/(" + denominator_.to_string() + ")";
  }

 private:
  Polynomial numerator_;
  Polynomial denominator_;
};

/// Quotient rule with exact coefficients: (P'Q - PQ') / Q^2, unreduced.
[[nodiscard]] inline RationalFunction rational_derivative(const RationalFunction& r) {
  const Polynomial& p = r.numerator();
  const Polynomial& q = r.denominator();
  return {p.derivative() * q - p * q.derivative(), q * q};
}

/// Asymptotic behaviour of R'(z) (or of R itself when it is unbounded) as |z| -> infinity.
/// Power-law exponents are stored doubled so half-integer rates such as -3/2 are exact.
class DecayClass {
 public:
  enum class Kind { PowerLaw, Exponential, Unbounded, Vanishing };

  [[nodiscard]] static DecayClass power_law(int exponent) { return {Kind::PowerLaw, 2 * exponent}; }
  [[nodiscard]] static DecayClass power_law_doubled(int doubled_exponent) { return {Kind::PowerLaw, doubled_exponent}; }
  [[nodiscard]] static DecayClass exponential() { return {Kind::Exponential, 0}; }
  [[nodiscard]] static DecayClass unbounded(int growth) { return {Kind::Unbounded, 2 * growth}; }
  /// R' identically zero (constant R); no decay rate exists.
  [[nodiscard]] static DecayClass vanishing() { return {Kind::Vanishing, 0}; }

  [[nodiscard]] Kind kind() const noexcept { return kind_; }
  [[nodiscard]] int doubled_exponent() const noexcept { return doubled_; }
  [[nodiscard]] double exponent() const noexcept { return 0.5 * doubled_; }

  friend bool operator==(const DecayClass&, const DecayClass&) = default;

  /// "-2", "-3/2", "exp", "unbounded(1)", "zero".
  [[nodiscard]] std::string to_string() const {
    switch (kind_) {
      case Kind::Exponential: return "exp";
      case Kind::Vanishing: return "zero";
      case Kind::Unbounded: return "unbounded(" + half_integer(doubled_) + ")";
      case Kind::PowerLaw: return half_integer(doubled_);
    }
    return "?";
  }

  /// Inverse of to_string.
  [[nodiscard]] static DecayClass parse(const std::string& text) {
    if (text == "exp") return exponential();
    if (text == "zero") return vanishing();
    if (text.rfind("unbounded(", 0) == 0 && text.back() == ')')
      return {Kind::Unbounded, parse_half_integer(text.substr(10, text.size() - 11))};
    return {Kind::PowerLaw, parse_half_integer(text)};
  }

 private:
  DecayClass(Kind kind, int doubled) : kind_(kind), doubled_(doubled) {}

  static std::string half_integer(int doubled) {
    if (doubled % 2 == 0) return std::to_string(doubled / 2);
    return std::to_string(doubled) + "/2";
  }

  static int parse_half_integer(const std::string& s) {
    const auto slash = s.find('/');
    if (slash == std::string::npos) return 2 * std::stoi(s);
    if (s.substr(slash + 1) != "2") throw Error(ErrorCode::InvalidArgument, "bad decay class: " + s);
    return std::stoi(s.substr(0, slash));
  }

  Kind kind_;
  int doubled_;
};

/// Degree-based classification. m > n gives Unbounded(m - n) for R itself; otherwise the
/// exponent is deg(P'Q - PQ') - 2n after exact cancellation.
[[nodiscard]] inline DecayClass asymptotic_decay_class(const RationalFunction& r) {
  const int m = r.numerator().degree();
  const int n = r.denominator().degree();
  if (!r.numerator().is_zero() && m > n) return DecayClass::unbounded(m - n);
  const Polynomial top = rational_derivative(r).numerator();
  if (top.is_zero()) return DecayClass::vanishing();
  return DecayClass::power_law(top.degree() - 2 * n);
}

/// Generic answer for degrees alone, assuming no cancellation beyond the forced one at m = n.
[[nodiscard]] inline DecayClass decay_class_from_degrees(int m, int n) {
  if (m < 0 || n < 0) throw Error(ErrorCode::InvalidArgument, "degrees must be non-negative");
  if (m > n) return DecayClass::unbounded(m - n);
  if (m == n) return n == 0 ? DecayClass::vanishing() : DecayClass::power_law(-2);
  return DecayClass::power_law(m - n - 1);
}

}  // namespace stiffgrad
