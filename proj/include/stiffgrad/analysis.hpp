#pragma once

// Numerical checks of the left-half-plane derivative bounds
//   |R'(z)| <= 1/(-Re z)            (global, Cauchy estimate)
//   |R'(z)| <= 1/(|z| cos delta)    (sector |arg(-z)| <= delta)
// plus ray sampling / log-log decay fits and stability-region rasters.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <complex>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "stiffgrad/errors.hpp"
#include "stiffgrad/stability_catalog.hpp"

namespace stiffgrad {

inline constexpr double kBoundTolerance = 1e-9;

[[nodiscard]] inline std::vector<double> logspace(double lo, double hi, int points) {
  if (!(lo > 0.0) || !(hi >= lo) || points < 1) throw Error(ErrorCode::InvalidArgument, "logspace needs 0 < lo <= hi");
  std::vector<double> out(static_cast<std::size_t>(points));
  if (points == 1) {
    out[0] = lo;
    return out;
  }
  const double a = std::log10(lo), b = std::log10(hi);
  for (int k = 0; k < points; ++k) out[static_cast<std::size_t>(k)] = std::pow(10.0, a + (b - a) * k / (points - 1));
  out.front() = lo;
  out.back() = hi;
  return out;
}

[[nodiscard]] inline std::vector<double> linspace(double lo, double hi, int points) {
  std::vector<double> out(static_cast<std::size_t>(points));
  for (int k = 0; k < points; ++k)
    out[static_cast<std::size_t>(k)] = points == 1 ? lo : lo + (hi - lo) * k / (points - 1);
  return out;
}

class SectorSpec {
 public:
  explicit SectorSpec(double delta) : delta_(delta) {
    if (!(delta > 0.0 && delta < std::numbers::pi / 2))
      throw Error(ErrorCode::InvalidArgument, "sector half-angle must lie in (0, pi/2)");
  }
  [[nodiscard]] double delta() const noexcept { return delta_; }
  [[nodiscard]] bool contains(Complex z) const { return z.real() < 0.0 && std::abs(std::arg(-z)) <= delta_; }

 private:
  double delta_;
};

/// Log-spaced left-half-plane grid: Re z = -x with x log-spaced in [-re_max, -re_min],
/// Im z in {0} union +-(log-spaced magnitudes in [im_floor, im_max]).
struct GridSpec {
  double re_min = -1e3;  // most negative real part
  double re_max = -1e-3;
  double im_max = 1e3;
  double im_floor = 1e-3;
  int resolution = 100;

  [[nodiscard]] std::string describe() const {
    char buf[200];
    std::snprintf(buf, sizeof buf, "re in [%.17g, %.17g] log-spaced, |im| <= %.17g (floor %.17g), resolution %d",
                  re_min, re_max, im_max, im_floor, resolution);
    return buf;
  }
};

enum class BoundKind { Cauchy, Sector };

struct BoundReport {
  std::string method;
  BoundKind kind = BoundKind::Cauchy;
  std::string grid;
  double worst_product = 0.0;
  Complex worst_point{0.0, 0.0};
  std::optional<double> sector_delta;
  double sector_worst = 0.0;
  Complex sector_worst_point{0.0, 0.0};

  [[nodiscard]] bool pass() const {
    const double value = kind == BoundKind::Cauchy ? worst_product : sector_worst;
    return std::isfinite(value) && value <= 1.0 + kBoundTolerance;
  }
};

namespace detail {

inline void require_bound_applicable(const MethodDescriptor& m) {
  if (m.is_quadratic_root())
    throw Error(ErrorCode::NotApplicable, "branch point at z = -1/2 (BDF2 root is not analytic in the left half-plane)");
  if (const auto* r = m.rational()) {
    for (Complex p : polynomial_roots(r->denominator()))
      if (p.real() <= 0.0) throw Error(ErrorCode::NotApplicable, m.name + " has a pole in the closed left half-plane");
  }
}

}  // namespace detail

[[nodiscard]] inline BoundReport cauchy_bound_check(const MethodDescriptor& m, const GridSpec& grid = {}) {
  detail::require_bound_applicable(m);
  if (!(grid.re_min < grid.re_max && grid.re_max < 0.0))
    throw Error(ErrorCode::InvalidArgument, "real range must be strictly negative");
  if (grid.resolution < 2) throw Error(ErrorCode::InvalidArgument, "resolution must be >= 2");
  BoundReport report;
  report.method = m.name;
  report.grid = grid.describe();
  const auto xs = logspace(-grid.re_max, -grid.re_min, grid.resolution);
  const auto ims = imaginary_axis_samples(grid.resolution, grid.im_floor, grid.im_max);
  for (double x : xs) {
    for (double y : ims) {
      const Complex z{-x, y};
      const double product = std::abs(stability_derivative_value(m, z)) * x;
      if (product > report.worst_product || std::isnan(product)) {
        report.worst_product = product;
        report.worst_point = z;
      }
    }
  }
  return report;
}

/// Samples z = -t e^{i phi}, |phi| <= delta, t log-spaced in t_range.
[[nodiscard]] inline BoundReport sector_bound_check(const MethodDescriptor& m, const SectorSpec& sector, double t_min,
                                                    double t_max, int resolution) {
  detail::require_bound_applicable(m);
  if (resolution < 2) throw Error(ErrorCode::InvalidArgument, "resolution must be >= 2");
  BoundReport report;
  report.method = m.name;
  report.kind = BoundKind::Sector;
  report.sector_delta = sector.delta();
  char buf[160];
  std::snprintf(buf, sizeof buf, "sector |arg(-z)| <= %.17g, t in [%.17g, %.17g], resolution %d", sector.delta(), t_min,
                t_max, resolution);
  report.grid = buf;
  const double cos_delta = std::cos(sector.delta());
  const auto ts = logspace(t_min, t_max, resolution);
  const auto phis = linspace(-sector.delta(), sector.delta(), resolution | 1);
  for (double t : ts) {
    for (double phi : phis) {
      const Complex z = -t * std::polar(1.0, phi);
      const double deriv = std::abs(stability_derivative_value(m, z));
      const double sector_value = deriv * std::abs(z) * cos_delta;
      const double product = deriv * (-z.real());
      if (sector_value > report.sector_worst || std::isnan(sector_value)) {
        report.sector_worst = sector_value;
        report.sector_worst_point = z;
      }
      if (product > report.worst_product || std::isnan(product)) {
        report.worst_product = product;
        report.worst_point = z;
      }
    }
  }
  return report;
}

struct RaySamples {
  std::string method;
  double angle = 0.0;
  std::vector<double> t;
  std::vector<double> abs_derivative;
};

/// |R'(-t e^{i angle})| at log-spaced t.
[[nodiscard]] inline RaySamples sample_ray(const MethodDescriptor& m, double t_min, double t_max, int points,
                                           double angle = 0.0) {
  if (!(t_min > 0.0 && t_min < t_max)) throw Error(ErrorCode::InvalidArgument, "ray needs 0 < t_min < t_max");
  if (points < 10) throw Error(ErrorCode::InvalidArgument, "ray needs at least 10 points");
  RaySamples out;
  out.method = m.name;
  out.angle = angle;
  out.t = logspace(t_min, t_max, points);
  out.abs_derivative.reserve(out.t.size());
  const Complex direction = -std::polar(1.0, angle);
  for (double t : out.t) out.abs_derivative.push_back(std::abs(stability_derivative_value(m, t * direction)));
  return out;
}

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;  // max |y_i - fit(x_i)|
};

[[nodiscard]] inline LinearFit least_squares_line(const std::vector<double>& x, const std::vector<double>& y) {
  const auto n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  for (std::size_t i = 0; i < x.size(); ++i)
    fit.residual = std::max(fit.residual, std::abs(y[i] - (fit.intercept + fit.slope * x[i])));
  return fit;
}

struct DecayFit {
  std::string method;
  double angle = 0.0;
  std::vector<double> t;
  std::vector<double> abs_derivative;
  double slope = 0.0;     // log|R'| vs log t
  double residual = 0.0;  // max absolute deviation of the log-log fit
  /// Slope of log|R'| against -t; set when the power-law fit was rejected.
  std::optional<double> exponential_rate;
  std::optional<double> exponential_residual;
  DecayClass classification = DecayClass::power_law(0);
  std::vector<std::string> notes;
};

inline constexpr double kUnderflowFloor = 1e-300;

/// Least-squares log-log slope, rounded to the nearest half-integer. When the power law
/// fits poorly (residual > 0.1) and log|R'| is linear in -t with rate cos(angle) (1 on the
/// negative real axis), the samples are classified Exponential instead.
[[nodiscard]] inline DecayFit classify_decay(const RaySamples& samples) {
  if (samples.t.size() != samples.abs_derivative.size() || samples.t.size() < 10)
    throw Error(ErrorCode::DegenerateSamples, "need at least 10 samples");
  DecayFit fit;
  fit.method = samples.method;
  fit.angle = samples.angle;
  std::size_t dropped = 0;
  for (std::size_t i = 0; i < samples.t.size(); ++i) {
    if (!(samples.abs_derivative[i] >= kUnderflowFloor)) {
      ++dropped;
      continue;
    }
    fit.t.push_back(samples.t[i]);
    fit.abs_derivative.push_back(samples.abs_derivative[i]);
  }
  if (dropped > 0)
    fit.notes.push_back(std::to_string(dropped) + " samples below 1e-300 dropped before fitting");
  if (fit.t.size() < 10) throw Error(ErrorCode::DegenerateSamples, "fewer than 10 samples above the underflow floor");

  std::vector<double> log_t, log_d, neg_t;
  for (std::size_t i = 0; i < fit.t.size(); ++i) {
    log_t.push_back(std::log(fit.t[i]));
    log_d.push_back(std::log(fit.abs_derivative[i]));
    neg_t.push_back(-fit.t[i]);
  }
  const LinearFit power = least_squares_line(log_t, log_d);
  fit.slope = power.slope;
  fit.residual = power.residual;
  if (!std::isfinite(fit.slope)) throw Error(ErrorCode::DegenerateSamples, "log-log slope is not finite");

  if (power.residual > 0.1) {
    const LinearFit expo = least_squares_line(neg_t, log_d);
    fit.exponential_rate = expo.slope;
    fit.exponential_residual = expo.residual;
    const double rate = std::cos(samples.angle);
    if (expo.residual < 1e-6 && std::abs(expo.slope - rate) <= 1e-6) {
      fit.classification = DecayClass::exponential();
      return fit;
    }
  }
  if (fit.t.back() / fit.t.front() < 1e3 * (1.0 - 1e-12))
    throw Error(ErrorCode::DegenerateSamples, "power-law fit needs samples spanning at least 3 decades");
  fit.classification = DecayClass::power_law_doubled(static_cast<int>(std::lround(2.0 * fit.slope)));
  return fit;
}

struct RegionRaster {
  std::string method;
  std::vector<double> re;
  std::vector<double> im;
  /// Row-major over (im, re): values[i * re.size() + j] = |R(re[j] + i im[i])|; poles are +inf.
  std::vector<double> abs_r;

  [[nodiscard]] double at(std::size_t im_index, std::size_t re_index) const { return abs_r[im_index * re.size() + re_index]; }
};

[[nodiscard]] inline RegionRaster stability_region_raster(const MethodDescriptor& m, double re_min, double re_max,
                                                          double im_min, double im_max, int resolution) {
  if (resolution < 16) throw Error(ErrorCode::InvalidArgument, "raster resolution must be >= 16");
  if (!(re_min < re_max && im_min < im_max)) throw Error(ErrorCode::InvalidArgument, "empty raster range");
  RegionRaster raster;
  raster.method = m.name;
  raster.re = linspace(re_min, re_max, resolution);
  raster.im = linspace(im_min, im_max, resolution);
  raster.abs_r.reserve(raster.re.size() * raster.im.size());
  for (double y : raster.im) {
    for (double x : raster.re) {
      double value;
      try {
        value = std::abs(stability_value(m, Complex{x, y}));
      } catch (const Error& e) {
        if (e.code() != ErrorCode::PoleEvaluation) throw;
        value = std::numeric_limits<double>::infinity();
      }
      raster.abs_r.push_back(value);
    }
  }
  return raster;
}

}  // namespace stiffgrad
