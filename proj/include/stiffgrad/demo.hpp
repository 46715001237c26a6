#pragma once

// Vanishing-gradient demonstration on y' = diag(theta_slow, theta_stiff) y with a
// squared-error loss against data generated at theta_true.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "stiffgrad/analysis.hpp"
#include "stiffgrad/errors.hpp"
#include "stiffgrad/report.hpp"
#include "stiffgrad/sensitivity.hpp"
#include "stiffgrad/stability_catalog.hpp"

namespace stiffgrad {

enum class DemoLoss { FinalTime, Trajectory };

struct DemoOptions {
  std::string method = "backward-euler";
  std::vector<double> sweep{-1e1, -1e2, -1e3, -1e4, -1e5, -1e6};
  double h = 0.1;
  int steps = 10;
  double y0_slow = 1.0;
  double y0_stiff = 1.0;
  double theta_slow = -1.0;
  double theta_slow_true = -0.5;
  double theta_stiff_true = -5.0;
  DemoLoss loss = DemoLoss::FinalTime;
  double threshold = 1e-12;
  int iterations = 100;
  double learning_rate = 1e-2;
  double trace_stiff_start = -1e4;
};

struct ModeGradient {
  double loss = 0.0;
  double gradient = 0.0;
};

/// Loss contribution and dL/dtheta of one decoupled mode.
[[nodiscard]] inline ModeGradient mode_gradient(const MethodDescriptor& method, double theta, double theta_true,
                                                double y0, const DemoOptions& options) {
  const auto model = integrate_linear_with_sensitivity(StepContext(method, options.h, Complex{theta, 0.0}),
                                                       Complex{y0, 0.0}, options.steps, Bdf2Mode::TwoStep);
  const auto data = integrate_linear_with_sensitivity(StepContext(method, options.h, Complex{theta_true, 0.0}),
                                                      Complex{y0, 0.0}, options.steps, Bdf2Mode::TwoStep);
  ModeGradient out;
  const std::size_t first = options.loss == DemoLoss::FinalTime ? model.steps() : 1;
  for (std::size_t n = first; n <= model.steps(); ++n) {
    const double residual = model.states[n].real() - data.states[n].real();
    out.loss += residual * residual;
    out.gradient += 2.0 * residual * model.sensitivities[n].real();
  }
  return out;
}

[[nodiscard]] inline lab::DemoReport run_vanishing_gradient_demo(const DemoOptions& options) {
  if (options.sweep.size() < 2) throw Error(ErrorCode::InvalidArgument, "demo sweep needs at least two values");
  for (std::size_t i = 1; i < options.sweep.size(); ++i)
    if (!(std::abs(options.sweep[i]) > std::abs(options.sweep[i - 1])))
      throw Error(ErrorCode::InvalidArgument, "demo sweep must be strictly increasing in magnitude");
  const MethodDescriptor& method = find_method(options.method);

  lab::DemoReport report;
  report.method = method.name;
  report.loss = options.loss == DemoLoss::FinalTime ? "final" : "trajectory";
  report.h = options.h;
  report.steps = options.steps;
  report.theta_slow = options.theta_slow;
  report.theta_slow_true = options.theta_slow_true;
  report.theta_stiff_true = options.theta_stiff_true;
  report.sweep = options.sweep;
  report.threshold = options.threshold;
  report.learning_rate = options.learning_rate;
  report.trace_stiff_start = options.trace_stiff_start;

  std::vector<double> log_k, log_g;
  for (double stiff : options.sweep) {
    const auto slow = mode_gradient(method, options.theta_slow, options.theta_slow_true, options.y0_slow, options);
    const auto fast = mode_gradient(method, stiff, options.theta_stiff_true, options.y0_stiff, options);
    report.slow_gradients.push_back(std::abs(slow.gradient));
    report.stiff_gradients.push_back(std::abs(fast.gradient));
    if (fast.gradient != 0.0) {
      log_k.push_back(std::log(std::abs(stiff)));
      log_g.push_back(std::log(std::abs(fast.gradient)));
    }
  }
  report.stiff_slope = log_k.size() >= 2 ? least_squares_line(log_k, log_g).slope : 0.0;
  const auto [lo, hi] = std::minmax_element(report.slow_gradients.begin(), report.slow_gradients.end());
  report.slow_gradient_ratio = *lo > 0.0 ? *hi / *lo : std::numeric_limits<double>::infinity();

  double theta_slow = options.theta_slow;
  double theta_stiff = options.trace_stiff_start;
  double max_stiff_gradient = 0.0;
  for (int it = 0; it < options.iterations; ++it) {
    const auto slow = mode_gradient(method, theta_slow, options.theta_slow_true, options.y0_slow, options);
    const auto fast = mode_gradient(method, theta_stiff, options.theta_stiff_true, options.y0_stiff, options);
    report.trace.push_back({it, theta_slow, theta_stiff, slow.gradient, fast.gradient, slow.loss + fast.loss});
    max_stiff_gradient = std::max(max_stiff_gradient, std::abs(fast.gradient));
    const double slow_step = options.learning_rate * slow.gradient;
    const double stiff_step = options.learning_rate * fast.gradient;
    theta_slow -= slow_step;
    theta_stiff -= stiff_step;
    report.slow_cumulative_update += std::abs(slow_step);
    report.stiff_cumulative_update += std::abs(stiff_step);
  }
  report.stalled = !report.trace.empty() && max_stiff_gradient < options.threshold;
  return report;
}

}  // namespace stiffgrad
