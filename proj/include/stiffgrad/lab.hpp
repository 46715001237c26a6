#pragma once

// Subcommand implementations behind the stiffgrad_lab CLI. Each command returns its
// envelope, a CSV body and an exit code; rendering to text is separate so the commands
// can be tested without a process boundary.

#include <cmath>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "stiffgrad/acceptance.hpp"
#include "stiffgrad/analysis.hpp"
#include "stiffgrad/demo.hpp"
#include "stiffgrad/errors.hpp"
#include "stiffgrad/report.hpp"
#include "stiffgrad/sensitivity.hpp"
#include "stiffgrad/stability_catalog.hpp"

namespace stiffgrad::lab {

namespace exit_code {
inline constexpr int kOk = 0;
inline constexpr int kMismatch = 2;
inline constexpr int kUsage = 64;
inline constexpr int kIo = 74;
}  // namespace exit_code

enum class Format { Csv, Json };

struct CommandOutput {
  ReportEnvelope envelope;
  std::string csv_body;
  int exit_code = exit_code::kOk;
};

[[nodiscard]] inline std::string render(const CommandOutput& out, Format format) {
  if (format == Format::Json) return json(out.envelope).dump(2) + "\n";
  return csv_envelope_line(out.envelope) + out.csv_body;
}

/// "all" expands to the eight table methods; otherwise a comma-separated list of names.
[[nodiscard]] inline std::vector<MethodDescriptor> resolve_methods(const std::string& list) {
  if (list == "all") return table_methods();
  std::vector<MethodDescriptor> out;
  std::stringstream ss(list);
  std::string name;
  while (std::getline(ss, name, ','))
    if (!name.empty()) out.push_back(find_method(name));
  if (out.empty()) throw Error(ErrorCode::InvalidArgument, "no methods selected");
  return out;
}

namespace detail {

inline ReportEnvelope envelope(std::string kind, const std::string& command_line, json payload) {
  ReportEnvelope env;
  env.kind = std::move(kind);
  env.command_line = command_line;
  env.timestamp = utc_timestamp();
  env.payload = std::move(payload);
  return env;
}

}  // namespace detail

// ---------------------------------------------------------------------------

[[nodiscard]] inline std::vector<CatalogRow> catalog_rows() {
  std::vector<CatalogRow> rows;
  for (const auto& m : catalog_list()) {
    const auto report = check_l_stability(m);
    rows.push_back({m.name, m.order, m.steps, std::string(m.form_name()), report.verdict_a, report.verdict_l,
                    report.l_limit, report.max_boundary_modulus, m.expected_decay.to_string()});
  }
  return rows;
}

[[nodiscard]] inline CommandOutput cmd_catalog(const std::string& command_line = "catalog") {
  const auto rows = catalog_rows();
  std::ostringstream csv;
  CsvWriter w(csv);
  w.row({"method", "order", "steps", "form", "a_stable", "l_stable", "l_limit", "expected_decay"});
  for (const auto& r : rows)
    w.row({r.method, std::to_string(r.order), std::to_string(r.steps), r.form, format_bool(r.a_stable),
           format_bool(r.l_stable), format_number(r.l_limit), r.expected_decay});
  return {detail::envelope("catalog", command_line, json(rows)), csv.str(), exit_code::kOk};
}

// ---------------------------------------------------------------------------

struct DecayOptions {
  std::string methods = "all";
  double t_min = 1e2;
  double t_max = 1e6;
  int points = 200;
  double angle = 0.0;
  /// Emit the sampled |R'| columns (t, one column per method) instead of the fit table.
  bool samples = false;
};

[[nodiscard]] inline DecayRow decay_row(const MethodDescriptor& m, const DecayOptions& o) {
  const auto fit = classify_decay(sample_ray(m, o.t_min, o.t_max, o.points, o.angle));
  DecayRow row;
  row.method = m.name;
  row.slope = fit.slope;
  row.residual = fit.residual;
  row.decay_class = fit.classification.to_string();
  row.expected = m.expected_decay.to_string();
  row.match = fit.classification == m.expected_decay;
  row.angle = fit.angle;
  row.exponential_rate = fit.exponential_rate;
  row.notes = fit.notes;
  row.t = fit.t;
  row.abs_derivative = fit.abs_derivative;
  return row;
}

[[nodiscard]] inline CommandOutput cmd_decay(const DecayOptions& o, const std::string& command_line = "decay") {
  std::vector<DecayRow> rows;
  bool all_match = true;
  const auto methods = resolve_methods(o.methods);
  for (const auto& m : methods) {
    rows.push_back(decay_row(m, o));
    all_match = all_match && rows.back().match;
  }
  std::ostringstream csv;
  CsvWriter w(csv);
  if (o.samples) {
    // Raw ray samples before any underflow truncation, one column per method.
    std::vector<RaySamples> raw;
    std::vector<std::string> header{"t"};
    for (const auto& m : methods) {
      raw.push_back(sample_ray(m, o.t_min, o.t_max, o.points, o.angle));
      header.push_back(m.name);
    }
    w.row(header);
    for (std::size_t i = 0; i < raw.front().t.size(); ++i) {
      std::vector<std::string> fields{format_number(raw.front().t[i])};
      for (const auto& r : raw) fields.push_back(format_number(r.abs_derivative[i]));
      w.row(fields);
    }
  } else {
    w.row({"method", "slope", "residual", "class", "expected", "match"});
    for (const auto& r : rows)
      w.row({r.method, format_number(r.slope), format_number(r.residual), r.decay_class, r.expected, format_bool(r.match)});
  }
  return {detail::envelope("decay-table", command_line, json(rows)), csv.str(),
          all_match ? exit_code::kOk : exit_code::kMismatch};
}

// ---------------------------------------------------------------------------

struct BoundOptions {
  std::string methods = "all";
  GridSpec grid{};
  double delta = std::numbers::pi / 4;
  double sector_t_min = 1e-3;
  double sector_t_max = 1e6;
  int sector_resolution = 100;
};

[[nodiscard]] inline BoundRow bound_row(const MethodDescriptor& m, const BoundOptions& o) {
  BoundRow row;
  row.method = m.name;
  row.sector_delta = o.delta;
  try {
    const auto global = cauchy_bound_check(m, o.grid);
    const auto sector = sector_bound_check(m, SectorSpec(o.delta), o.sector_t_min, o.sector_t_max, o.sector_resolution);
    row.grid = global.grid + "; " + sector.grid;
    row.worst_product = global.worst_product;
    row.worst_re = global.worst_point.real();
    row.worst_im = global.worst_point.imag();
    row.sector_worst = sector.sector_worst;
    row.sector_re = sector.sector_worst_point.real();
    row.sector_im = sector.sector_worst_point.imag();
    row.pass = global.pass() && sector.pass();
    row.status = row.pass ? "pass" : "fail";
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NotApplicable) throw;
    row.status = "not-applicable";
    row.message = m.is_quadratic_root() ? "not-applicable (branch point at z = -1/2)" : e.what();
    row.pass = false;
  }
  return row;
}

[[nodiscard]] inline CommandOutput cmd_bound(const BoundOptions& o, const std::string& command_line = "bound") {
  std::vector<BoundRow> rows;
  bool ok = true;
  for (const auto& m : resolve_methods(o.methods)) {
    rows.push_back(bound_row(m, o));
    if (rows.back().status == "fail") ok = false;
  }
  std::ostringstream csv;
  CsvWriter w(csv);
  w.row({"method", "status", "worst_product", "worst_re", "worst_im", "sector_delta", "sector_worst", "pass"});
  for (const auto& r : rows) {
    if (r.status == "not-applicable") {
      w.row({r.method, r.message, "", "", "", format_number(r.sector_delta), "", format_bool(false)});
      continue;
    }
    w.row({r.method, r.status, format_number(r.worst_product), format_number(r.worst_re), format_number(r.worst_im),
           format_number(r.sector_delta), format_number(r.sector_worst), format_bool(r.pass)});
  }
  return {detail::envelope("bound-report", command_line, json(rows)), csv.str(),
          ok ? exit_code::kOk : exit_code::kMismatch};
}

// ---------------------------------------------------------------------------

struct RegionOptions {
  std::string method = "backward-euler";
  double re_min = -3.0, re_max = 3.0;
  double im_min = -3.0, im_max = 3.0;
  int resolution = 61;
};

[[nodiscard]] inline CommandOutput cmd_region(const RegionOptions& o, const std::string& command_line = "region") {
  const auto raster =
      stability_region_raster(find_method(o.method), o.re_min, o.re_max, o.im_min, o.im_max, o.resolution);
  const RegionPayload payload{raster.method, raster.re, raster.im, raster.abs_r};
  std::ostringstream csv;
  CsvWriter w(csv);
  w.row({"re", "im", "abs_r"});
  for (std::size_t i = 0; i < raster.im.size(); ++i)
    for (std::size_t j = 0; j < raster.re.size(); ++j)
      w.row({format_number(raster.re[j]), format_number(raster.im[i]), format_number(raster.at(i, j))});
  return {detail::envelope("region-raster", command_line, json(payload)), csv.str(), exit_code::kOk};
}

// ---------------------------------------------------------------------------

struct SensOptions {
  std::string methods = "backward-euler";
  std::vector<double> lambdas{-10.0};
  double h = 0.1;
  int steps = 1;
  double y0 = 1.0;
  Bdf2Mode bdf2_mode = Bdf2Mode::TwoStep;
};

inline constexpr double kSensTolerance = 1e-10;

[[nodiscard]] inline SensRow sens_row(const MethodDescriptor& m, double lambda, const SensOptions& o) {
  const StepContext ctx(m, o.h, Complex{lambda, 0.0});
  const Complex y0{o.y0, 0.0};
  const auto trace = integrate_linear_with_sensitivity(ctx, y0, o.steps, o.bdf2_mode);
  Complex closed;
  std::string oracle = "closed-form";
  if (m.is_quadratic_root() && o.bdf2_mode == Bdf2Mode::TwoStep) {
    closed = bdf2_two_step_closed_form(o.h, ctx.lambda, y0, o.steps).sensitivity;
    oracle = "two-step";
  } else {
    closed = closed_form_sensitivity(ctx, y0, o.steps);
    if (m.is_quadratic_root()) oracle = "principal-root";
  }
  // Exact flow over the horizon T = N h: d/dlambda (y0 e^{lambda T}) = T y0 e^{lambda T}.
  const double horizon = o.steps * o.h;
  const Complex exact = exact_solution_sensitivity(ctx.lambda, horizon, y0);
  const Complex numeric = trace.final_sensitivity();
  SensRow row;
  row.method = m.name;
  row.oracle = oracle;
  row.lambda = lambda;
  row.h = o.h;
  row.steps = o.steps;
  row.y0 = o.y0;
  row.z = ctx.z().real();
  row.numeric_re = numeric.real();
  row.numeric_im = numeric.imag();
  row.closed_form_re = closed.real();
  row.closed_form_im = closed.imag();
  row.exact_re = exact.real();
  row.exact_im = exact.imag();
  const double diff = std::abs(numeric - closed);
  row.relative_gap = diff == 0.0 ? 0.0 : diff / std::abs(closed);
  return row;
}

[[nodiscard]] inline CommandOutput cmd_sens(const SensOptions& o, const std::string& command_line = "sens") {
  if (o.lambdas.empty()) throw Error(ErrorCode::InvalidArgument, "no lambda values");
  std::vector<SensRow> rows;
  bool ok = true;
  for (const auto& m : resolve_methods(o.methods)) {
    for (double lambda : o.lambdas) {
      rows.push_back(sens_row(m, lambda, o));
      if (!(rows.back().relative_gap <= kSensTolerance)) ok = false;
    }
  }
  std::ostringstream csv;
  CsvWriter w(csv);
  w.row({"method", "oracle", "lambda", "h", "steps", "z", "numeric_re", "numeric_im", "closed_form_re",
         "closed_form_im", "exact_re", "exact_im", "relative_gap"});
  for (const auto& r : rows)
    w.row({r.method, r.oracle, format_number(r.lambda), format_number(r.h), std::to_string(r.steps),
           format_number(r.z), format_number(r.numeric_re), format_number(r.numeric_im),
           format_number(r.closed_form_re), format_number(r.closed_form_im), format_number(r.exact_re),
           format_number(r.exact_im), format_number(r.relative_gap)});
  return {detail::envelope("sensitivity-sweep", command_line, json(rows)), csv.str(),
          ok ? exit_code::kOk : exit_code::kMismatch};
}

// ---------------------------------------------------------------------------

[[nodiscard]] inline CommandOutput cmd_demo(const DemoOptions& o, const std::string& command_line = "demo") {
  const auto report = run_vanishing_gradient_demo(o);
  std::ostringstream csv;
  csv << "# summary stiff_slope=" << format_number(report.stiff_slope)
      << " slow_gradient_ratio=" << format_number(report.slow_gradient_ratio)
      << " stiff_cumulative_update=" << format_number(report.stiff_cumulative_update)
      << " slow_cumulative_update=" << format_number(report.slow_cumulative_update)
      << " stalled=" << format_bool(report.stalled) << '\n';
  CsvWriter w(csv);
  w.row({"section", "index", "theta_slow", "theta_stiff", "slow_gradient", "stiff_gradient"});
  for (std::size_t i = 0; i < report.sweep.size(); ++i)
    w.row({"sweep", std::to_string(i), format_number(report.theta_slow), format_number(report.sweep[i]),
           format_number(report.slow_gradients[i]), format_number(report.stiff_gradients[i])});
  for (const auto& p : report.trace)
    w.row({"trace", std::to_string(p.iteration), format_number(p.theta_slow), format_number(p.theta_stiff),
           format_number(p.slow_gradient), format_number(p.stiff_gradient)});
  return {detail::envelope("demo-report", command_line, json(report)), csv.str(), exit_code::kOk};
}

// ---------------------------------------------------------------------------

[[nodiscard]] inline CommandOutput cmd_verify(const std::string& command_line = "verify") {
  const auto rows = run_acceptance_suite();
  bool ok = true;
  std::ostringstream csv;
  CsvWriter w(csv);
  w.row({"id", "name", "pass", "measured", "threshold", "runtime_ms", "detail"});
  for (const auto& r : rows) {
    ok = ok && r.pass;
    w.row({std::to_string(r.id), r.name, format_bool(r.pass), r.measured, r.threshold, format_number(r.runtime_ms),
           r.detail});
  }
  return {detail::envelope("verify-suite", command_line, json(rows)), csv.str(),
          ok ? exit_code::kOk : exit_code::kMismatch};
}

}  // namespace stiffgrad::lab
