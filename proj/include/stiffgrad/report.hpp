#pragma once

// Report payloads, the envelope that wraps them, and their CSV/JSON encodings.
// Column orders and key names are frozen in docs/schema.md.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace stiffgrad::lab {

inline constexpr std::string_view kToolVersion = "0.1.0";

using nlohmann::json;

// ---------------------------------------------------------------------------
// Formatting helpers

[[nodiscard]] inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

[[nodiscard]] inline std::string format_bool(bool b) { return b ? "true" : "false"; }

[[nodiscard]] inline std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

class CsvWriter {
 public:
  explicit CsvWriter(std::ostringstream& out) : out_(out) {}

  void row(const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) out_ << ',';
      out_ << csv_field(fields[i]);
    }
    out_ << '\n';
  }

 private:
  std::ostringstream& out_;
};

/// JSON has no infinity; +inf is written as null and read back as +inf.
[[nodiscard]] inline json number_or_null(double v) {
  if (std::isinf(v) && v > 0) return nullptr;
  return v;
}

[[nodiscard]] inline double number_from(const json& j) {
  return j.is_null() ? std::numeric_limits<double>::infinity() : j.get<double>();
}

[[nodiscard]] inline std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// ---------------------------------------------------------------------------
// Payloads

struct CatalogRow {
  std::string method;
  int order = 0;
  int steps = 1;
  std::string form;
  bool a_stable = false;
  bool l_stable = false;
  double l_limit = 0.0;
  double max_boundary_modulus = 0.0;
  std::string expected_decay;
  friend bool operator==(const CatalogRow&, const CatalogRow&) = default;
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(CatalogRow, method, order, steps, form, a_stable, l_stable, l_limit,
                                   max_boundary_modulus, expected_decay)

struct DecayRow {
  std::string method;
  double slope = 0.0;
  double residual = 0.0;
  std::string decay_class;
  std::string expected;
  bool match = false;
  double angle = 0.0;
  std::optional<double> exponential_rate;
  std::vector<std::string> notes;
  std::vector<double> t;
  std::vector<double> abs_derivative;
  friend bool operator==(const DecayRow&, const DecayRow&) = default;
};

inline void to_json(json& j, const DecayRow& r) {
  j = json{{"method", r.method},       {"slope", r.slope},       {"residual", r.residual},
           {"class", r.decay_class},   {"expected", r.expected}, {"match", r.match},
           {"angle", r.angle},         {"notes", r.notes},       {"t", r.t},
           {"abs_derivative", r.abs_derivative}};
  j["exponential_rate"] = r.exponential_rate ? json(*r.exponential_rate) : json(nullptr);
}

inline void from_json(const json& j, DecayRow& r) {
  j.at("method").get_to(r.method);
  j.at("slope").get_to(r.slope);
  j.at("residual").get_to(r.residual);
  j.at("class").get_to(r.decay_class);
  j.at("expected").get_to(r.expected);
  j.at("match").get_to(r.match);
  j.at("angle").get_to(r.angle);
  j.at("notes").get_to(r.notes);
  j.at("t").get_to(r.t);
  j.at("abs_derivative").get_to(r.abs_derivative);
  const auto& rate = j.at("exponential_rate");
  r.exponential_rate = rate.is_null() ? std::nullopt : std::optional<double>(rate.get<double>());
}

struct BoundRow {
  std::string method;
  /// "pass", "fail" or "not-applicable".
  std::string status;
  std::string message;
  std::string grid;
  double worst_product = 0.0;
  double worst_re = 0.0;
  double worst_im = 0.0;
  double sector_delta = 0.0;
  double sector_worst = 0.0;
  double sector_re = 0.0;
  double sector_im = 0.0;
  bool pass = false;
  friend bool operator==(const BoundRow&, const BoundRow&) = default;
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(BoundRow, method, status, message, grid, worst_product, worst_re, worst_im,
                                   sector_delta, sector_worst, sector_re, sector_im, pass)

struct RegionPayload {
  std::string method;
  std::vector<double> re;
  std::vector<double> im;
  std::vector<double> abs_r;
  friend bool operator==(const RegionPayload&, const RegionPayload&) = default;
};

inline void to_json(json& j, const RegionPayload& r) {
  json values = json::array();
  for (double v : r.abs_r) values.push_back(number_or_null(v));
  j = json{{"method", r.method}, {"re", r.re}, {"im", r.im}, {"abs_r", values}};
}

inline void from_json(const json& j, RegionPayload& r) {
  j.at("method").get_to(r.method);
  j.at("re").get_to(r.re);
  j.at("im").get_to(r.im);
  r.abs_r.clear();
  for (const auto& v : j.at("abs_r")) r.abs_r.push_back(number_from(v));
}

struct SensRow {
  std::string method;
  std::string oracle;  // "principal-root" or "two-step"
  double lambda = 0.0;
  double h = 0.0;
  int steps = 0;
  double y0 = 0.0;
  double z = 0.0;
  double numeric_re = 0.0, numeric_im = 0.0;
  double closed_form_re = 0.0, closed_form_im = 0.0;
  double exact_re = 0.0, exact_im = 0.0;
  double relative_gap = 0.0;
  friend bool operator==(const SensRow&, const SensRow&) = default;
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(SensRow, method, oracle, lambda, h, steps, y0, z, numeric_re, numeric_im,
                                   closed_form_re, closed_form_im, exact_re, exact_im, relative_gap)

struct DemoTracePoint {
  int iteration = 0;
  double theta_slow = 0.0;
  double theta_stiff = 0.0;
  double slow_gradient = 0.0;
  double stiff_gradient = 0.0;
  double loss = 0.0;
  friend bool operator==(const DemoTracePoint&, const DemoTracePoint&) = default;
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(DemoTracePoint, iteration, theta_slow, theta_stiff, slow_gradient, stiff_gradient,
                                   loss)

struct DemoReport {
  std::string method;
  std::string loss;  // "final" or "trajectory"
  double h = 0.0;
  int steps = 0;
  double theta_slow = 0.0;
  double theta_slow_true = 0.0;
  double theta_stiff_true = 0.0;
  std::vector<double> sweep;
  std::vector<double> slow_gradients;  // |dL/dtheta_slow|
  std::vector<double> stiff_gradients;  // |dL/dtheta_stiff|
  double stiff_slope = 0.0;
  double slow_gradient_ratio = 0.0;  // max/min of slow_gradients over the sweep
  double threshold = 0.0;
  double learning_rate = 0.0;
  double trace_stiff_start = 0.0;
  std::vector<DemoTracePoint> trace;
  double stiff_cumulative_update = 0.0;
  double slow_cumulative_update = 0.0;
  bool stalled = false;
  friend bool operator==(const DemoReport&, const DemoReport&) = default;
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(DemoReport, method, loss, h, steps, theta_slow, theta_slow_true, theta_stiff_true,
                                   sweep, slow_gradients, stiff_gradients, stiff_slope, slow_gradient_ratio, threshold,
                                   learning_rate, trace_stiff_start, trace, stiff_cumulative_update,
                                   slow_cumulative_update, stalled)

struct VerifyRow {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string measured;
  std::string threshold;
  std::string detail;
  double runtime_ms = 0.0;
  double runtime_limit_ms = 0.0;
  friend bool operator==(const VerifyRow&, const VerifyRow&) = default;
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(VerifyRow, id, name, pass, measured, threshold, detail, runtime_ms,
                                   runtime_limit_ms)

// ---------------------------------------------------------------------------
// Envelope

struct ReportEnvelope {
  std::string version{kToolVersion};
  std::string command_line;
  std::string timestamp;
  /// catalog | decay-table | bound-report | region-raster | sensitivity-sweep | demo-report | verify-suite
  std::string kind;
  json payload;
  friend bool operator==(const ReportEnvelope&, const ReportEnvelope&) = default;
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(ReportEnvelope, version, command_line, timestamp, kind, payload)

/// First line of every CSV output; the only line that varies between identical runs.
[[nodiscard]] inline std::string csv_envelope_line(const ReportEnvelope& env) {
  return "# stiffgrad-lab " + env.version + " kind=" + env.kind + " timestamp=" + env.timestamp +
         " command=" + env.command_line + "\n";
}

}  // namespace stiffgrad::lab
