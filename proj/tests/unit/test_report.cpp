#include <gtest/gtest.h>

#include <cmath>

#include "stiffgrad/lab.hpp"

using namespace stiffgrad;
using namespace stiffgrad::lab;

namespace {

template <class T>
T round_trip(const T& value) {
  return json::parse(json(value).dump()).get<T>();
}

std::string drop_first_line(const std::string& s) { return s.substr(s.find('\n') + 1); }

}  // namespace

TEST(Format, NumbersUseSeventeenDigits) {
  EXPECT_EQ(format_number(0.1), "0.10000000000000001");
  EXPECT_EQ(format_number(-2.0), "-2");
  EXPECT_EQ(format_number(std::numeric_limits<double>::infinity()), "inf");
  EXPECT_EQ(format_bool(true), "true");
}

TEST(Format, CsvQuoting) {
  EXPECT_EQ(csv_field("plain"), "plain");
  EXPECT_EQ(csv_field("a,b"), "\"a,b\"");
  EXPECT_EQ(csv_field("say \"hi\""), "\"say \"\"hi\"\"\"");
}

TEST(Format, TimestampIsIsoUtc) {
  const auto ts = utc_timestamp();
  ASSERT_EQ(ts.size(), 20u);
  EXPECT_EQ(ts[4], '-');
  EXPECT_EQ(ts[10], 'T');
  EXPECT_EQ(ts.back(), 'Z');
}

TEST(RoundTrip, Catalog) {
  const auto rows = catalog_rows();
  EXPECT_EQ(round_trip(rows), rows);
}

TEST(RoundTrip, DecayRowsWithOptionalFields) {
  DecayOptions power;
  power.methods = "backward-euler";
  DecayOptions expo;
  expo.methods = "if-euler";
  expo.t_min = 1.0;
  expo.t_max = 1e3;
  auto rows = cmd_decay(power).envelope.payload.get<std::vector<DecayRow>>();
  const auto tail = cmd_decay(expo).envelope.payload.get<std::vector<DecayRow>>();
  rows.insert(rows.end(), tail.begin(), tail.end());
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_FALSE(rows[0].exponential_rate.has_value());
  EXPECT_TRUE(rows[1].exponential_rate.has_value());
  EXPECT_FALSE(rows[1].notes.empty());
  EXPECT_EQ(round_trip(rows), rows);
}

TEST(RoundTrip, BoundRows) {
  BoundOptions o;
  o.methods = "trapezoid,bdf2";
  o.grid.resolution = 20;
  const auto rows = cmd_bound(o).envelope.payload.get<std::vector<BoundRow>>();
  EXPECT_EQ(round_trip(rows), rows);
}

TEST(RoundTrip, RegionWithPoleMarkers) {
  RegionOptions o;
  o.resolution = 61;
  const auto payload = cmd_region(o).envelope.payload.get<RegionPayload>();
  EXPECT_TRUE(std::any_of(payload.abs_r.begin(), payload.abs_r.end(), [](double v) { return std::isinf(v); }));
  EXPECT_EQ(round_trip(payload), payload);
}

TEST(RoundTrip, SensitivityRows) {
  SensOptions o;
  o.methods = "all";
  o.lambdas = {-10.0, 0.0};
  const auto rows = cmd_sens(o).envelope.payload.get<std::vector<SensRow>>();
  EXPECT_EQ(rows.size(), 16u);
  EXPECT_EQ(round_trip(rows), rows);
}

TEST(RoundTrip, DemoReport) {
  DemoOptions o;
  o.iterations = 3;
  const auto report = run_vanishing_gradient_demo(o);
  EXPECT_EQ(round_trip(report), report);
}

TEST(RoundTrip, VerifyRowAndEnvelope) {
  VerifyRow row{3, "decay", true, "-1.99", "+-0.02", "detail, with comma", 1.5, 1000.0};
  EXPECT_EQ(round_trip(row), row);
  const auto env = cmd_catalog("stiffgrad_lab catalog").envelope;
  EXPECT_EQ(round_trip(env), env);
  EXPECT_EQ(env.kind, "catalog");
  EXPECT_EQ(env.version, "0.1.0");
}

TEST(Csv, DeterministicApartFromEnvelopeLine) {
  DecayOptions o;
  const auto a = render(cmd_decay(o, "x"), Format::Csv);
  const auto b = render(cmd_decay(o, "x"), Format::Csv);
  EXPECT_EQ(drop_first_line(a), drop_first_line(b));
  EXPECT_EQ(a.rfind("# stiffgrad-lab 0.1.0 kind=decay-table", 0), 0u);
}

TEST(Csv, EnvelopeLineCarriesCommand) {
  const auto out = cmd_catalog("stiffgrad_lab catalog --format csv");
  const auto line = csv_envelope_line(out.envelope);
  EXPECT_NE(line.find("command=stiffgrad_lab catalog --format csv"), std::string::npos);
  EXPECT_EQ(line.back(), '\n');
}

TEST(Json, RenderIsSingleEnvelopeObject) {
  const auto parsed = json::parse(render(cmd_catalog(), Format::Json));
  ASSERT_TRUE(parsed.is_object());
  for (const char* key : {"version", "command_line", "timestamp", "kind", "payload"}) EXPECT_TRUE(parsed.contains(key));
}
