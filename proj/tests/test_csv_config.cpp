#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "femtoemit/config.hpp"
#include "femtoemit/csv.hpp"
#include "femtoemit/errors.hpp"
#include "femtoemit/synthesize.hpp"

using namespace femtoemit;

TEST(Format, TwelveSignificantDigits) {
  EXPECT_EQ(format_result(1.0), "1.00000000000e+00");
  EXPECT_EQ(format_result(-4.4213197490641355), "-4.42131974906e+00");
  EXPECT_EQ(format_result(std::nan("")), "nan");
  EXPECT_EQ(format_result(std::numeric_limits<double>::infinity()), "inf");
}

TEST(Format, ExactRoundTrip) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-300.0, 300.0);
  for (int i = 0; i < 10000; ++i) {
    const double v = std::pow(10.0, u(rng) / 10.0) * (i % 2 ? 1 : -1);
    EXPECT_EQ(*parse_number(format_exact(v)), v);
  }
}

TEST(ParseNumber, Strict) {
  EXPECT_EQ(*parse_number(" 1.5e3 "), 1500.0);
  EXPECT_EQ(*parse_number("+2"), 2.0);
  EXPECT_FALSE(parse_number("1.5x"));
  EXPECT_FALSE(parse_number(""));
  EXPECT_FALSE(parse_number("abc"));
}

TEST(Csv, CommentsBlankLinesAndRaggedRows) {
  std::istringstream in("# comment\n\na,b\n1,2\n# another\n3,4\n");
  const auto t = read_csv(in);
  EXPECT_EQ(t.header, (std::vector<std::string>{"a", "b"}));
  ASSERT_EQ(t.rows.size(), 2u);
  EXPECT_EQ(t.line_numbers[1], 6u);

  std::istringstream ragged("a,b\n1,2\n3\n");
  try {
    read_csv(ragged);
    FAIL();
  } catch (const DataError& e) {
    EXPECT_EQ(e.index(), 3u);
  }
  std::istringstream empty("# only a comment\n");
  EXPECT_THROW(read_csv(empty), DataError);
}

TEST(ResultRow, RoundTripAtTwelveDigits) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-30.0, 30.0);
  std::vector<ResultRow> rows;
  for (int i = 0; i < 200; ++i) {
    ResultRow r;
    // Values already at 12 significant digits survive the text format exactly.
    const double v = *parse_number(format_result(std::pow(10.0, u(rng))));
    r.add("name", "row" + std::to_string(i)).add("value_A", v).add("count", static_cast<double>(i));
    rows.push_back(r);
  }
  std::istringstream in(result_rows_to_string(rows));
  EXPECT_EQ(read_result_rows(in), rows);
}

TEST(ResultRow, NonFiniteAndAccessors) {
  ResultRow r;
  r.add("x", std::nan("")).add("y", std::numeric_limits<double>::infinity()).add("s", "text");
  std::istringstream in(result_rows_to_string({r}));
  const auto back = read_result_rows(in);
  ASSERT_EQ(back.size(), 1u);
  EXPECT_TRUE(std::isnan(back[0].number("x")));
  EXPECT_TRUE(std::isinf(back[0].number("y")));
  EXPECT_EQ(std::get<std::string>(back[0].at("s")), "text");
  EXPECT_THROW(back[0].at("missing"), DataError);
}

TEST(ResultRow, RejectsSeparatorsAndMismatchedKeys) {
  ResultRow bad;
  bad.add("s", "a,b");
  EXPECT_THROW(result_rows_to_string({bad}), DataError);
  ResultRow a, b;
  a.add("x", 1.0);
  b.add("y", 1.0);
  EXPECT_THROW(result_rows_to_string({a, b}), DataError);
}

TEST(Sweep, TwoRowFile) {
  std::istringstream in("voltage_V,current_A\n1400,1e-13\n1500,1e-12\n");
  const auto d = read_sweep(in, SweepKind::kIv);
  EXPECT_EQ(d.size(), 2u);
  EXPECT_EQ(d.y[1], 1e-12);
  EXPECT_FALSE(d.has_sigma());
}

TEST(Sweep, NegativeCurrentNamesRow) {
  std::istringstream in("voltage_V,current_A\n1400,1e-13\n1450,-1e-13\n1500,1e-12\n");
  try {
    read_sweep(in, SweepKind::kIv);
    FAIL();
  } catch (const DataError& e) {
    EXPECT_EQ(e.index(), 3u);
    EXPECT_NE(std::string(e.what()).find("row 3"), std::string::npos);
  }
}

TEST(Sweep, ErrorsNameTheProblem) {
  std::istringstream missing("volts,current_A\n1,2\n");
  EXPECT_THROW(read_sweep(missing, SweepKind::kIv), DataError);
  std::istringstream text("voltage_V,current_A\n1400,abc\n");
  try {
    read_sweep(text, SweepKind::kIv);
    FAIL();
  } catch (const DataError& e) {
    EXPECT_EQ(e.index(), 2u);
  }
  std::istringstream nonmono("voltage_V,current_A\n1400,1\n1400,2\n");
  EXPECT_THROW(read_sweep(nonmono, SweepKind::kIv), DataError);
  std::istringstream badsigma("voltage_V,current_A,sigma_A\n1400,1,0\n");
  EXPECT_THROW(read_sweep(badsigma, SweepKind::kIv), DataError);
}

TEST(Sweep, DegreesConverted) {
  std::istringstream in("theta_deg,current_A\n0,1\n90,2\n180,3\n");
  const auto d = read_sweep(in, SweepKind::kPolarization);
  EXPECT_DOUBLE_EQ(d.x[1], std::numbers::pi / 2);
  EXPECT_DOUBLE_EQ(d.x[2], std::numbers::pi);
}

TEST(Sweep, WriteThenReadIsIdentical) {
  RunConfig cfg;
  for (const char* id : {"dc-fn", "photofield", "cos2", "ofe"}) {
    const auto d = synthesize_dataset(cfg, id, {}, 0.02, 17);
    std::istringstream in(sweep_to_string(d));
    const auto back = read_sweep(in, d.kind);
    EXPECT_EQ(back.x, d.x) << id;
    EXPECT_EQ(back.y, d.y) << id;
    EXPECT_EQ(back.sigma_y, d.sigma_y) << id;
  }
}

TEST(Config, DefaultsAndOverrides) {
  std::istringstream in(
      "# comment\n"
      "tip.radius_m = 30e-9   # trailing comment\n"
      "\n"
      "laser.intensity_convention = on-axis\n"
      "emission.prefactor = corrected\n"
      "tip.emit_radius_m = 50e-9\n"
      "seed = 42\n");
  const auto cfg = parse_config(in);
  EXPECT_EQ(cfg.tip.radius_m, 30e-9);
  EXPECT_EQ(cfg.tip.field_factor_k, 5.7);
  EXPECT_EQ(cfg.laser.spatial_convention, SpatialConvention::kOnAxisPeak);
  EXPECT_EQ(cfg.prefactor, PrefactorMode::kCorrected);
  EXPECT_EQ(*cfg.tip.emit_radius_m, 50e-9);
  EXPECT_EQ(cfg.seed, 42u);
}

TEST(Config, UnknownKeyNamesLineAndKey) {
  std::istringstream in("seed = 1\n\ntip.radius = 1e-7\n");
  try {
    parse_config(in);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.index(), 3u);
    EXPECT_NE(std::string(e.what()).find("tip.radius"), std::string::npos);
  }
}

TEST(Config, BadValueNamesLineAndKey) {
  std::istringstream in("tip.radius_m = 1e-7\nseed = -3\n");
  try {
    parse_config(in);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.index(), 2u);
    EXPECT_NE(std::string(e.what()).find("seed"), std::string::npos);
  }
  std::istringstream noeq("tip.radius_m 1e-7\n");
  EXPECT_THROW(parse_config(noeq), ConfigError);
  std::istringstream word("laser.temporal_shape = square\n");
  EXPECT_THROW(parse_config(word), ConfigError);
}

TEST(Config, DumpParsesBackToSameConfig) {
  RunConfig cfg;
  cfg.tip.radius_m = 1.234567890123e-7;
  cfg.laser.temporal_shape = TemporalShape::kFlatTop;
  cfg.pulse.spectral_window = SpectralWindow::kHann;
  cfg.output_dir = "results";
  const auto text = dump_config(cfg);
  std::istringstream in(text);
  const auto back = parse_config(in);
  EXPECT_EQ(dump_config(back), text);
  EXPECT_EQ(back.tip.radius_m, cfg.tip.radius_m);
  EXPECT_FALSE(back.tip.emit_radius_m.has_value());
}

TEST(Config, EveryKeyDocumented) {
  for (const auto& k : detail::config_keys()) EXPECT_FALSE(k.help.empty()) << k.name;
}
