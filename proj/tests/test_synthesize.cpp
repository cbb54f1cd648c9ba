#include <cmath>

#include <gtest/gtest.h>

#include "femtoemit/config.hpp"
#include "femtoemit/errors.hpp"
#include "femtoemit/synthesize.hpp"

using namespace femtoemit;

TEST(Synthesize, NoiselessIsForwardModel) {
  RunConfig cfg;
  for (const char* id : {"dc-fn", "photofield", "cos2", "ofe"}) {
    const auto fm = forward_model(cfg, id, {});
    const auto d = synthesize_dataset(cfg, id, {}, 0.0, 1);
    ASSERT_EQ(d.size(), fm.x.size());
    EXPECT_FALSE(d.has_sigma());
    for (std::size_t i = 0; i < d.size(); ++i) EXPECT_EQ(d.y[i], fm.value(d.x[i])) << id;
  }
}

TEST(Synthesize, SameSeedSameData) {
  RunConfig cfg;
  const auto a = synthesize_dataset(cfg, "photofield", {}, 0.02, 99);
  const auto b = synthesize_dataset(cfg, "photofield", {}, 0.02, 99);
  const auto c = synthesize_dataset(cfg, "photofield", {}, 0.02, 100);
  EXPECT_EQ(a.y, b.y);
  EXPECT_NE(a.y, c.y);
}

TEST(Synthesize, RelativeScatterMatchesNoise) {
  RunConfig cfg;
  cfg.sweep.pol_points = 1000;
  const auto fm = forward_model(cfg, "cos2", {});
  const auto d = synthesize_dataset(cfg, "cos2", {}, 0.02, 5);
  double s2 = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    const double e = d.y[i] / fm.value(d.x[i]) - 1.0;
    s2 += e * e;
  }
  const double sd = std::sqrt(s2 / d.size());
  EXPECT_NEAR(sd, 0.02, 0.002);
  EXPECT_EQ(d.sigma_y[3], 0.02 * fm.value(d.x[3]));
}

TEST(Synthesize, TruthOverrides) {
  RunConfig cfg;
  const auto d = synthesize_dataset(cfg, "cos2", {{"A", 2.0}, {"B", 0.5}, {"theta0", 0.0}}, 0.0, 1);
  EXPECT_DOUBLE_EQ(d.y.front(), 2.5);
  const auto dc = synthesize_dataset(cfg, "dc-fn", {{"r", 30e-9}}, 0.0, 1);
  TipSpec tip;
  tip.radius_m = 30e-9;
  EXPECT_EQ(dc.y.back(), dc_current(cfg.sweep.dc_u_max_v, tip));
}

TEST(Synthesize, OfeTruthPeakCurrent) {
  RunConfig cfg;
  const auto fm = forward_model(cfg, "ofe", {});
  EXPECT_NEAR(fm.value(0.0), 40e-9, 1e-20);
}

TEST(Synthesize, Errors) {
  RunConfig cfg;
  EXPECT_THROW(synthesize_dataset(cfg, "nope", {}, 0.0, 1), UsageError);
  EXPECT_THROW(synthesize_dataset(cfg, "cos2", {}, -0.1, 1), DomainError);
}

TEST(Synthesize, DefaultDcSweepSpansAboutOneDecade) {
  RunConfig cfg;
  const auto d = synthesize_dataset(cfg, "dc-fn", {}, 0.0, 1);
  const double ratio = d.y.back() / d.y.front();
  EXPECT_GT(ratio, 8.0);
  EXPECT_LT(ratio, 15.0);
}

TEST(Linspace, Endpoints) {
  const auto v = linspace(1.0, 2.0, 5);
  EXPECT_EQ(v.front(), 1.0);
  EXPECT_EQ(v.back(), 2.0);
  EXPECT_EQ(linspace(3.0, 4.0, 1), std::vector<double>{3.0});
}
