#include <cmath>
#include <limits>
#include <vector>

#include <gtest/gtest.h>

#include "femtoemit/constants.hpp"
#include "femtoemit/dataset.hpp"
#include "femtoemit/emission.hpp"
#include "femtoemit/errors.hpp"
#include "femtoemit/synthesize.hpp"

using namespace femtoemit;

// Golden values below come from tests/oracles/fn_golden.py (mpmath, 30 digits).

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace

TEST(Constants, FowlerNordheimPrefactorFromCodata) {
  EXPECT_NEAR(kCodata2018.fn_prefactor(), 1.5414e-6, 0.00005e-6);
  EXPECT_NEAR(kCodata2018.fn_exponent(), 6.8309e9, 0.00005e9);
}

TEST(Constants, SchottkyCoefficient) {
  EXPECT_LT(rel(kCodata2018.schottky_coefficient(), 3.7946865e-5), 1e-7);
}

TEST(SchottkyRatio, Golden) {
  EXPECT_EQ(schottky_ratio(0.0, 4.5), 0.0);
  EXPECT_LT(rel(schottky_ratio(2e9, 4.5), 0.37711897429667277), 1e-12);
  EXPECT_LT(rel(schottky_ratio(2e9, 3.0), 0.56567846144500916), 1e-12);
}

TEST(SchottkyRatio, RejectsBadInputs) {
  EXPECT_THROW(schottky_ratio(1e9, 0.0), DomainError);
  EXPECT_THROW(schottky_ratio(1e9, -1.0), DomainError);
  EXPECT_THROW(schottky_ratio(-1.0, 4.5), DomainError);
}

TEST(NordheimV, Endpoints) {
  EXPECT_EQ(nordheim_v(0.0), 1.0);
  EXPECT_EQ(nordheim_v(1.0), 0.0);
}

TEST(NordheimV, Golden) {
  const double v = nordheim_v(0.566);
  EXPECT_LT(rel(v, 0.61886593145441912), 1e-12);
  EXPECT_GT(v, 0.4);
  EXPECT_LT(v, 0.8);
}

TEST(NordheimV, OutOfDomainThrows) {
  EXPECT_THROW(nordheim_v(-1e-9), DomainError);
  EXPECT_THROW(nordheim_v(1.0 + 1e-9), DomainError);
  EXPECT_THROW(nordheim_v(std::nan("")), DomainError);
}

TEST(NordheimV, MonotoneDecreasing) {
  double prev = nordheim_v(0.0);
  for (int i = 1; i <= 1000; ++i) {
    const double v = nordheim_v(i / 1000.0);
    EXPECT_LT(v, prev) << "w=" << i / 1000.0;
    prev = v;
  }
}

// Exact Nordheim function from complete elliptic integrals (mpmath). The
// closed-form approximation is accurate to better than 0.0025 absolute.
TEST(NordheimV, AgreesWithEllipticTable) {
  const std::vector<std::pair<double, double>> table = {
      {0.1, 0.98168194029487394}, {0.2, 0.93703732023281624}, {0.3, 0.87176257151735804},
      {0.4, 0.78876040562875580}, {0.5, 0.68996836937535071}, {0.6, 0.57681461965941174},
      {0.7, 0.45041257308421102}, {0.8, 0.31166294770538561}, {0.9, 0.16131399967489401},
  };
  for (const auto& [w, exact] : table) EXPECT_NEAR(nordheim_v(w), exact, 0.0025) << "w=" << w;
}

TEST(NordheimV, DerivativesMatchFiniteDifferences) {
  const NordheimFunctions f;
  for (double w : {0.05, 0.2, 0.377, 0.566, 0.8, 0.95}) {
    const double h = 1e-6;
    const double dv_fd = (f.v(w + h) - f.v(w - h)) / (2 * h);
    const double d2v_fd = (f.dv(w + h) - f.dv(w - h)) / (2 * h);
    EXPECT_LT(rel(f.dv(w), dv_fd), 1e-7) << w;
    EXPECT_LT(rel(f.d2v(w), d2v_fd), 1e-7) << w;
  }
}

TEST(NordheimT, ClosedForm) {
  for (double w : {0.1, 0.377, 0.566, 0.9}) {
    const double expect = 1.0 + w * w / 9.0 - (w * w / 9.0) * std::log(w);
    EXPECT_LT(rel(nordheim_t(w), expect), 1e-14);
  }
}

TEST(NordheimParams, PrefactorModes) {
  const auto unity = nordheim_params(2e9, 4.5);
  EXPECT_EQ(unity.t2_of_w, 1.0);
  EmissionModel corrected;
  corrected.prefactor = PrefactorMode::kCorrected;
  // DC operating window at 4.5 eV: w stays below ~0.38 and t^2 near 1.
  for (double u = 1300.0; u <= 1500.0; u += 50.0) {
    const auto p = nordheim_params(tip_field_from_voltage(u, TipSpec{}), 4.5, corrected);
    EXPECT_GE(p.t2_of_w, 0.9);
    EXPECT_LE(p.t2_of_w, 1.1);
  }
}

TEST(FnCurrentDensity, Golden) {
  EXPECT_LT(rel(fn_current_density(2e9, 4.5), 4.4213197490641355), 1e-10);
  EXPECT_LT(rel(fn_current_density(2e9, 3.0), 3.4680527776036842e7), 1e-10);
  EXPECT_GT(fn_current_density(2e9, 3.0), fn_current_density(2e9, 4.5));
}

TEST(FnCurrentDensity, ZeroFieldLimit) {
  EXPECT_EQ(fn_current_density(0.0, 4.5), 0.0);
  EXPECT_EQ(fn_current_density(-1e9, 4.5), 0.0);
  EXPECT_LT(fn_current_density(1e7, 4.5), 1e-300);
  EXPECT_THROW(fn_current_density(1e9, 0.0), DomainError);
}

TEST(FnCurrentDensity, MonotoneOnGrid) {
  for (int i = 0; i <= 40; ++i) {
    const double phi = 2.0 + 4.0 * i / 40.0;
    double prev = 0.0;
    for (int k = 0; k <= 95; ++k) {
      const double f = 0.5e9 + 0.1e9 * k;
      const double j = fn_current_density(f, phi);
      EXPECT_GT(j, prev) << "phi=" << phi << " f=" << f;
      prev = j;
    }
  }
  for (int k = 0; k <= 95; ++k) {
    const double f = 0.5e9 + 0.1e9 * k;
    double prev = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= 40; ++i) {
      const double phi = 2.0 + 4.0 * i / 40.0;
      const double j = fn_current_density(f, phi);
      EXPECT_LT(j, prev) << "phi=" << phi << " f=" << f;
      prev = j;
    }
  }
}

TEST(FnCurrentDensity, LogSlopeMatchesFiniteDifference) {
  EmissionModel corrected;
  corrected.prefactor = PrefactorMode::kCorrected;
  for (const auto& em : {EmissionModel{}, corrected}) {
    for (double phi : {3.0, 4.5}) {
      for (double f : {1e9, 2e9, 4e9}) {
        const double h = 1e-5 * f;
        const double fd =
            (std::log(fn_current_density(f + h, phi, em)) - std::log(fn_current_density(f - h, phi, em))) /
            (2 * h);
        EXPECT_LT(rel(fn_log_density_slope(f, phi, em), fd), 1e-6) << f << " " << phi;
      }
    }
  }
}

TEST(TipField, Golden) {
  TipSpec tip;
  EXPECT_LT(rel(tip_field_from_voltage(1500.0, tip), 1.9638648860958366e9), 1e-14);
  EXPECT_EQ(tip_field_from_voltage(0.0, tip), 0.0);
  EXPECT_EQ(tip_field_from_voltage(-1500.0, tip), tip_field_from_voltage(1500.0, tip));
  TipSpec half = tip;
  half.radius_m = tip.radius_m / 2;
  EXPECT_LT(rel(tip_field_from_voltage(1500.0, half), 2 * tip_field_from_voltage(1500.0, tip)), 1e-15);
}

TEST(TipSpec, Validation) {
  TipSpec t;
  EXPECT_NO_THROW(t.validate());
  t.radius_m = 0.0;
  EXPECT_THROW(t.validate(), DomainError);
  t = TipSpec{};
  t.emit_radius_m = -1.0;
  EXPECT_THROW(t.validate(), DomainError);
  t = TipSpec{};
  t.work_function_ev = 0.0;
  EXPECT_THROW(t.validate(), DomainError);
}

TEST(EmittedCurrent, Cases) {
  TipSpec tip;
  EXPECT_EQ(emitted_current(0.0, tip), 0.0);
  TipSpec unit;
  unit.emit_radius_m = 1.0;
  EXPECT_LT(rel(emitted_current(1.0, unit), 2 * std::numbers::pi), 1e-15);
  const double i = emitted_current(4.4213197490641355, tip);
  EXPECT_LT(rel(i, 4.9881716440535966e-13), 1e-12);
  EXPECT_LT(i, 1e-12);
}

TEST(PhotofieldPhiEff, Golden) {
  EXPECT_LT(rel(kCodata2018.photon_energy_ev(810e-9), 1.5306691164592625), 1e-12);
  EXPECT_LT(rel(photofield_phi_eff(4.5, 810e-9), 2.9693308835407375), 1e-12);
  EXPECT_EQ(photofield_phi_eff(4.5, std::numeric_limits<double>::infinity()), 4.5);
  EXPECT_NEAR(photofield_phi_eff(4.5, 1.0), 4.5, 1e-5);
  EXPECT_THROW(photofield_phi_eff(4.5, 200e-9), DomainError);
}

TEST(PhotofieldCurrent, DegeneratesToDc) {
  TipSpec tip;
  for (double u : {600.0, 1000.0, 1500.0}) {
    EXPECT_EQ(photofield_current(u, tip, 0.0, std::numeric_limits<double>::infinity()),
              dc_current(u, tip));
  }
}

TEST(PhotofieldCurrent, AboveDcAndMonotoneInLaserField) {
  TipSpec tip;
  for (double u = 600.0; u <= 1500.0; u += 25.0) {
    const double dc = dc_current(u, tip);
    const double lo = photofield_current(u, tip, 0.75 * 1.1e9, 810e-9);
    const double mid = photofield_current(u, tip, 1.1e9, 810e-9);
    const double hi = photofield_current(u, tip, 1.25 * 1.1e9, 810e-9);
    EXPECT_GT(mid, dc) << u;
    EXPECT_LT(lo, mid) << u;
    EXPECT_LT(mid, hi) << u;
  }
}

// Over the photofield window the total apex field (bias plus 1.1 GV/m laser
// field) at 3 eV keeps v(w) inside (0.4, 0.8).
TEST(NordheimV, PhotofieldWindowBand) {
  TipSpec tip;
  for (double u = 600.0; u <= 1500.0; u += 10.0) {
    const double f = tip_field_from_voltage(u, tip) + 1.1e9;
    const double v = nordheim_params(f, 3.0).v_of_w;
    EXPECT_GT(v, 0.4) << u;
    EXPECT_LT(v, 0.8) << u;
  }
}

TEST(FnPlot, OneDecadeIsLinear) {
  TipSpec tip;
  const double u_max = 1500.0;
  const double u_min = decade_start(tip, u_max);
  EXPECT_NEAR(dc_current(u_max, tip) / dc_current(u_min, tip), 10.0, 1e-6);
  SweepDataset d;
  for (double u : linspace(u_min, u_max, 15)) {
    d.x.push_back(u);
    d.y.push_back(dc_current(u, tip));
  }
  const auto line = fit_line(fn_linearize(d));
  EXPECT_GT(line.r_squared, 0.999);
  EXPECT_LT(line.slope, 0.0);
}
