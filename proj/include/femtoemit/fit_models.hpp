#pragma once

// The four fit models: DC Fowler-Nordheim (tip radius), photofield (laser
// field at the apex), cos^2 on a background (low-power polarization scan)
// and optical field emission in the peak-field approximation (high-power
// polarization scan).

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "femtoemit/dataset.hpp"
#include "femtoemit/emission.hpp"
#include "femtoemit/errors.hpp"
#include "femtoemit/least_squares.hpp"
#include "femtoemit/optical_emission.hpp"

namespace femtoemit {

namespace model_id {
inline constexpr const char* kDcFn = "dc-fn";
inline constexpr const char* kPhotofield = "photofield";
inline constexpr const char* kCos2 = "cos2";
inline constexpr const char* kOfe = "ofe";
}  // namespace model_id

// ---------------------------------------------------------------------------
// Model builders. Parameters are in SI units except where named otherwise.
// ---------------------------------------------------------------------------

/// I(U) = 2 pi R^2 j(|U|/(k r), phi). Parameters {r, R}, or {r} with R = r
/// when `fit_emit_radius` is false.
inline ParametricModel dc_fn_model(double phi_ev, double k, bool fit_emit_radius = true,
                                   const EmissionModel& em = {}) {
  ParametricModel m;
  m.id = model_id::kDcFn;
  m.param_names = fit_emit_radius ? std::vector<std::string>{"r", "R"} : std::vector<std::string>{"r"};
  const auto tip_of = [=](std::span<const double> p) {
    TipSpec tip;
    tip.radius_m = p[0];
    tip.field_factor_k = k;
    tip.work_function_ev = phi_ev;
    if (fit_emit_radius) tip.emit_radius_m = p[1];
    return tip;
  };
  m.value = [=](double u, std::span<const double> p) {
    if (!(p[0] > 0.0)) return 0.0;
    return dc_current(u, tip_of(p), em);
  };
  m.gradient = [=](double u, std::span<const double> p, std::span<double> grad) {
    const auto tip = tip_of(p);
    const double f = tip_field_from_voltage(u, tip);
    const double i = dc_current(u, tip, em);
    const double dlnj_df = fn_log_density_slope(f, phi_ev, em);
    // dF/dr = -F/r
    grad[0] = i * (-f / p[0]) * dlnj_df;
    if (fit_emit_radius) {
      grad[1] = 2.0 * i / p[1];
    } else {
      grad[0] += 2.0 * i / p[0];
    }
  };
  return m;
}

/// I(U) = 2 pi R^2 j(|U|/(k r) + f_laser, phi_eff). Parameter {f_laser}.
inline ParametricModel photofield_model(const TipSpec& tip, double phi_eff_ev,
                                        const EmissionModel& em = {}) {
  ParametricModel m;
  m.id = model_id::kPhotofield;
  m.param_names = {"f_laser"};
  m.value = [=](double u, std::span<const double> p) {
    return emitted_current(fn_current_density(tip_field_from_voltage(u, tip) + p[0], phi_eff_ev, em),
                           tip);
  };
  m.gradient = [=](double u, std::span<const double> p, std::span<double> grad) {
    const double f = tip_field_from_voltage(u, tip) + p[0];
    const double i = emitted_current(fn_current_density(f, phi_eff_ev, em), tip);
    grad[0] = i * fn_log_density_slope(f, phi_eff_ev, em);
  };
  return m;
}

/// y(theta) = A cos^2(theta - theta0) + B. Parameters {A, B, theta0}.
inline ParametricModel cos2_model() {
  ParametricModel m;
  m.id = model_id::kCos2;
  m.param_names = {"A", "B", "theta0"};
  m.value = [](double th, std::span<const double> p) {
    const double c = std::cos(th - p[2]);
    return p[0] * c * c + p[1];
  };
  m.gradient = [](double th, std::span<const double> p, std::span<double> grad) {
    const double c = std::cos(th - p[2]);
    grad[0] = c * c;
    grad[1] = 1.0;
    grad[2] = p[0] * std::sin(2.0 * (th - p[2]));
  };
  return m;
}

/// Peak-field optical emission g F^2 exp(-h/F), F = f_dc + f_laser |cos theta|,
/// parameterised internally as {ln_g, h, f_laser}.
inline ParametricModel ofe_model(double f_dc) {
  ParametricModel m;
  m.id = model_id::kOfe;
  m.param_names = {"ln_g", "h", "f_laser"};
  m.value = [=](double th, std::span<const double> p) {
    const double f = f_dc + p[2] * std::abs(std::cos(th));
    if (!(f > 0.0)) return 0.0;
    return std::exp(p[0] + 2.0 * std::log(f) - p[1] / f);
  };
  m.gradient = [=](double th, std::span<const double> p, std::span<double> grad) {
    const double c = std::abs(std::cos(th));
    const double f = f_dc + p[2] * c;
    if (!(f > 0.0)) {
      grad[0] = grad[1] = grad[2] = 0.0;
      return;
    }
    const double y = std::exp(p[0] + 2.0 * std::log(f) - p[1] / f);
    grad[0] = y;
    grad[1] = -y / f;
    grad[2] = y * (2.0 / f + p[1] / (f * f)) * c;
  };
  return m;
}

// ---------------------------------------------------------------------------
// Fits
// ---------------------------------------------------------------------------

struct DcFitOptions {
  bool fit_emit_radius = true;
  EmissionModel emission{};
  LeastSquaresOptions lsq{};
};

namespace detail {

inline std::vector<double> evaluate_curve(const ParametricModel& m, const std::vector<double>& x,
                                          const std::vector<double>& p) {
  std::vector<double> out;
  out.reserve(x.size());
  for (double xi : x) out.push_back(m.value(xi, p));
  return out;
}

inline void require_kind(const SweepDataset& data, SweepKind kind, const char* who) {
  if (data.kind != kind) {
    throw DataError(std::string(who) + ": expected a " + to_string(kind) + " dataset");
  }
}

// FN-plot slope correction s(w) = v - (w/2) v'.
inline double slope_correction(double w, const NordheimFunctions& f) {
  if (w >= 1.0) return 0.0;
  return f.v(w) - 0.5 * w * f.dv(w);
}

}  // namespace detail

/// Fit the tip radius r (and emission radius R) to a laser-off I-V sweep.
/// The initial r comes from the FN-plot slope, the initial R from the mean
/// log offset at that r.
inline FitResult fit_dc_fn(const SweepDataset& data, double phi_w_ev, double k,
                           const DcFitOptions& opt = {}) {
  detail::require_kind(data, SweepKind::kIv, "fit_dc_fn");
  data.validate();
  const auto line = fit_line(fn_linearize(data));
  if (!(line.slope < 0.0)) throw DataError("fit_dc_fn: FN plot slope is not negative");

  const auto& em = opt.emission;
  const double big_b = em.constants.fn_exponent() * std::pow(phi_w_ev, 1.5);
  double u_mid = 0.0;
  for (double u : data.x) u_mid += std::abs(u);
  u_mid /= static_cast<double>(data.size());
  double r0 = -line.slope / (big_b * k);
  for (int pass = 0; pass < 8; ++pass) {
    const double w = std::min(schottky_ratio(u_mid / (k * r0), phi_w_ev, em.constants), 0.99);
    r0 = -line.slope / (big_b * k * detail::slope_correction(w, em.nordheim));
  }

  auto model = dc_fn_model(phi_w_ev, k, opt.fit_emit_radius, em);
  std::vector<double> init{r0};
  if (opt.fit_emit_radius) {
    std::vector<double> unit{r0, 1.0};
    double mean_log = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
      mean_log += std::log(data.y[i]) - std::log(model.value(data.x[i], unit));
    }
    mean_log /= static_cast<double>(data.size());
    init.push_back(std::exp(0.5 * mean_log));
  }
  ParameterBounds bounds;
  bounds.lower.assign(init.size(), 0.0);
  bounds.upper.assign(init.size(), std::numeric_limits<double>::infinity());
  auto res = least_squares(model, data, init, bounds, opt.lsq);
  res.curves["fit"] = detail::evaluate_curve(model, data.x, res.params);
  return res;
}

/// Fit the constant laser field added to the DC apex field of a laser-on
/// sweep, with the tip geometry fixed. Also reports the curves at
/// f_laser * (1 -/+ 25%).
inline FitResult fit_photofield(const SweepDataset& data, const TipSpec& tip, double phi_eff_ev,
                                const EmissionModel& em = {}, const LeastSquaresOptions& lsq = {}) {
  detail::require_kind(data, SweepKind::kIv, "fit_photofield");
  data.validate();
  tip.validate();
  auto model = photofield_model(tip, phi_eff_ev, em);

  // Vertical offset between the measured FN plot and the laser-off model
  // curve, driven to zero by bisection in f_laser.
  const auto offset = [&](double f) {
    double s = 0.0;
    const std::vector<double> p{f};
    for (std::size_t i = 0; i < data.size(); ++i) {
      if (!(data.y[i] > 0.0)) continue;
      s += std::log(data.y[i]) - std::log(std::max(model.value(data.x[i], p),
                                                   std::numeric_limits<double>::min()));
    }
    return s;
  };
  double f0 = 0.0;
  if (offset(0.0) > 0.0) {
    double lo = 0.0, hi = 1e9;
    while (offset(hi) > 0.0 && hi < 1e12) hi *= 2.0;
    for (int i = 0; i < 200 && hi - lo > 1e-9 * hi; ++i) {
      const double mid = 0.5 * (lo + hi);
      (offset(mid) > 0.0 ? lo : hi) = mid;
    }
    f0 = 0.5 * (lo + hi);
  }
  LeastSquaresOptions opt = lsq;
  if (opt.scales.empty()) opt.scales = {std::max(f0, 1e8)};
  ParameterBounds bounds{{0.0}, {std::numeric_limits<double>::infinity()}};
  auto res = least_squares(model, data, {f0}, bounds, opt);
  const double f = res.params[0];
  res.curves["fit"] = detail::evaluate_curve(model, data.x, {f});
  res.curves["minus_25pct"] = detail::evaluate_curve(model, data.x, {0.75 * f});
  res.curves["plus_25pct"] = detail::evaluate_curve(model, data.x, {1.25 * f});
  return res;
}

/// Wrap an angle into (-pi/2, pi/2].
inline double wrap_half_turn(double theta) {
  const double pi = std::numbers::pi;
  double t = std::remainder(theta, pi);  // [-pi/2, pi/2]
  if (t <= -0.5 * pi) t += pi;
  return t;
}

/// A cos^2(theta - theta0) + B with A, B >= 0 and theta0 in (-pi/2, pi/2].
inline FitResult fit_cos2_background(const SweepDataset& data, const LeastSquaresOptions& lsq = {}) {
  detail::require_kind(data, SweepKind::kPolarization, "fit_cos2_background");
  data.validate();
  if (data.size() < 3) throw DataError("fit_cos2_background: need at least 3 points");
  const auto [xmin, xmax] = std::minmax_element(data.x.begin(), data.x.end());
  if (*xmax - *xmin < std::numbers::pi * (1.0 - 1e-9)) {
    throw DataError("fit_cos2_background: angles must span at least pi");
  }
  const auto [ymin, ymax] = std::minmax_element(data.y.begin(), data.y.end());
  const auto imax = static_cast<std::size_t>(ymax - data.y.begin());
  std::vector<double> init{*ymax - *ymin, *ymin, wrap_half_turn(data.x[imax])};

  LeastSquaresOptions opt = lsq;
  opt.singular = SingularPolicy::kPseudoInverse;
  if (opt.scales.empty()) {
    const double yscale = std::max(*ymax, std::numeric_limits<double>::min());
    opt.scales = {yscale, yscale, 1.0};
  }
  const double inf = std::numeric_limits<double>::infinity();
  ParameterBounds bounds{{0.0, 0.0, -inf}, {inf, inf, inf}};
  auto model = cos2_model();
  auto res = least_squares(model, data, init, bounds, opt);
  res.params[2] = wrap_half_turn(res.params[2]);
  if (res.params[0] == 0.0) res.diagnostics.push_back("amplitude at zero: theta0 undetermined");
  res.curves["fit"] = detail::evaluate_curve(model, data.x, res.params);
  return res;
}

struct OfeFitOptions {
  /// Work function used only to seed h through the Nordheim exponent.
  double nominal_phi_ev = 4.5;
  double correlation_flag = 0.999;
  LeastSquaresOptions lsq{};
};

/// Fit g, h and f_laser of the peak-field optical emission model to a
/// polarization scan at known DC field. g is fitted in log space and
/// reported (with covariance) as g.
inline FitResult fit_ofe_polarization(const SweepDataset& data, double f_dc,
                                      const OfeFitOptions& opt = {}) {
  detail::require_kind(data, SweepKind::kPolarization, "fit_ofe_polarization");
  data.validate();
  if (!(f_dc > 0.0)) throw DomainError("fit_ofe_polarization: f_dc must be > 0");
  if (data.size() < 3) throw DataError("fit_ofe_polarization: need at least 3 points");

  // Seed: h from the Nordheim exponent at f_dc; g from the sample nearest
  // theta = pi/2; f_laser from the sample nearest theta = 0.
  std::size_t i_par = 0, i_perp = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double c = std::abs(std::cos(data.x[i]));
    if (c > std::abs(std::cos(data.x[i_par]))) i_par = i;
    if (c < std::abs(std::cos(data.x[i_perp]))) i_perp = i;
  }
  const PhysicalConstants k;
  const double w = std::min(schottky_ratio(f_dc, opt.nominal_phi_ev, k), 0.99);
  const double h0 = k.fn_exponent() * std::pow(opt.nominal_phi_ev, 1.5) * nordheim::forbes_v(w);
  const double tiny = std::numeric_limits<double>::min();
  const double c_par = std::abs(std::cos(data.x[i_par]));
  const double c_perp = std::abs(std::cos(data.x[i_perp]));
  double f_las = 0.0, ln_g = 0.0;
  for (int pass = 0; pass < 4; ++pass) {
    const double f_perp = f_dc + f_las * c_perp;
    ln_g = std::log(std::max(data.y[i_perp], tiny)) - 2.0 * std::log(f_perp) + h0 / f_perp;
    const double target = std::log(std::max(data.y[i_par], tiny));
    const auto ln_model = [&](double fl) {
      const double f = f_dc + fl * c_par;
      return ln_g + 2.0 * std::log(f) - h0 / f;
    };
    if (ln_model(0.0) >= target || c_par == 0.0) {
      f_las = 0.0;
      break;
    }
    double lo = 0.0, hi = f_dc;
    while (ln_model(hi) < target && hi < 1e3 * f_dc + 1e12) hi *= 2.0;
    for (int i = 0; i < 200 && hi - lo > 1e-12 * hi; ++i) {
      const double mid = 0.5 * (lo + hi);
      (ln_model(mid) < target ? lo : hi) = mid;
    }
    f_las = 0.5 * (lo + hi);
  }

  LeastSquaresOptions lsq = opt.lsq;
  if (lsq.scales.empty()) lsq.scales = {1.0, h0, std::max(f_las, 0.01 * f_dc)};
  const double inf = std::numeric_limits<double>::infinity();
  ParameterBounds bounds{{-inf, 0.0, 0.0}, {inf, inf, inf}};
  const auto model = ofe_model(f_dc);
  auto res = least_squares(model, data, {ln_g, h0, f_las}, bounds, lsq);

  res.curves["fit"] = detail::evaluate_curve(model, data.x, res.params);
  // Report g instead of ln g: first-order propagation of the covariance.
  const double g = std::exp(res.params[0]);
  res.params[0] = g;
  res.param_names[0] = "g";
  res.covariance.row(0) *= g;
  res.covariance.col(0) *= g;
  const double corr = res.correlation("g", "h");
  if (std::abs(corr) > opt.correlation_flag) {
    res.diagnostics.push_back("strong g-h correlation: " + std::to_string(corr));
  }
  return res;
}

/// Peak-field model evaluated with fitted OFE parameters.
inline double ofe_fitted_value(const FitResult& r, double f_dc, double theta) {
  return ofe_peak_field_model({f_dc, r.param("f_laser"), theta}, r.param("g"), r.param("h"));
}

}  // namespace femtoemit
