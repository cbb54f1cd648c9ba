#pragma once

// Fowler-Nordheim tunneling from a biased metal tip, and the photofield
// variant in which one absorbed photon lowers the effective barrier.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>

#include "femtoemit/constants.hpp"
#include "femtoemit/errors.hpp"

namespace femtoemit {

/// Emitter geometry and material.
struct TipSpec {
  double radius_m = 134e-9;
  double field_factor_k = 5.7;
  /// Radius R of the emitting area in I = 2 pi R^2 j. Unset means R = r.
  std::optional<double> emit_radius_m;
  double work_function_ev = 4.5;

  double emit_radius() const { return emit_radius_m.value_or(radius_m); }

  void validate() const {
    if (!(radius_m > 0.0)) throw DomainError("tip radius must be > 0");
    if (!(field_factor_k > 0.0)) throw DomainError("field factor k must be > 0");
    if (!(emit_radius() > 0.0)) throw DomainError("emission radius must be > 0");
    if (!(work_function_ev > 0.0)) throw DomainError("work function must be > 0");
  }
};

// ---------------------------------------------------------------------------
// Image-charge (Nordheim) correction functions
// ---------------------------------------------------------------------------

namespace nordheim {

// v(w) = 1 - w^2 + (w^2/3) ln w, with its first two derivatives.
inline double forbes_v(double w) {
  if (w <= 0.0) return 1.0;
  return 1.0 - w * w + (w * w / 3.0) * std::log(w);
}

inline double forbes_dv(double w) {
  if (w <= 0.0) return 0.0;
  return -5.0 * w / 3.0 + (2.0 * w / 3.0) * std::log(w);
}

inline double forbes_d2v(double w) {
  if (w <= 0.0) return -std::numeric_limits<double>::infinity();
  return -1.0 + (2.0 / 3.0) * std::log(w);
}

}  // namespace nordheim

/// Pluggable v(w) with derivatives. The derivatives feed analytic fit
/// Jacobians and the t(w) correction.
struct NordheimFunctions {
  double (*v)(double) = &nordheim::forbes_v;
  double (*dv)(double) = &nordheim::forbes_dv;
  double (*d2v)(double) = &nordheim::forbes_d2v;
};

enum class PrefactorMode {
  kUnity,      // t^2(w) = 1
  kCorrected,  // t(w) = v(w) - (2w/3) v'(w)
};

/// Everything besides (F, phi) that the tunneling law depends on.
struct EmissionModel {
  PhysicalConstants constants = kCodata2018;
  NordheimFunctions nordheim{};
  PrefactorMode prefactor = PrefactorMode::kUnity;
};

struct NordheimParams {
  double w = 0.0;
  double v_of_w = 1.0;
  double t2_of_w = 1.0;
};

/// Schottky barrier lowering divided by the work function.
inline double schottky_ratio(double field_v_per_m, double phi_ev,
                             const PhysicalConstants& k = kCodata2018) {
  if (!(phi_ev > 0.0)) throw DomainError("schottky_ratio: work function must be > 0");
  if (!(field_v_per_m >= 0.0)) throw DomainError("schottky_ratio: field must be >= 0");
  return k.schottky_coefficient() * std::sqrt(field_v_per_m) / phi_ev;
}

inline double nordheim_v(double w, const NordheimFunctions& fns = {}) {
  if (!(w >= 0.0 && w <= 1.0)) throw DomainError("nordheim_v: w must lie in [0, 1]");
  if (w == 1.0) return 0.0;
  return fns.v(w);
}

inline double nordheim_t(double w, const NordheimFunctions& fns = {}) {
  return fns.v(w) - (2.0 * w / 3.0) * fns.dv(w);
}

namespace detail {

// t^2 and d(t^2)/dw for the configured prefactor mode.
inline void prefactor_t2(double w, const EmissionModel& model, double& t2, double& dt2_dw) {
  if (model.prefactor == PrefactorMode::kUnity) {
    t2 = 1.0;
    dt2_dw = 0.0;
    return;
  }
  const auto& f = model.nordheim;
  const double t = nordheim_t(w, f);
  const double dt = w > 0.0 ? f.dv(w) / 3.0 - (2.0 * w / 3.0) * f.d2v(w) : 0.0;
  t2 = t * t;
  dt2_dw = 2.0 * t * dt;
}

}  // namespace detail

/// Nordheim parameters at a given field. Above w = 1 the barrier top is
/// below the Fermi level; w is clamped there and the exponent vanishes.
inline NordheimParams nordheim_params(double field_v_per_m, double phi_ev,
                                      const EmissionModel& model = {}) {
  NordheimParams p;
  p.w = schottky_ratio(field_v_per_m, phi_ev, model.constants);
  const double wc = std::min(p.w, 1.0);
  p.v_of_w = wc >= 1.0 ? 0.0 : model.nordheim.v(wc);
  double dt2 = 0.0;
  detail::prefactor_t2(wc, model, p.t2_of_w, dt2);
  return p;
}

/// Fowler-Nordheim current density in A/m^2 for a local field F (V/m) and
/// work function phi (eV). Returns exactly 0 for F <= 0.
inline double fn_current_density(double field_v_per_m, double phi_ev,
                                 const EmissionModel& model = {}) {
  if (!(phi_ev > 0.0)) throw DomainError("fn_current_density: work function must be > 0");
  if (!(field_v_per_m > 0.0)) return 0.0;
  const auto p = nordheim_params(field_v_per_m, phi_ev, model);
  const double a = model.constants.fn_prefactor();
  const double b = model.constants.fn_exponent();
  const double exponent = -b * std::pow(phi_ev, 1.5) * p.v_of_w / field_v_per_m;
  return a * field_v_per_m * field_v_per_m / (phi_ev * p.t2_of_w) * std::exp(exponent);
}

/// d ln j / dF, used by analytic fit Jacobians. Zero-field convention: 0.
inline double fn_log_density_slope(double field_v_per_m, double phi_ev,
                                   const EmissionModel& model = {}) {
  if (!(phi_ev > 0.0)) throw DomainError("fn_log_density_slope: work function must be > 0");
  if (!(field_v_per_m > 0.0)) return 0.0;
  const double f = field_v_per_m;
  const double w = schottky_ratio(f, phi_ev, model.constants);
  const double big_b = model.constants.fn_exponent() * std::pow(phi_ev, 1.5);
  double slope = 2.0 / f;
  if (w >= 1.0) return slope;
  double t2 = 1.0, dt2 = 0.0;
  detail::prefactor_t2(w, model, t2, dt2);
  const double dw_df = w / (2.0 * f);
  slope -= dt2 / t2 * dw_df;
  slope += big_b * model.nordheim.v(w) / (f * f);
  slope -= big_b * model.nordheim.dv(w) * dw_df / f;
  return slope;
}

/// Apex field F = |U| / (k r).
inline double tip_field_from_voltage(double bias_v, const TipSpec& tip) {
  return std::abs(bias_v) / (tip.field_factor_k * tip.radius_m);
}

/// I = 2 pi R^2 j.
inline double emitted_current(double density_a_per_m2, const TipSpec& tip) {
  const double r = tip.emit_radius();
  return 2.0 * std::numbers::pi * r * r * density_a_per_m2;
}

/// Effective barrier after absorbing one photon: phi_W - h nu. An infinite
/// wavelength is allowed and returns phi_W.
inline double photofield_phi_eff(double phi_w_ev, double wavelength_m,
                                 const PhysicalConstants& k = kCodata2018) {
  const double photon = std::isinf(wavelength_m) ? 0.0 : k.photon_energy_ev(wavelength_m);
  const double phi = phi_w_ev - photon;
  if (!(phi > 0.0)) {
    throw DomainError("photofield_phi_eff: photon energy " + std::to_string(photon) +
                      " eV exceeds work function " + std::to_string(phi_w_ev) + " eV");
  }
  return phi;
}

/// DC Fowler-Nordheim current for a tip at bias U.
inline double dc_current(double bias_v, const TipSpec& tip, const EmissionModel& model = {}) {
  return emitted_current(
      fn_current_density(tip_field_from_voltage(bias_v, tip), tip.work_function_ev, model), tip);
}

/// Photofield current: the laser field adds to the DC apex field and the
/// barrier is reduced by one photon energy.
inline double photofield_current(double bias_v, const TipSpec& tip, double f_laser_v_per_m,
                                 double wavelength_m, const EmissionModel& model = {}) {
  const double phi = photofield_phi_eff(tip.work_function_ev, wavelength_m, model.constants);
  const double field = tip_field_from_voltage(bias_v, tip) + f_laser_v_per_m;
  return emitted_current(fn_current_density(field, phi, model), tip);
}

}  // namespace femtoemit
