#pragma once

// Optical field emission: the instantaneous laser field at the apex adds
// to the DC field inside the tunneling law.

#include <cmath>
#include <numbers>

#include "femtoemit/emission.hpp"
#include "femtoemit/errors.hpp"
#include "femtoemit/quadrature.hpp"

namespace femtoemit {

/// DC field, peak optical field at the apex, and polarization angle theta
/// between the tip shank and the optical field.
struct FieldState {
  double f_dc = 0.0;
  double f_laser_peak = 0.0;
  double theta = 0.0;

  void validate() const {
    if (!(f_dc >= 0.0)) throw DomainError("FieldState: f_dc must be >= 0");
    if (!(f_laser_peak >= 0.0)) throw DomainError("FieldState: f_laser_peak must be >= 0");
    if (!(theta >= 0.0 && theta < 2.0 * std::numbers::pi)) {
      throw DomainError("FieldState: theta must lie in [0, 2 pi)");
    }
  }
};

/// Temporal envelope over which the cycle-averaged emission is further
/// averaged. kContinuous means constant amplitude (pure cycle average).
struct PulseEnvelope {
  enum class Shape { kContinuous, kGaussian };
  Shape shape = Shape::kContinuous;
  double fwhm_s = 0.0;    // intensity FWHM
  double window_s = 0.0;  // uniform averaging window centred on the peak; 0 means fwhm_s

  static PulseEnvelope continuous() { return {}; }
  static PulseEnvelope gaussian(double fwhm_s, double window_s = 0.0) {
    return {Shape::kGaussian, fwhm_s, window_s};
  }

  double averaging_window() const { return window_s > 0.0 ? window_s : fwhm_s; }

  /// Field amplitude relative to the peak at time t from the peak.
  double amplitude(double t_s) const {
    if (shape == Shape::kContinuous) return 1.0;
    return std::exp(-2.0 * std::numbers::ln2 * t_s * t_s / (fwhm_s * fwhm_s));
  }

  void validate() const {
    if (shape == Shape::kGaussian && !(fwhm_s > 0.0)) {
      throw DomainError("PulseEnvelope: gaussian envelope needs fwhm_s > 0");
    }
    if (!(window_s >= 0.0)) throw DomainError("PulseEnvelope: window_s must be >= 0");
  }
};

/// Local field along the shank at optical phase `phase`.
inline double ofe_total_field(const FieldState& fs, double phase) {
  return fs.f_dc + fs.f_laser_peak * std::cos(fs.theta) * std::cos(phase);
}

/// Current density at one instant of the optical cycle. Negative total
/// field emits nothing (no back-tunneling).
inline double ofe_instantaneous_density(const FieldState& fs, double phi_ev, double phase,
                                        const EmissionModel& model = {}) {
  const double f = ofe_total_field(fs, phase);
  return f > 0.0 ? fn_current_density(f, phi_ev, model) : 0.0;
}

/// Closed-form peak-field model g F^2 exp(-h/F) with
/// F = f_dc + f_laser |cos theta|. Even and pi-periodic in theta.
inline double ofe_peak_field_model(const FieldState& fs, double g, double h) {
  if (!(g > 0.0) || !(h > 0.0)) throw DomainError("ofe_peak_field_model: g and h must be > 0");
  const double f = fs.f_dc + fs.f_laser_peak * std::abs(std::cos(fs.theta));
  if (!(f > 0.0)) return 0.0;
  return g * f * f * std::exp(-h / f);
}

namespace detail {

inline double cycle_average(FieldState fs, double phi_ev, double amplitude,
                            const QuadratureOptions& opt, const EmissionModel& model) {
  fs.f_laser_peak *= amplitude;
  if (fs.f_laser_peak * std::cos(fs.theta) == 0.0) return fn_current_density(fs.f_dc, phi_ev, model);
  const auto integrand = [&](double phase) {
    return ofe_instantaneous_density(fs, phi_ev, phase, model);
  };
  // The integrand is even in phase, so half a cycle suffices; the
  // trapezoid rule keeps its spectral accuracy on [0, pi] for even
  // periodic functions.
  const auto r = integrate_periodic(integrand, 0.0, std::numbers::pi, opt);
  return r.value / std::numbers::pi;
}

}  // namespace detail

/// Emission averaged over the optical cycle and, for a gaussian envelope,
/// uniformly over a time window centred on the pulse peak.
inline double ofe_cycle_averaged_density(const FieldState& fs, double phi_ev,
                                         const PulseEnvelope& envelope = PulseEnvelope::continuous(),
                                         const QuadratureOptions& opt = {},
                                         const EmissionModel& model = {}) {
  if (!(phi_ev > 0.0)) throw DomainError("ofe_cycle_averaged_density: work function must be > 0");
  envelope.validate();
  if (envelope.shape == PulseEnvelope::Shape::kContinuous) {
    return detail::cycle_average(fs, phi_ev, 1.0, opt, model);
  }
  const double half = 0.5 * envelope.averaging_window();
  const auto outer = [&](double t) {
    return detail::cycle_average(fs, phi_ev, envelope.amplitude(t), opt, model);
  };
  return integrate_adaptive(outer, 0.0, half, opt).value / half;
}

/// Photofield current with the optical field following the pulse envelope
/// instead of acting as a constant additive field.
inline double photofield_current_envelope_averaged(double bias_v, const TipSpec& tip,
                                                   double f_laser_peak, double wavelength_m,
                                                   const PulseEnvelope& envelope,
                                                   const QuadratureOptions& opt = {},
                                                   const EmissionModel& model = {}) {
  envelope.validate();
  if (envelope.shape == PulseEnvelope::Shape::kContinuous) {
    return photofield_current(bias_v, tip, f_laser_peak, wavelength_m, model);
  }
  const double phi = photofield_phi_eff(tip.work_function_ev, wavelength_m, model.constants);
  const double f_dc = tip_field_from_voltage(bias_v, tip);
  const double half = 0.5 * envelope.averaging_window();
  const auto density = [&](double t) {
    return fn_current_density(f_dc + f_laser_peak * envelope.amplitude(t), phi, model);
  };
  return emitted_current(integrate_adaptive(density, 0.0, half, opt).value / half, tip);
}

}  // namespace femtoemit
