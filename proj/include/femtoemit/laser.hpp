#pragma once

// From oscillator parameters to the optical field at the tip apex.

#include <cmath>
#include <numbers>
#include <string>

#include "femtoemit/constants.hpp"
#include "femtoemit/errors.hpp"

namespace femtoemit {

enum class TemporalShape { kGaussian, kFlatTop };

/// How the focused peak power maps onto an intensity.
///  kOnAxisPeak:   I = 2 P / (pi w0^2), on-axis value of a gaussian beam.
///  kDiskAverage:  I = P / (pi w0^2), mean over the 1/e^2 disk.
enum class SpatialConvention { kOnAxisPeak, kDiskAverage };

/// GDD that stretches a 48 fs transform-limited gaussian pulse to 65 fs.
inline constexpr double kDefaultFocusGdd = 7.587862762344185e-28;  // s^2

struct LaserSpec {
  double wavelength_m = 810e-9;
  double avg_power_w = 0.26;
  double rep_rate_hz = 1e9;
  double pulse_fwhm_s = 48e-15;  // transform-limited, before the focusing lens
  double spot_radius_m = 3e-6;   // 1/e^2 intensity radius
  double gdd_s2 = kDefaultFocusGdd;
  TemporalShape temporal_shape = TemporalShape::kGaussian;
  SpatialConvention spatial_convention = SpatialConvention::kDiskAverage;
  double enhancement_beta = 5.0;
  double theta = 0.0;

  void validate() const {
    if (!(wavelength_m > 0.0)) throw DomainError("LaserSpec: wavelength must be > 0");
    if (!(avg_power_w > 0.0)) throw DomainError("LaserSpec: average power must be > 0");
    if (!(rep_rate_hz > 0.0)) throw DomainError("LaserSpec: repetition rate must be > 0");
    if (!(pulse_fwhm_s > 0.0)) throw DomainError("LaserSpec: pulse duration must be > 0");
    if (!(spot_radius_m > 0.0)) throw DomainError("LaserSpec: spot radius must be > 0");
    if (!std::isfinite(gdd_s2)) throw DomainError("LaserSpec: gdd must be finite");
    if (!(enhancement_beta >= 1.0)) throw DomainError("LaserSpec: enhancement must be >= 1");
  }
};

/// Peak-power form factor: P_peak = s E / tau_fwhm.
inline double temporal_form_factor(TemporalShape shape) {
  return shape == TemporalShape::kGaussian ? 0.94 : 1.0;
}

inline double spatial_form_factor(SpatialConvention c) {
  return c == SpatialConvention::kOnAxisPeak ? 2.0 : 1.0;
}

inline std::string describe(SpatialConvention c) {
  return c == SpatialConvention::kOnAxisPeak ? "on-axis: I = 2 P_peak / (pi w0^2)"
                                             : "disk-average: I = P_peak / (pi w0^2)";
}

inline double pulse_energy(const LaserSpec& spec) { return spec.avg_power_w / spec.rep_rate_hz; }

/// FWHM of a transform-limited gaussian pulse after accumulating GDD.
inline double stretched_duration(double tau_in_s, double gdd_s2) {
  if (!(tau_in_s > 0.0)) throw DomainError("stretched_duration: tau_in must be > 0");
  const double x = 4.0 * std::numbers::ln2 * gdd_s2 / (tau_in_s * tau_in_s);
  return tau_in_s * std::sqrt(1.0 + x * x);
}

/// GDD that stretches tau_in to tau_out (tau_out >= tau_in).
inline double gdd_for_stretch(double tau_in_s, double tau_out_s) {
  if (!(tau_in_s > 0.0) || !(tau_out_s >= tau_in_s)) {
    throw DomainError("gdd_for_stretch: need 0 < tau_in <= tau_out");
  }
  const double ratio = tau_out_s / tau_in_s;
  return tau_in_s * tau_in_s / (4.0 * std::numbers::ln2) * std::sqrt(ratio * ratio - 1.0);
}

/// Pulse duration at the tip.
inline double focus_duration(const LaserSpec& spec) {
  return stretched_duration(spec.pulse_fwhm_s, spec.gdd_s2);
}

inline double peak_power(const LaserSpec& spec) {
  return temporal_form_factor(spec.temporal_shape) * pulse_energy(spec) / focus_duration(spec);
}

/// Peak intensity at the focus in W/m^2 under spec.spatial_convention.
inline double peak_intensity(const LaserSpec& spec) {
  const double w0 = spec.spot_radius_m;
  return spatial_form_factor(spec.spatial_convention) * peak_power(spec) /
         (std::numbers::pi * w0 * w0);
}

/// Peak field amplitude of a plane wave of intensity i.
inline double field_from_intensity(double intensity_w_per_m2,
                                   const PhysicalConstants& k = kCodata2018) {
  if (!(intensity_w_per_m2 >= 0.0)) throw DomainError("field_from_intensity: intensity must be >= 0");
  return std::sqrt(2.0 * intensity_w_per_m2 / (k.eps0 * k.c));
}

inline double free_space_field(const LaserSpec& spec, const PhysicalConstants& k = kCodata2018) {
  return field_from_intensity(peak_intensity(spec), k);
}

inline double enhanced_tip_field(const LaserSpec& spec, const PhysicalConstants& k = kCodata2018) {
  return spec.enhancement_beta * free_space_field(spec, k);
}

/// Enhancement factor implied by a fitted apex field at this focus.
inline double infer_enhancement(double f_fitted, const LaserSpec& spec,
                                const PhysicalConstants& k = kCodata2018) {
  const double free = free_space_field(spec, k);
  if (!(free > 0.0)) throw DomainError("infer_enhancement: free-space field is zero");
  return f_fitted / free;
}

}  // namespace femtoemit
