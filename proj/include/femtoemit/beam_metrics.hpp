#pragma once

#include <cmath>
#include <numbers>
#include <string>

#include "femtoemit/constants.hpp"
#include "femtoemit/errors.hpp"

namespace femtoemit {

/// Emission-cone assumption behind a brightness figure: electrons leave
/// with mean transverse energy E_t and are accelerated to E_beam, giving a
/// half-angle sqrt(E_t / E_beam) and a solid angle pi E_t / E_beam.
struct SolidAngleAssumption {
  double transverse_energy_ev = 0.1;
  double beam_energy_ev = 30e3;

  double solid_angle_sr() const {
    if (!(transverse_energy_ev > 0.0) || !(beam_energy_ev > 0.0)) {
      throw DomainError("SolidAngleAssumption: energies must be > 0");
    }
    return std::numbers::pi * transverse_energy_ev / beam_energy_ev;
  }

  std::string describe() const {
    return "omega = pi * E_t / E_beam with E_t = " + std::to_string(transverse_energy_ev) +
           " eV, E_beam = " + std::to_string(beam_energy_ev) + " eV";
  }
};

struct PulseMetrics {
  double n_electrons = 0.0;
  double tau_s = 0.0;
  double area_m2 = 0.0;
  double solid_angle_sr = 0.0;
  double i_inst_a = 0.0;
  double j_inst_a_per_m2 = 0.0;
  double brightness = 0.0;  // A / (m^2 sr)
  double electron_rate_per_s = 0.0;
};

/// Current during the pulse for n electrons spread uniformly over tau.
inline double instantaneous_current(double n_electrons, double tau_s,
                                    const PhysicalConstants& k = kCodata2018) {
  if (!(tau_s > 0.0)) throw DomainError("instantaneous_current: tau must be > 0");
  if (!(n_electrons >= 0.0)) throw DomainError("instantaneous_current: n must be >= 0");
  return n_electrons * k.e / tau_s;
}

inline double current_density(double current_a, double area_m2) {
  if (!(area_m2 > 0.0)) throw DomainError("current_density: area must be > 0");
  return current_a / area_m2;
}

inline double brightness(double current_a, double area_m2, double solid_angle_sr) {
  if (!(area_m2 > 0.0)) throw DomainError("brightness: area must be > 0");
  if (!(solid_angle_sr > 0.0)) throw DomainError("brightness: solid angle must be > 0");
  return current_a / (area_m2 * solid_angle_sr);
}

inline PulseMetrics pulse_metrics(double n_electrons, double tau_s, double area_m2,
                                  double solid_angle_sr, const PhysicalConstants& k = kCodata2018) {
  PulseMetrics m;
  m.n_electrons = n_electrons;
  m.tau_s = tau_s;
  m.area_m2 = area_m2;
  m.solid_angle_sr = solid_angle_sr;
  m.i_inst_a = instantaneous_current(n_electrons, tau_s, k);
  m.j_inst_a_per_m2 = current_density(m.i_inst_a, area_m2);
  m.brightness = brightness(m.i_inst_a, area_m2, solid_angle_sr);
  m.electron_rate_per_s = m.i_inst_a / k.e;
  return m;
}

// Presentation units.
inline constexpr double kAPerM2PerKaPerCm2 = 1e7;
inline double to_ka_per_cm2(double a_per_m2) { return a_per_m2 / kAPerM2PerKaPerCm2; }
inline double from_ka_per_cm2(double ka_per_cm2) { return ka_per_cm2 * kAPerM2PerKaPerCm2; }
inline double to_microamp(double a) { return a * 1e6; }
inline double to_w_per_cm2(double w_per_m2) { return w_per_m2 * 1e-4; }

}  // namespace femtoemit
