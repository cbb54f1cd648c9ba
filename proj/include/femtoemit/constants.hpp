#pragma once

#include <cmath>
#include <numbers>

namespace femtoemit {

/// Fundamental constants in SI units. The defaults are the CODATA 2018
/// exact/recommended values; a run configuration may override them.
struct PhysicalConstants {
  double e = 1.602176634e-19;       // C
  double h = 6.62607015e-34;        // J s
  double m_e = 9.1093837015e-31;    // kg
  double eps0 = 8.8541878128e-12;   // F/m
  double c = 299792458.0;           // m/s

  /// First Fowler-Nordheim constant e^3/(8 pi h), expressed in A eV / V^2
  /// so that j = a F^2 / phi with phi in eV.
  double fn_prefactor() const { return e * e / (8.0 * std::numbers::pi * h); }

  /// Second Fowler-Nordheim constant 8 pi sqrt(2m) / (3 h e), in
  /// V m^-1 eV^-3/2, so that the exponent reads b phi^{3/2} / F.
  double fn_exponent() const {
    return 8.0 * std::numbers::pi * std::sqrt(2.0 * m_e * e) / (3.0 * h);
  }

  /// Schottky lowering sqrt(e F / (4 pi eps0)) in eV per sqrt(V/m).
  double schottky_coefficient() const {
    return std::sqrt(e / (4.0 * std::numbers::pi * eps0));
  }

  /// h c / (lambda e): photon energy in eV.
  double photon_energy_ev(double wavelength_m) const {
    return h * c / (wavelength_m * e);
  }
};

inline constexpr PhysicalConstants kCodata2018{};

}  // namespace femtoemit
