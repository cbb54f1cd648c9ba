#pragma once

// Run configuration: flat `key = value` text, SI units unless the key says
// otherwise, '#' starts a comment. Unknown keys are rejected.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "femtoemit/constants.hpp"
#include "femtoemit/csv.hpp"
#include "femtoemit/emission.hpp"
#include "femtoemit/errors.hpp"
#include "femtoemit/laser.hpp"
#include "femtoemit/least_squares.hpp"
#include "femtoemit/pulse_stats.hpp"
#include "femtoemit/quadrature.hpp"

namespace femtoemit {

/// Parse errors carry the 1-based config line.
class ConfigError : public DataError {
 public:
  ConfigError(const std::string& what, std::size_t line) : DataError(what, line) {}
};

struct SweepSettings {
  double dc_u_min_v = 1400.0;
  double dc_u_max_v = 1500.0;
  double pf_u_min_v = 600.0;
  double pf_u_max_v = 1500.0;
  std::size_t iv_points = 15;
  double pol_min_rad = 0.0;
  double pol_max_rad = 2.0 * std::numbers::pi;
  std::size_t pol_points = 37;
};

/// Ground-truth parameters used when synthesizing datasets.
struct TruthSettings {
  double noise_rel = 0.02;      // I-V sweeps
  double pol_noise_rel = 0.03;  // polarization scans
  double photofield_f_laser = 1.1e9;
  double cos2_amplitude_a = 1.0e-12;
  double cos2_background_a = 0.2e-12;
  double cos2_theta0 = 0.0;
  double ofe_f_dc = 2.0e9;
  double ofe_f_laser = 0.5e9;
  double ofe_h = 3.0e10;
  double ofe_peak_current_a = 40e-9;  // fixes g through the value at theta = 0

  double ofe_g() const {
    const double f = ofe_f_dc + ofe_f_laser;
    return ofe_peak_current_a / (f * f * std::exp(-ofe_h / f));
  }
};

struct PulseSettings {
  double mean_electrons = 0.5;
  double rep_rate_hz = 1e6;  // desk-scale stand-in for the 1 GHz oscillator
  double window_s = 1.0;
  std::size_t bins_per_period = 4;
  SpectralWindow spectral_window = SpectralWindow::kRectangular;
};

struct MetricsSettings {
  double n_electrons = 200.0;
  double tau_s = 65e-15;
  double emit_radius_m = 1e-6;  // flat emitting face
  double transverse_energy_ev = 0.1;
  double beam_energy_ev = 30e3;
  double avg_current_a = 40e-9;
};

struct RunConfig {
  TipSpec tip{};
  LaserSpec laser{};
  PhysicalConstants constants = kCodata2018;
  PrefactorMode prefactor = PrefactorMode::kUnity;
  QuadratureOptions quadrature{};
  LeastSquaresOptions fit{};
  std::uint64_t seed = 20050725;
  std::string output_dir = "out";
  SweepSettings sweep{};
  TruthSettings truth{};
  PulseSettings pulse{};
  MetricsSettings metrics{};
  std::size_t report_runs = 100;

  EmissionModel emission() const {
    EmissionModel m;
    m.constants = constants;
    m.prefactor = prefactor;
    return m;
  }

  void validate() const {
    tip.validate();
    laser.validate();
    if (sweep.iv_points < 2 || sweep.pol_points < 3) throw DomainError("config: too few sweep points");
    if (pulse.bins_per_period < 2) throw DomainError("config: pulse.bins_per_period must be >= 2");
    if (!(truth.noise_rel >= 0.0) || !(truth.pol_noise_rel >= 0.0)) {
      throw DomainError("config: truth noise levels must be >= 0");
    }
  }
};

namespace detail {

struct ConfigKey {
  std::string name;
  std::string help;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

inline double parse_double_value(const std::string& v) {
  const auto d = parse_number(v);
  if (!d) throw std::invalid_argument("not a number: '" + v + "'");
  return *d;
}

inline std::size_t parse_count_value(const std::string& v) {
  const double d = parse_double_value(v);
  if (!(d >= 0.0) || d != std::floor(d) || d > 9.0e15) {
    throw std::invalid_argument("not a nonnegative integer: '" + v + "'");
  }
  return static_cast<std::size_t>(d);
}

#define FEMTOEMIT_NUM_KEY(key, field, help)                                               \
  ConfigKey {                                                                             \
    key, help, [](RunConfig& c, const std::string& v) { c.field = parse_double_value(v); }, \
        [](const RunConfig& c) { return format_exact(c.field); }                          \
  }
#define FEMTOEMIT_COUNT_KEY(key, field, help)                                            \
  ConfigKey {                                                                            \
    key, help, [](RunConfig& c, const std::string& v) { c.field = parse_count_value(v); }, \
        [](const RunConfig& c) { return std::to_string(c.field); }                       \
  }

inline const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys = {
      FEMTOEMIT_NUM_KEY("tip.radius_m", tip.radius_m, "apex radius of curvature r"),
      FEMTOEMIT_NUM_KEY("tip.field_factor_k", tip.field_factor_k, "k in F = U/(k r)"),
      ConfigKey{"tip.emit_radius_m", "emission-area radius R in I = 2 pi R^2 j; 'auto' means R = r",
                [](RunConfig& c, const std::string& v) {
                  if (v == "auto") {
                    c.tip.emit_radius_m.reset();
                  } else {
                    c.tip.emit_radius_m = parse_double_value(v);
                  }
                },
                [](const RunConfig& c) {
                  return c.tip.emit_radius_m ? format_exact(*c.tip.emit_radius_m) : std::string("auto");
                }},
      FEMTOEMIT_NUM_KEY("tip.work_function_eV", tip.work_function_ev, "work function phi_W"),
      FEMTOEMIT_NUM_KEY("laser.wavelength_m", laser.wavelength_m, "centre wavelength"),
      FEMTOEMIT_NUM_KEY("laser.avg_power_W", laser.avg_power_w, "average power at the tip"),
      FEMTOEMIT_NUM_KEY("laser.rep_rate_Hz", laser.rep_rate_hz, "oscillator repetition rate"),
      FEMTOEMIT_NUM_KEY("laser.pulse_fwhm_s", laser.pulse_fwhm_s, "transform-limited FWHM before the lens"),
      FEMTOEMIT_NUM_KEY("laser.spot_radius_m", laser.spot_radius_m, "1/e^2 focal radius"),
      FEMTOEMIT_NUM_KEY("laser.gdd_s2", laser.gdd_s2, "group delay dispersion up to the focus"),
      ConfigKey{"laser.temporal_shape", "gaussian | flat-top",
                [](RunConfig& c, const std::string& v) {
                  if (v == "gaussian") {
                    c.laser.temporal_shape = TemporalShape::kGaussian;
                  } else if (v == "flat-top") {
                    c.laser.temporal_shape = TemporalShape::kFlatTop;
                  } else {
                    throw std::invalid_argument("expected gaussian or flat-top, got '" + v + "'");
                  }
                },
                [](const RunConfig& c) {
                  return std::string(c.laser.temporal_shape == TemporalShape::kGaussian ? "gaussian"
                                                                                        : "flat-top");
                }},
      ConfigKey{"laser.intensity_convention", "disk-average (P/(pi w0^2)) | on-axis (2P/(pi w0^2))",
                [](RunConfig& c, const std::string& v) {
                  if (v == "disk-average") {
                    c.laser.spatial_convention = SpatialConvention::kDiskAverage;
                  } else if (v == "on-axis") {
                    c.laser.spatial_convention = SpatialConvention::kOnAxisPeak;
                  } else {
                    throw std::invalid_argument("expected disk-average or on-axis, got '" + v + "'");
                  }
                },
                [](const RunConfig& c) {
                  return std::string(c.laser.spatial_convention == SpatialConvention::kDiskAverage
                                         ? "disk-average"
                                         : "on-axis");
                }},
      FEMTOEMIT_NUM_KEY("laser.enhancement", laser.enhancement_beta, "apex field enhancement beta"),
      FEMTOEMIT_NUM_KEY("laser.theta_rad", laser.theta, "polarization angle to the shank"),
      FEMTOEMIT_NUM_KEY("constants.e_C", constants.e, "elementary charge"),
      FEMTOEMIT_NUM_KEY("constants.h_Js", constants.h, "Planck constant"),
      FEMTOEMIT_NUM_KEY("constants.m_e_kg", constants.m_e, "electron mass"),
      FEMTOEMIT_NUM_KEY("constants.eps0_F_per_m", constants.eps0, "vacuum permittivity"),
      FEMTOEMIT_NUM_KEY("constants.c_m_per_s", constants.c, "speed of light"),
      ConfigKey{"emission.prefactor", "unity (t^2 = 1) | corrected (t = v - (2w/3) v')",
                [](RunConfig& c, const std::string& v) {
                  if (v == "unity") {
                    c.prefactor = PrefactorMode::kUnity;
                  } else if (v == "corrected") {
                    c.prefactor = PrefactorMode::kCorrected;
                  } else {
                    throw std::invalid_argument("expected unity or corrected, got '" + v + "'");
                  }
                },
                [](const RunConfig& c) {
                  return std::string(c.prefactor == PrefactorMode::kUnity ? "unity" : "corrected");
                }},
      FEMTOEMIT_NUM_KEY("quad.rel_tol", quadrature.rel_tol, "quadrature relative tolerance"),
      FEMTOEMIT_COUNT_KEY("quad.max_refinements", quadrature.max_refinements, "quadrature refinement cap"),
      FEMTOEMIT_COUNT_KEY("fit.max_iterations", fit.max_iterations, "least-squares iteration cap"),
      FEMTOEMIT_NUM_KEY("fit.cost_rtol", fit.cost_rtol, "relative cost change for convergence"),
      FEMTOEMIT_NUM_KEY("fit.grad_tol", fit.grad_tol, "gradient (cosine) tolerance"),
      FEMTOEMIT_COUNT_KEY("seed", seed, "base seed for every random stream"),
      ConfigKey{"output_dir", "directory for result files",
                [](RunConfig& c, const std::string& v) { c.output_dir = v; },
                [](const RunConfig& c) { return c.output_dir; }},
      FEMTOEMIT_NUM_KEY("sweep.dc_u_min_V", sweep.dc_u_min_v, "DC sweep lowest bias"),
      FEMTOEMIT_NUM_KEY("sweep.dc_u_max_V", sweep.dc_u_max_v, "DC sweep highest bias"),
      FEMTOEMIT_NUM_KEY("sweep.pf_u_min_V", sweep.pf_u_min_v, "photofield sweep lowest bias"),
      FEMTOEMIT_NUM_KEY("sweep.pf_u_max_V", sweep.pf_u_max_v, "photofield sweep highest bias"),
      FEMTOEMIT_COUNT_KEY("sweep.iv_points", sweep.iv_points, "points per I-V sweep"),
      FEMTOEMIT_NUM_KEY("sweep.pol_min_rad", sweep.pol_min_rad, "polarization scan start"),
      FEMTOEMIT_NUM_KEY("sweep.pol_max_rad", sweep.pol_max_rad, "polarization scan end"),
      FEMTOEMIT_COUNT_KEY("sweep.pol_points", sweep.pol_points, "points per polarization scan"),
      FEMTOEMIT_NUM_KEY("truth.noise_rel", truth.noise_rel, "relative gaussian noise of synthetic I-V sweeps"),
      FEMTOEMIT_NUM_KEY("truth.pol_noise_rel", truth.pol_noise_rel, "relative gaussian noise of synthetic polarization scans"),
      FEMTOEMIT_NUM_KEY("truth.photofield_f_laser_V_per_m", truth.photofield_f_laser, "photofield laser field"),
      FEMTOEMIT_NUM_KEY("truth.cos2_amplitude_A", truth.cos2_amplitude_a, "cos^2 amplitude"),
      FEMTOEMIT_NUM_KEY("truth.cos2_background_A", truth.cos2_background_a, "flat background"),
      FEMTOEMIT_NUM_KEY("truth.cos2_theta0_rad", truth.cos2_theta0, "cos^2 phase offset"),
      FEMTOEMIT_NUM_KEY("truth.ofe_f_dc_V_per_m", truth.ofe_f_dc, "DC field of the OFE scan"),
      FEMTOEMIT_NUM_KEY("truth.ofe_f_laser_V_per_m", truth.ofe_f_laser, "OFE laser field"),
      FEMTOEMIT_NUM_KEY("truth.ofe_h_V_per_m", truth.ofe_h, "OFE exponent constant h"),
      FEMTOEMIT_NUM_KEY("truth.ofe_peak_current_A", truth.ofe_peak_current_a, "OFE current at theta = 0"),
      FEMTOEMIT_NUM_KEY("pulse.mean_electrons", pulse.mean_electrons, "mean electrons per pulse"),
      FEMTOEMIT_NUM_KEY("pulse.rep_rate_Hz", pulse.rep_rate_hz, "repetition rate of the simulated train"),
      FEMTOEMIT_NUM_KEY("pulse.window_s", pulse.window_s, "length of the simulated train"),
      FEMTOEMIT_COUNT_KEY("pulse.bins_per_period", pulse.bins_per_period, "time bins per repetition period"),
      ConfigKey{"pulse.spectral_window", "rectangular | hann",
                [](RunConfig& c, const std::string& v) {
                  if (v == "rectangular") {
                    c.pulse.spectral_window = SpectralWindow::kRectangular;
                  } else if (v == "hann") {
                    c.pulse.spectral_window = SpectralWindow::kHann;
                  } else {
                    throw std::invalid_argument("expected rectangular or hann, got '" + v + "'");
                  }
                },
                [](const RunConfig& c) {
                  return std::string(c.pulse.spectral_window == SpectralWindow::kRectangular ? "rectangular"
                                                                                             : "hann");
                }},
      FEMTOEMIT_NUM_KEY("metrics.n_electrons", metrics.n_electrons, "electrons per pulse"),
      FEMTOEMIT_NUM_KEY("metrics.tau_s", metrics.tau_s, "emission duration"),
      FEMTOEMIT_NUM_KEY("metrics.emit_radius_m", metrics.emit_radius_m, "radius of the emitting face"),
      FEMTOEMIT_NUM_KEY("metrics.transverse_energy_eV", metrics.transverse_energy_ev, "mean transverse energy"),
      FEMTOEMIT_NUM_KEY("metrics.beam_energy_eV", metrics.beam_energy_ev, "beam energy for the solid angle"),
      FEMTOEMIT_NUM_KEY("metrics.avg_current_A", metrics.avg_current_a, "time-averaged photocurrent"),
      FEMTOEMIT_COUNT_KEY("report.runs", report_runs, "seeded repetitions per round-trip criterion"),
  };
  return keys;
}

#undef FEMTOEMIT_NUM_KEY
#undef FEMTOEMIT_COUNT_KEY

}  // namespace detail

inline RunConfig parse_config(std::istream& in, RunConfig cfg = {}) {
  const auto& keys = detail::config_keys();
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    const auto body = detail::trim(line.substr(0, hash));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(lineno) + ": expected 'key = value'", lineno);
    }
    const auto key = detail::trim(std::string_view(body).substr(0, eq));
    const auto value = detail::trim(std::string_view(body).substr(eq + 1));
    const auto it = std::find_if(keys.begin(), keys.end(), [&](const auto& k) { return k.name == key; });
    if (it == keys.end()) {
      throw ConfigError("config line " + std::to_string(lineno) + ": unknown key '" + key + "'", lineno);
    }
    try {
      it->set(cfg, value);
    } catch (const std::invalid_argument& e) {
      throw ConfigError("config line " + std::to_string(lineno) + ", key '" + key + "': " + e.what(),
                        lineno);
    }
  }
  return cfg;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path, 0);
  return parse_config(in);
}

/// Every key with its current value, one `key = value  # help` per line.
inline std::string dump_config(const RunConfig& cfg) {
  std::ostringstream os;
  for (const auto& k : detail::config_keys()) {
    os << k.name << " = " << k.get(cfg) << "  # " << k.help << '\n';
  }
  return os.str();
}

}  // namespace femtoemit
