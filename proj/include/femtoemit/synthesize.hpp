#pragma once

// Synthetic sweeps from the forward models, with seeded multiplicative
// gaussian noise. Used by the round-trip checks and the simulate-*
// subcommands.

#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "femtoemit/config.hpp"
#include "femtoemit/dataset.hpp"
#include "femtoemit/emission.hpp"
#include "femtoemit/errors.hpp"
#include "femtoemit/fit_models.hpp"
#include "femtoemit/optical_emission.hpp"

namespace femtoemit {

using TruthParams = std::map<std::string, double>;

inline std::vector<double> linspace(double a, double b, std::size_t n) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) {
    v[i] = n == 1 ? a : a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
  }
  return v;
}

/// Lowest bias at which the DC current is `ratio` times below its value at
/// u_max (bisection; the DC current is monotone in U).
inline double decade_start(const TipSpec& tip, double u_max, double ratio = 10.0,
                           const EmissionModel& em = {}) {
  const double target = dc_current(u_max, tip, em) / ratio;
  double lo = 1e-3 * u_max, hi = u_max;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (dc_current(mid, tip, em) < target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

namespace detail {

inline double truth_or(const TruthParams& t, const std::string& key, double fallback) {
  const auto it = t.find(key);
  return it == t.end() ? fallback : it->second;
}

}  // namespace detail

/// Noise-free forward model for a registered id, with every parameter
/// resolved from `truth` or the configuration defaults.
struct ForwardModel {
  SweepKind kind = SweepKind::kIv;
  std::vector<double> x;
  std::function<double(double)> value;
};

inline ForwardModel forward_model(const RunConfig& cfg, const std::string& id, const TruthParams& truth) {
  ForwardModel fm;
  const auto em = cfg.emission();
  if (id == model_id::kDcFn) {
    TipSpec tip = cfg.tip;
    tip.radius_m = detail::truth_or(truth, "r", tip.radius_m);
    if (truth.count("R")) tip.emit_radius_m = truth.at("R");
    tip.validate();
    fm.x = linspace(cfg.sweep.dc_u_min_v, cfg.sweep.dc_u_max_v, cfg.sweep.iv_points);
    fm.value = [tip, em](double u) { return dc_current(u, tip, em); };
  } else if (id == model_id::kPhotofield) {
    const TipSpec tip = cfg.tip;
    tip.validate();
    const double f_laser = detail::truth_or(truth, "f_laser", cfg.truth.photofield_f_laser);
    const double lambda = cfg.laser.wavelength_m;
    fm.x = linspace(cfg.sweep.pf_u_min_v, cfg.sweep.pf_u_max_v, cfg.sweep.iv_points);
    fm.value = [=](double u) { return photofield_current(u, tip, f_laser, lambda, em); };
  } else if (id == model_id::kCos2) {
    fm.kind = SweepKind::kPolarization;
    const double a = detail::truth_or(truth, "A", cfg.truth.cos2_amplitude_a);
    const double b = detail::truth_or(truth, "B", cfg.truth.cos2_background_a);
    const double th0 = detail::truth_or(truth, "theta0", cfg.truth.cos2_theta0);
    fm.x = linspace(cfg.sweep.pol_min_rad, cfg.sweep.pol_max_rad, cfg.sweep.pol_points);
    fm.value = [=](double th) {
      const double c = std::cos(th - th0);
      return a * c * c + b;
    };
  } else if (id == model_id::kOfe) {
    fm.kind = SweepKind::kPolarization;
    const double f_dc = detail::truth_or(truth, "f_dc", cfg.truth.ofe_f_dc);
    const double h = detail::truth_or(truth, "h", cfg.truth.ofe_h);
    const double f_laser = detail::truth_or(truth, "f_laser", cfg.truth.ofe_f_laser);
    const double g = detail::truth_or(truth, "g", cfg.truth.ofe_g());
    fm.x = linspace(cfg.sweep.pol_min_rad, cfg.sweep.pol_max_rad, cfg.sweep.pol_points);
    fm.value = [=](double th) { return ofe_peak_field_model({f_dc, f_laser, th}, g, h); };
  } else {
    throw UsageError("unknown model '" + id + "' (expected dc-fn, photofield, cos2 or ofe)");
  }
  return fm;
}

/// Forward model plus multiplicative gaussian noise y (1 + noise N(0,1)).
/// With noise > 0 the 1-sigma error bars noise * y_true are attached.
inline SweepDataset synthesize_dataset(const RunConfig& cfg, const std::string& id,
                                       const TruthParams& truth, double noise_rel, std::uint64_t seed) {
  if (!(noise_rel >= 0.0)) throw DomainError("synthesize_dataset: noise must be >= 0");
  const auto fm = forward_model(cfg, id, truth);
  SweepDataset d;
  d.kind = fm.kind;
  d.x = fm.x;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (double x : d.x) {
    const double y = fm.value(x);
    if (noise_rel > 0.0) {
      d.y.push_back(y * (1.0 + noise_rel * normal(rng)));
      d.sigma_y.push_back(noise_rel * y);
    } else {
      d.y.push_back(y);
    }
  }
  d.validate();
  return d;
}

}  // namespace femtoemit
