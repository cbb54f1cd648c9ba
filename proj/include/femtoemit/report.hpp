#pragma once

// Acceptance evaluation: every check runs at its stated tolerance and
// yields one row. Shared by `femtoemit paper-report` and the acceptance
// test binary.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "femtoemit/beam_metrics.hpp"
#include "femtoemit/config.hpp"
#include "femtoemit/csv.hpp"
#include "femtoemit/dataset.hpp"
#include "femtoemit/emission.hpp"
#include "femtoemit/errors.hpp"
#include "femtoemit/fit_models.hpp"
#include "femtoemit/laser.hpp"
#include "femtoemit/optical_emission.hpp"
#include "femtoemit/pulse_stats.hpp"
#include "femtoemit/results.hpp"
#include "femtoemit/synthesize.hpp"

namespace femtoemit {

struct Criterion {
  std::string id;
  std::string description;
  std::string measured;
  std::string requirement;
  bool pass = false;
  bool informational = false;  // reported but never fails the run

  std::string status() const { return informational ? "INFO" : (pass ? "PASS" : "FAIL"); }
};

namespace detail {

inline std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

inline double rel_err(double a, double b) { return std::abs(a - b) / std::abs(b); }

inline std::size_t required_count(std::size_t runs, double fraction) {
  return static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(runs) - 1e-9));
}

/// Seed of run i for the k-th fit family.
inline std::uint64_t run_seed(const RunConfig& cfg, std::uint64_t family, std::size_t i) {
  return cfg.seed + 1000003ull * family + i;
}

/// Count seeded synthesize-then-fit runs accepted by `ok`. A run whose fit
/// throws counts as a miss.
inline std::size_t count_recoveries(const RunConfig& cfg, const std::string& id, std::uint64_t family,
                                    double noise, const std::function<bool(const FitResult&)>& ok) {
  std::size_t hits = 0;
  for (std::size_t i = 0; i < cfg.report_runs; ++i) {
    const auto data = synthesize_dataset(cfg, id, {}, noise, run_seed(cfg, family, i));
    try {
      if (ok(run_fit(cfg, id, data))) ++hits;
    } catch (const NumericalError&) {
    } catch (const DataError&) {
    }
  }
  return hits;
}

/// Largest relative mismatch between the analytic gradient and central
/// differences of the model value.
inline double gradient_mismatch(const ParametricModel& m, double x, const std::vector<double>& p) {
  std::vector<double> g(p.size());
  m.gradient(x, p, g);
  double worst = 0.0;
  for (std::size_t j = 0; j < p.size(); ++j) {
    const double h = p[j] != 0.0 ? 1e-6 * std::abs(p[j]) : 1e-9;
    auto pp = p, pm = p;
    pp[j] += h;
    pm[j] -= h;
    const double fd = (m.value(x, pp) - m.value(x, pm)) / (2 * h);
    worst = std::max(worst, std::abs(g[j] - fd) / std::max(std::abs(fd), 1e-300));
  }
  return worst;
}

inline double uniform_trapezoid_cycle_average(const FieldState& fs, double phi, int n,
                                              const EmissionModel& em) {
  double s = 0.5 * (ofe_instantaneous_density(fs, phi, 0.0, em) +
                    ofe_instantaneous_density(fs, phi, std::numbers::pi, em));
  for (int i = 1; i < n; ++i) s += ofe_instantaneous_density(fs, phi, std::numbers::pi * i / n, em);
  return s / n;
}

inline PulseTrainRecord desk_pulse_train(const RunConfig& cfg) {
  return sample_pulse_train(cfg.pulse.mean_electrons, cfg.pulse.rep_rate_hz, cfg.pulse.window_s, cfg.seed);
}

inline double desk_bin(const RunConfig& cfg) {
  return 1.0 / (cfg.pulse.rep_rate_hz * static_cast<double>(cfg.pulse.bins_per_period));
}

}  // namespace detail

/// Serialized outputs of every seeded pipeline, keyed by output name.
/// Running it twice must give identical strings.
inline std::map<std::string, std::string> pipeline_outputs(const RunConfig& cfg) {
  std::map<std::string, std::string> out;
  for (const char* id : {model_id::kDcFn, model_id::kPhotofield, model_id::kCos2, model_id::kOfe}) {
    const double noise = kind_of_model(id) == SweepKind::kIv ? cfg.truth.noise_rel : cfg.truth.pol_noise_rel;
    const auto data = synthesize_dataset(cfg, id, {}, noise, cfg.seed);
    out[std::string("sweep_") + id] = sweep_to_string(data);
    const auto fit = run_fit(cfg, id, data);
    out[std::string("fit_") + id] = result_rows_to_string(fit_parameter_rows(fit, cfg));
    out[std::string("curve_") + id] = result_rows_to_string(fit_curve_rows(data, fit));
  }
  const auto rec = detail::desk_pulse_train(cfg);
  out["pulse_train"] = result_rows_to_string(pulse_train_rows(rec));
  const auto s = periodogram(rec, detail::desk_bin(cfg), cfg.pulse.spectral_window, cfg.constants);
  out["spectrum"] = result_rows_to_string(spectrum_rows(s, 50));
  out["spectrum_summary"] = result_rows_to_string(spectrum_summary_rows(summarize_spectrum(rec, s)));
  out["metrics"] = result_rows_to_string(metrics_rows(cfg));
  return out;
}

inline std::vector<Criterion> evaluate_acceptance(const RunConfig& cfg) {
  using detail::fmt;
  using detail::rel_err;
  std::vector<Criterion> rows;
  const auto add = [&](std::string id, std::string what, std::string measured, std::string need, bool pass) {
    rows.push_back({std::move(id), std::move(what), std::move(measured), std::move(need), pass, false});
  };
  const auto em = cfg.emission();
  const auto& k = cfg.constants;
  constexpr double kPi = std::numbers::pi;

  // 1: effective work function under 810 nm illumination.
  {
    const double photon = k.photon_energy_ev(810e-9);
    const double phi_eff = photofield_phi_eff(4.5, 810e-9, k);
    add("AC1a", "effective work function at 4.5 eV and 810 nm", fmt("%.6f eV", phi_eff), "3.0 +/- 0.05 eV",
        std::abs(phi_eff - 3.0) <= 0.05);
    add("AC1b", "photon energy at 810 nm", fmt("%.6f eV", photon), "1.53 +/- 0.01 eV",
        std::abs(photon - 1.53) <= 0.01);
  }

  // 2: closing estimates for 200 electrons in 65 fs.
  {
    const SolidAngleAssumption omega{cfg.metrics.transverse_energy_ev, cfg.metrics.beam_energy_ev};
    const double area = kPi * cfg.metrics.emit_radius_m * cfg.metrics.emit_radius_m;
    const auto m = pulse_metrics(200.0, 65e-15, area, omega.solid_angle_sr(), k);
    add("AC2a", "instantaneous current of 200 e in 65 fs", fmt("%.6g uA", to_microamp(m.i_inst_a)),
        "500 uA within 2%", rel_err(m.i_inst_a, 500e-6) <= 0.02);
    add("AC2b", "electron rate during the pulse", fmt("%.6g e/s", m.electron_rate_per_s),
        "3.1e15 e/s within 3%", rel_err(m.electron_rate_per_s, 3.1e15) <= 0.03);
    add("AC2c", "current density over pi (1 um)^2", fmt("%.6g kA/cm^2", to_ka_per_cm2(m.j_inst_a_per_m2)),
        "15 kA/cm^2 within 5%", rel_err(to_ka_per_cm2(m.j_inst_a_per_m2), 15.0) <= 0.05);
    add("AC2d", "brightness with omega = pi E_t / E_beam", fmt("%.6g A/(m^2 sr)", m.brightness),
        ">= 1e13 A/(m^2 sr)", m.brightness >= 1e13);
  }

  // 3: enhancement factor from the fitted photofield laser field.
  {
    LaserSpec l = cfg.laser;
    l.avg_power_w = 0.26;
    l.rep_rate_hz = 1e9;
    l.spot_radius_m = 3e-6;
    const double beta = infer_enhancement(1.1e9, l, k);
    add("AC3", "enhancement at 260 mW and F = 1.1 GV/m (" + describe(l.spatial_convention) + ")",
        fmt("%.6g", beta), "4.1 within 30%", rel_err(beta, 4.1) <= 0.30);
  }

  // 4: dispersion in the focus.
  {
    const double tau = stretched_duration(48e-15, cfg.laser.gdd_s2);
    add("AC4", "48 fs pulse after the configured GDD", fmt("%.4f fs", tau * 1e15), "65 +/- 1 fs",
        std::abs(tau - 65e-15) <= 1e-15);
  }

  // 5: seeded fit round trips.
  {
    const auto t0 = std::chrono::steady_clock::now();
    const std::size_t need = detail::required_count(cfg.report_runs, 0.95);
    const std::string need_text = ">= " + std::to_string(need) + "/" + std::to_string(cfg.report_runs);
    const auto frac = [&](std::size_t hits) {
      return std::to_string(hits) + "/" + std::to_string(cfg.report_runs);
    };

    const double r_true = cfg.tip.radius_m;
    const auto dc = detail::count_recoveries(cfg, model_id::kDcFn, 1, cfg.truth.noise_rel, [&](const FitResult& f) {
      return rel_err(f.param("r"), r_true) <= 0.03;
    });
    add("AC5a", "DC Fowler-Nordheim fit recovers r within 3% at " + fmt("%.3g", cfg.truth.noise_rel) + " noise",
        frac(dc), need_text, dc >= need);

    const double fl_true = cfg.truth.photofield_f_laser;
    const auto pf = detail::count_recoveries(cfg, model_id::kPhotofield, 2, cfg.truth.noise_rel,
                                             [&](const FitResult& f) {
                                               return rel_err(f.param("f_laser"), fl_true) <= 0.05;
                                             });
    add("AC5b", "photofield fit recovers f_laser within 5%", frac(pf), need_text, pf >= need);

    const auto c2 = detail::count_recoveries(cfg, model_id::kCos2, 3, cfg.truth.pol_noise_rel, [&](const FitResult& f) {
      return rel_err(f.param("A"), cfg.truth.cos2_amplitude_a) <= 0.05 &&
             rel_err(f.param("B"), cfg.truth.cos2_background_a) <= 0.05 &&
             std::abs(wrap_half_turn(f.param("theta0") - cfg.truth.cos2_theta0)) <= 0.05;
    });
    add("AC5c", "cos^2 plus background recovers A and B within 5% and theta0 within 0.05 rad", frac(c2),
        need_text, c2 >= need);

    const auto truth_ofe = forward_model(cfg, model_id::kOfe, {});
    const auto ofe = detail::count_recoveries(cfg, model_id::kOfe, 4, cfg.truth.pol_noise_rel, [&](const FitResult& f) {
      for (double th : truth_ofe.x) {
        if (rel_err(ofe_fitted_value(f, cfg.truth.ofe_f_dc, th), truth_ofe.value(th)) > 0.05) return false;
      }
      return true;
    });
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    add("AC5d", "OFE polarization fit within 5% of truth at every scan angle", frac(ofe), need_text, ofe >= need);
    add("AC5e", "fit round trips wall time", fmt("%.2f s", secs), "< 60 s", secs < 60.0);
  }

  // 6: Fowler-Nordheim plot straightness over one decade of current.
  {
    RunConfig c = cfg;
    c.sweep.dc_u_min_v = decade_start(c.tip, c.sweep.dc_u_max_v, 10.0, em);
    const auto d = synthesize_dataset(c, model_id::kDcFn, {}, 0.0, 0);
    const auto line = fit_line(fn_linearize(d));
    add("AC6", "ln(I/U^2) against 1/U over one decade", fmt("R^2 = %.9f", line.r_squared), "R^2 > 0.999",
        line.r_squared > 0.999);
  }

  // 7: polarization structure of both models.
  {
    RunConfig c = cfg;
    c.truth.cos2_theta0 = 0.0;
    const auto c0 = forward_model(c, model_id::kCos2, {});
    bool ok = true;
    const double top = c0.value(0.0);
    for (int i = 1; i < 720; ++i) {
      const double th = kPi * i / 360.0;
      if (c0.value(th) > top) ok = false;
      if (rel_err(c0.value(th + kPi), c0.value(th)) > 1e-12) ok = false;
    }
    add("AC7a", "cos^2 model maximal at theta = 0 and pi-periodic", ok ? "holds on a 0.5 deg grid" : "violated",
        "max at 0 and period pi", ok);

    const FieldState base{cfg.truth.ofe_f_dc, cfg.truth.ofe_f_laser, 0.0};
    const double phi = cfg.tip.work_function_ev;
    bool even = true;
    for (int i = 1; i < 360; ++i) {
      FieldState a = base, b = base;
      a.theta = kPi * i / 180.0;
      b.theta = -a.theta;
      const double ya = ofe_cycle_averaged_density(a, phi, PulseEnvelope::continuous(), cfg.quadrature, em);
      const double yb = ofe_cycle_averaged_density(b, phi, PulseEnvelope::continuous(), cfg.quadrature, em);
      if (rel_err(ya, yb) > 1e-12) even = false;
      if (ofe_peak_field_model(a, 1.0, cfg.truth.ofe_h) != ofe_peak_field_model(b, 1.0, cfg.truth.ofe_h)) {
        even = false;
      }
    }
    FieldState perp = base;
    perp.theta = kPi / 2;
    const double j_perp = ofe_cycle_averaged_density(perp, phi, PulseEnvelope::continuous(), cfg.quadrature, em);
    const double j_dc = fn_current_density(base.f_dc, phi, em);
    const bool exact = j_perp == j_dc &&
                       ofe_peak_field_model(perp, 1.0, cfg.truth.ofe_h) ==
                           ofe_peak_field_model({base.f_dc, 0.0, 0.0}, 1.0, cfg.truth.ofe_h);
    add("AC7b", "OFE model even in theta", even ? "holds on a 1 deg grid" : "violated", "f(theta) = f(-theta)", even);
    add("AC7c", "OFE model at theta = pi/2 equals the DC value", fmt("ratio - 1 = %.3g", j_perp / j_dc - 1.0),
        "exact equality", exact);
  }

  // 8: desk-scale spectrum.
  {
    const auto rec = detail::desk_pulse_train(cfg);
    const auto s = periodogram(rec, detail::desk_bin(cfg), SpectralWindow::kRectangular, k);
    const auto sum = summarize_spectrum(rec, s);
    const auto peak = find_peak(s, 0.5 * rec.rep_rate_hz, 1.5 * rec.rep_rate_hz);
    add("AC8a", "carrier peak bin of a " + fmt("%.0f", static_cast<double>(rec.size())) + "-pulse train",
        fmt("%.6g Hz", s.freqs[peak]), fmt("%.6g Hz", cfg.pulse.rep_rate_hz), peak == s.carrier_index);
    add("AC8b", "-3 dBc line width", fmt("%.6g Hz", sum.width_3db_hz),
        fmt("RBW %.6g Hz within one bin", sum.resolution_bw_hz),
        std::abs(sum.width_3db_hz - sum.resolution_bw_hz) <= sum.resolution_bw_hz * (1.0 + 1e-9));
    add("AC8c", "carrier SNR at " + fmt("%.3g", cfg.pulse.mean_electrons) + " e/pulse", fmt("%.2f dB", sum.snr_db),
        ">= 30 dB", sum.snr_db >= 30.0 && cfg.pulse.mean_electrons >= 0.5 && rec.size() >= 1000000);
  }

  // 9: numerical hygiene.
  {
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    const double phi_eff = photofield_phi_eff(cfg.tip.work_function_ev, cfg.laser.wavelength_m, k);
    double worst = 0.0;
    for (int trial = 0; trial < 25; ++trial) {
      const double r = 100e-9 + 70e-9 * u01(rng);
      const double big_r = 50e-9 + 150e-9 * u01(rng);
      const double u_dc = 1300.0 + 300.0 * u01(rng);
      worst = std::max(worst, detail::gradient_mismatch(dc_fn_model(cfg.tip.work_function_ev, cfg.tip.field_factor_k, true, em),
                                                        u_dc, {r, big_r}));
      const double u_pf = 600.0 + 900.0 * u01(rng);
      worst = std::max(worst, detail::gradient_mismatch(photofield_model(cfg.tip, phi_eff, em), u_pf,
                                                        {0.5e9 + 1e9 * u01(rng)}));
      const double th = 2 * kPi * u01(rng);
      worst = std::max(worst, detail::gradient_mismatch(cos2_model(), th,
                                                        {1e-12 * (0.5 + u01(rng)), 0.2e-12 * u01(rng), u01(rng) - 0.5}));
      // Away from cos(theta) = 0 where |cos| has a kink.
      const double th_ofe = 0.1 + 1.3 * u01(rng) + (u01(rng) < 0.5 ? 0.0 : kPi);
      worst = std::max(worst, detail::gradient_mismatch(ofe_model(cfg.truth.ofe_f_dc), th_ofe,
                                                        {std::log(1e-21) + u01(rng), 2e10 + 2e10 * u01(rng),
                                                         0.2e9 + 0.6e9 * u01(rng)}));
    }
    add("AC9a", "model Jacobians against central differences", fmt("max rel %.3g", worst), "<= 1e-6",
        worst <= 1e-6);

    double quad = 0.0;
    QuadratureOptions fine = cfg.quadrature;
    fine.rel_tol = 1e-13;
    for (double fl : {0.2e9, 1e9, 3e9}) {
      const FieldState fs{cfg.truth.ofe_f_dc, fl, 0.3};
      const double phi = cfg.tip.work_function_ev;
      const double base = ofe_cycle_averaged_density(fs, phi, PulseEnvelope::continuous(), cfg.quadrature, em);
      const double t1 = detail::uniform_trapezoid_cycle_average(fs, phi, 1 << 12, em);
      const double t2 = detail::uniform_trapezoid_cycle_average(fs, phi, 1 << 13, em);
      quad = std::max({quad, rel_err(base, ofe_cycle_averaged_density(fs, phi, PulseEnvelope::continuous(), fine, em)),
                       rel_err(t1, t2), rel_err(base, t2)});
    }
    add("AC9b", "cycle average under resolution doubling", fmt("max rel %.3g", quad), "<= 1e-8", quad <= 1e-8);

    const auto rec = sample_pulse_train(0.5, 1e6, 1.0, cfg.seed + 7);
    double s1 = 0.0, s2 = 0.0;
    for (auto c : rec.counts) {
      s1 += c;
      s2 += static_cast<double>(c) * c;
    }
    const double n = static_cast<double>(rec.size());
    const double mean = s1 / n;
    const double fano = (s2 / n - mean * mean) * n / (n - 1.0) / mean;
    add("AC9c", "Poisson Fano factor at 1e6 samples", fmt("%.5f", fano), "1 +/- 0.05", std::abs(fano - 1.0) <= 0.05);

    const auto train = detail::desk_pulse_train(cfg);
    const auto x = binned_current(train, detail::desk_bin(cfg), k);
    const auto s = periodogram(train, detail::desk_bin(cfg), SpectralWindow::kRectangular, k);
    double ex = 0.0, ep = 0.0;
    for (double v : x) ex += v * v;
    for (double p : s.power) ep += p;
    const double parseval = rel_err(ep, ex);
    add("AC9d", "Parseval identity of the periodogram", fmt("rel %.3g", parseval), "<= 1e-9", parseval <= 1e-9);
  }

  // 10: determinism.
  {
    const auto a = pipeline_outputs(cfg);
    const auto b = pipeline_outputs(cfg);
    std::size_t same = 0;
    for (const auto& [name, text] : a) same += b.count(name) && b.at(name) == text;
    add("AC10", "seeded pipelines byte-identical across two runs",
        std::to_string(same) + "/" + std::to_string(a.size()) + " outputs identical", "all identical",
        same == a.size() && a.size() == b.size());
  }

  // Supplementary checks on quantities quoted alongside the main results.
  {
    const double u = 1300.0;
    const double i_dc = dc_current(u, cfg.tip, em);
    const double i_pf = photofield_current(u, cfg.tip, cfg.truth.photofield_f_laser, cfg.laser.wavelength_m, em);
    const double pf = photo_fraction(i_pf + i_dc, i_dc);
    add("S1", "photo-emitted fraction at 1300 V", fmt("%.6f", pf), "> 0.98", pf > 0.98);

    for (auto conv : {SpatialConvention::kDiskAverage, SpatialConvention::kOnAxisPeak}) {
      LaserSpec l = cfg.laser;
      l.avg_power_w = 0.6;
      l.spatial_convention = conv;
      const double i = to_w_per_cm2(peak_intensity(l));
      rows.push_back({conv == SpatialConvention::kDiskAverage ? "S2a" : "S2b",
                      "peak intensity at 600 mW (" + describe(conv) + ")", fmt("%.4g W/cm^2", i),
                      "3e10 W/cm^2 quoted", true, true});
    }

    LaserSpec l = cfg.laser;
    l.avg_power_w = 0.6;
    l.enhancement_beta = 5.0;
    const double f = enhanced_tip_field(l, k);
    add("S3", "apex field at 600 mW with enhancement 5", fmt("%.4g V/m", f), "> 1e9 V/m", f > 1e9);

    const double n = mean_electrons_per_pulse(40e-9, 1e9, k);
    add("S4", "40 nA at 1 GHz in electrons per pulse", fmt("%.4g", n), "200 within 30%", rel_err(n, 200.0) <= 0.30);
  }
  return rows;
}

inline bool all_pass(const std::vector<Criterion>& rows) {
  for (const auto& r : rows) {
    if (!r.informational && !r.pass) return false;
  }
  return true;
}

inline std::vector<ResultRow> criterion_rows(const std::vector<Criterion>& rows) {
  std::vector<ResultRow> out;
  for (const auto& c : rows) {
    ResultRow r;
    r.add("id", c.id).add("description", c.description).add("measured", c.measured)
        .add("requirement", c.requirement).add("status", c.status());
    out.push_back(std::move(r));
  }
  return out;
}

inline std::string criterion_table(const std::vector<Criterion>& rows) {
  std::string out;
  char buf[512];
  for (const auto& c : rows) {
    std::snprintf(buf, sizeof buf, "%-4s %-5s %-72s %-34s [%s]\n", c.status().c_str(), c.id.c_str(),
                  c.description.c_str(), c.measured.c_str(), c.requirement.c_str());
    out += buf;
  }
  return out;
}

}  // namespace femtoemit
