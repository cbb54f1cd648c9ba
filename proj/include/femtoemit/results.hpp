#pragma once

// Fit dispatch by model id and conversion of results into flat rows for
// the CSV writer. Shared by the command-line tool and the report.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <numbers>
#include <sstream>
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
#include "femtoemit/pulse_stats.hpp"

namespace femtoemit {

inline SweepKind kind_of_model(const std::string& id) {
  if (id == model_id::kDcFn || id == model_id::kPhotofield) return SweepKind::kIv;
  if (id == model_id::kCos2 || id == model_id::kOfe) return SweepKind::kPolarization;
  throw UsageError("unknown model '" + id + "' (expected dc-fn, photofield, cos2 or ofe)");
}

/// Run the fit registered under `id` with settings from the configuration.
/// The photofield fit uses the configured tip geometry; the OFE fit uses
/// truth.ofe_f_dc as the known DC field.
inline FitResult run_fit(const RunConfig& cfg, const std::string& id, const SweepDataset& data) {
  const auto kind = kind_of_model(id);
  if (data.kind != kind) throw DataError("model " + id + " needs a " + to_string(kind) + " dataset");
  const auto em = cfg.emission();
  if (id == model_id::kDcFn) {
    DcFitOptions opt;
    opt.emission = em;
    opt.lsq = cfg.fit;
    return fit_dc_fn(data, cfg.tip.work_function_ev, cfg.tip.field_factor_k, opt);
  }
  if (id == model_id::kPhotofield) {
    const double phi_eff = photofield_phi_eff(cfg.tip.work_function_ev, cfg.laser.wavelength_m, cfg.constants);
    return fit_photofield(data, cfg.tip, phi_eff, em, cfg.fit);
  }
  if (id == model_id::kCos2) return fit_cos2_background(data, cfg.fit);
  OfeFitOptions opt;
  opt.nominal_phi_ev = cfg.tip.work_function_ev;
  opt.lsq = cfg.fit;
  return fit_ofe_polarization(data, cfg.truth.ofe_f_dc, opt);
}

inline std::string param_unit(const std::string& name) {
  static const std::map<std::string, std::string> units = {
      {"r", "m"}, {"R", "m"},       {"f_laser", "V/m"}, {"A", "A"},
      {"B", "A"}, {"theta0", "rad"}, {"g", "A/V^2"},    {"h", "V/m"},
  };
  const auto it = units.find(name);
  return it == units.end() ? "1" : it->second;
}

/// One row per fitted parameter: value and 1-sigma.
inline std::vector<ResultRow> fit_parameter_rows(const FitResult& r, const RunConfig& cfg) {
  std::vector<ResultRow> rows;
  for (std::size_t i = 0; i < r.params.size(); ++i) {
    ResultRow row;
    row.add("model", r.model_id)
        .add("parameter", r.param_names[i])
        .add("unit", param_unit(r.param_names[i]))
        .add("value", r.params[i])
        .add("sigma", r.sigma(r.param_names[i]));
    rows.push_back(std::move(row));
  }
  if (r.model_id == model_id::kOfe) {
    const double f_dc = cfg.truth.ofe_f_dc;
    ResultRow row;
    row.add("model", r.model_id)
        .add("parameter", "f_laser_over_f_dc")
        .add("unit", "1")
        .add("value", r.param("f_laser") / f_dc)
        .add("sigma", r.sigma("f_laser") / f_dc);
    rows.push_back(std::move(row));
  }
  return rows;
}

inline std::vector<ResultRow> fit_stats_rows(const FitResult& r) {
  ResultRow row;
  row.add("model", r.model_id)
      .add("converged", r.converged ? "yes" : "no")
      .add("iterations", static_cast<double>(r.n_iterations))
      .add("cost", r.cost)
      .add("chi2_reduced", r.chi2_reduced)
      .add("gradient_cosine", r.gradient_norm);
  return {row};
}

/// Data and every model curve at the data abscissae.
inline std::vector<ResultRow> fit_curve_rows(const SweepDataset& data, const FitResult& r) {
  std::vector<ResultRow> rows;
  const bool iv = data.kind == SweepKind::kIv;
  for (std::size_t i = 0; i < data.size(); ++i) {
    ResultRow row;
    row.add(iv ? "voltage_V" : "theta_rad", data.x[i]).add("current_A", data.y[i]);
    if (iv) {
      const double u = std::abs(data.x[i]);
      row.add("inv_voltage_per_V", 1.0 / u).add("fn_log_current_over_v2", std::log(data.y[i] / (u * u)));
    }
    for (const auto& [name, values] : r.curves) row.add(name + "_A", values[i]);
    rows.push_back(std::move(row));
  }
  return rows;
}

inline std::string fit_summary(const FitResult& r, const SweepDataset& data) {
  std::ostringstream os;
  os << "model " << r.model_id << " on " << data.size() << " points ("
     << (data.has_sigma() ? "weighted" : "unweighted") << ")\n";
  char buf[160];
  for (std::size_t i = 0; i < r.params.size(); ++i) {
    const auto& n = r.param_names[i];
    std::snprintf(buf, sizeof buf, "  %-8s = %.6e +/- %.2e %s\n", n.c_str(), r.params[i], r.sigma(n),
                  param_unit(n).c_str());
    os << buf;
  }
  std::snprintf(buf, sizeof buf, "  converged %s after %zu iterations, reduced chi2 %.4g\n",
                r.converged ? "yes" : "no", r.n_iterations, r.chi2_reduced);
  os << buf;
  for (const auto& d : r.diagnostics) os << "  note: " << d << '\n';
  return os.str();
}

inline std::vector<ResultRow> pulse_train_rows(const PulseTrainRecord& rec) {
  std::vector<ResultRow> rows;
  rows.reserve(rec.size());
  for (std::size_t i = 0; i < rec.size(); ++i) {
    ResultRow row;
    row.add("pulse_index", static_cast<double>(i))
        .add("time_s", static_cast<double>(i) / rec.rep_rate_hz)
        .add("electrons", static_cast<double>(rec.counts[i]));
    rows.push_back(std::move(row));
  }
  return rows;
}

/// Read a pulse-train table (pulse_index, time_s, electrons) back into a
/// record at the given repetition rate.
inline PulseTrainRecord read_pulse_train(std::istream& in, double rep_rate_hz, std::uint64_t seed = 0) {
  const auto t = read_csv(in);
  const auto col = t.column("electrons");
  if (!col) throw DataError("pulse-train csv: missing column electrons");
  PulseTrainRecord rec;
  rec.rep_rate_hz = rep_rate_hz;
  rec.seed = seed;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto v = parse_number(t.rows[r][*col]);
    if (!v || *v < 0.0 || *v != std::floor(*v) || *v > 4.0e9) {
      throw DataError("pulse-train csv line " + std::to_string(t.line_numbers[r]) +
                          ": electrons must be a nonnegative integer",
                      t.line_numbers[r]);
    }
    rec.counts.push_back(static_cast<std::uint32_t>(*v));
  }
  if (rec.counts.empty()) throw DataError("pulse-train csv: no pulses");
  rec.window_s = static_cast<double>(rec.counts.size()) / rep_rate_hz;
  return rec;
}

/// Spectrum bins within `half_span_bins` of the carrier.
inline std::vector<ResultRow> spectrum_rows(const SpectrumEstimate& s, std::size_t half_span_bins) {
  std::vector<ResultRow> rows;
  const std::size_t lo = s.carrier_index > half_span_bins ? s.carrier_index - half_span_bins : 0;
  const std::size_t hi = std::min(s.power.size() - 1, s.carrier_index + half_span_bins);
  for (std::size_t k = lo; k <= hi; ++k) {
    ResultRow row;
    row.add("frequency_Hz", s.freqs[k]).add("power_A2", s.power[k]).add("power_dBc", s.power_dbc[k]);
    rows.push_back(std::move(row));
  }
  return rows;
}

struct SpectrumSummary {
  double resolution_bw_hz = 0.0;
  double carrier_hz = 0.0;
  double peak_hz = 0.0;
  double width_3db_hz = 0.0;
  double snr_db = 0.0;
  double mean_electrons = 0.0;
};

inline SpectrumSummary summarize_spectrum(const PulseTrainRecord& rec, const SpectrumEstimate& s) {
  SpectrumSummary out;
  out.resolution_bw_hz = s.resolution_bw;
  out.carrier_hz = s.freqs[s.carrier_index];
  const auto peak = find_peak(s, 0.5 * rec.rep_rate_hz, std::min(1.5 * rec.rep_rate_hz, s.freqs.back()));
  out.peak_hz = s.freqs[peak];
  out.width_3db_hz = line_width(s, peak, -3.0);
  out.snr_db = snr_at_carrier(s, rec.rep_rate_hz);
  double total = 0.0;
  for (auto c : rec.counts) total += c;
  out.mean_electrons = total / static_cast<double>(rec.size());
  return out;
}

inline std::vector<ResultRow> spectrum_summary_rows(const SpectrumSummary& s) {
  ResultRow row;
  row.add("resolution_bw_Hz", s.resolution_bw_hz)
      .add("carrier_Hz", s.carrier_hz)
      .add("peak_Hz", s.peak_hz)
      .add("width_3dBc_Hz", s.width_3db_hz)
      .add("snr_dB", s.snr_db)
      .add("mean_electrons", s.mean_electrons);
  return {row};
}

/// Closing source-quality estimates from the metrics settings.
inline std::vector<ResultRow> metrics_rows(const RunConfig& cfg) {
  const auto& m = cfg.metrics;
  const SolidAngleAssumption omega{m.transverse_energy_ev, m.beam_energy_ev};
  const double area = std::numbers::pi * m.emit_radius_m * m.emit_radius_m;
  const auto pm = pulse_metrics(m.n_electrons, m.tau_s, area, omega.solid_angle_sr(), cfg.constants);
  ResultRow row;
  row.add("n_electrons", pm.n_electrons)
      .add("tau_s", pm.tau_s)
      .add("area_m2", pm.area_m2)
      .add("solid_angle_sr", pm.solid_angle_sr)
      .add("i_inst_A", pm.i_inst_a)
      .add("i_inst_uA", to_microamp(pm.i_inst_a))
      .add("electron_rate_per_s", pm.electron_rate_per_s)
      .add("j_inst_A_per_m2", pm.j_inst_a_per_m2)
      .add("j_inst_kA_per_cm2", to_ka_per_cm2(pm.j_inst_a_per_m2))
      .add("brightness_A_per_m2_sr", pm.brightness)
      .add("avg_current_A", m.avg_current_a)
      .add("electrons_per_pulse_from_avg", mean_electrons_per_pulse(m.avg_current_a, cfg.laser.rep_rate_hz, cfg.constants))
      .add("transverse_energy_eV", m.transverse_energy_ev)
      .add("beam_energy_eV", m.beam_energy_ev)
      .add("solid_angle_assumption", "omega = pi E_t / E_beam");
  return {row};
}

/// Laser focus figures under the configured intensity convention.
inline std::vector<ResultRow> laser_rows(const RunConfig& cfg) {
  const auto& l = cfg.laser;
  ResultRow row;
  row.add("pulse_energy_J", pulse_energy(l))
      .add("focus_duration_s", focus_duration(l))
      .add("peak_power_W", peak_power(l))
      .add("peak_intensity_W_per_cm2", to_w_per_cm2(peak_intensity(l)))
      .add("free_space_field_V_per_m", free_space_field(l, cfg.constants))
      .add("tip_field_V_per_m", enhanced_tip_field(l, cfg.constants))
      .add("intensity_convention", describe(l.spatial_convention));
  return {row};
}

}  // namespace femtoemit
