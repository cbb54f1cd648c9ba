// femtoemit: simulate, fit and report on tip emission experiments.
//
// Exit status: 0 success, 1 usage error, 2 data or config error,
// 3 numerical error (including non-convergence and a failed report).

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <system_error>

#include "CLI11.hpp"
#include "femtoemit/config.hpp"
#include "femtoemit/csv.hpp"
#include "femtoemit/errors.hpp"
#include "femtoemit/report.hpp"
#include "femtoemit/results.hpp"
#include "femtoemit/synthesize.hpp"

namespace fs = std::filesystem;
using namespace femtoemit;

namespace {

enum Exit : int { kOk = 0, kUsage = 1, kData = 2, kNumerical = 3 };

struct Options {
  std::string config;
  std::string input;
  std::string output;
  std::optional<std::uint64_t> seed;
  std::string model;
  std::optional<double> noise;
};

using Outputs = std::map<std::string, std::string>;  // file name -> contents

// Everything is rendered in memory first; files are written to temporaries
// and renamed into place only after the whole command has succeeded.
void commit(const fs::path& dir, const Outputs& files) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw DataError("cannot create output directory " + dir.string() + ": " + ec.message());
  std::vector<std::pair<fs::path, fs::path>> staged;
  try {
    for (const auto& [name, text] : files) {
      const fs::path final_path = dir / name;
      const fs::path tmp = dir / ("." + name + ".tmp");
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      out << text;
      out.close();
      if (!out) throw DataError("cannot write " + tmp.string());
      staged.emplace_back(tmp, final_path);
    }
  } catch (...) {
    for (const auto& [tmp, _] : staged) fs::remove(tmp, ec);
    throw;
  }
  for (const auto& [tmp, final_path] : staged) {
    fs::rename(tmp, final_path, ec);
    if (ec) throw DataError("cannot move " + tmp.string() + " into place: " + ec.message());
  }
}

RunConfig make_config(const Options& o) {
  RunConfig cfg = o.config.empty() ? RunConfig{} : load_config(o.config);
  if (o.seed) cfg.seed = *o.seed;
  if (!o.output.empty()) cfg.output_dir = o.output;
  cfg.validate();
  return cfg;
}

std::string require_input(const Options& o) {
  if (o.input.empty()) throw UsageError("--input is required");
  return o.input;
}

void require_model_kind(const std::string& model, SweepKind kind) {
  if (kind_of_model(model) != kind) {
    throw UsageError("model " + model + " does not apply to " + to_string(kind) + " data");
  }
}

Outputs simulate(const Options& o, const RunConfig& cfg, SweepKind kind, const std::string& prefix) {
  const std::string model = o.model.empty() ? (kind == SweepKind::kIv ? "dc-fn" : "cos2") : o.model;
  require_model_kind(model, kind);
  const double noise = o.noise.value_or(kind == SweepKind::kIv ? cfg.truth.noise_rel : cfg.truth.pol_noise_rel);
  const auto data = synthesize_dataset(cfg, model, {}, noise, cfg.seed);
  std::cout << "simulated " << data.size() << " points of " << model << " (noise " << noise << ", seed "
            << cfg.seed << ")\n";
  return {{prefix + "_" + model + ".csv", sweep_to_string(data)}};
}

Outputs fit(const Options& o, const RunConfig& cfg, SweepKind kind) {
  const std::string model = o.model.empty() ? (kind == SweepKind::kIv ? "dc-fn" : "cos2") : o.model;
  require_model_kind(model, kind);
  const auto data = ingest_sweep_csv(require_input(o), kind);
  const auto r = run_fit(cfg, model, data);
  const auto summary = fit_summary(r, data);
  std::cout << summary;
  if (!r.converged) throw NumericalError("fit " + model + " did not converge");
  const std::string stem = "fit_" + model;
  return {{stem + ".csv", result_rows_to_string(fit_parameter_rows(r, cfg))},
          {stem + "_stats.csv", result_rows_to_string(fit_stats_rows(r))},
          {stem + "_curve.csv", result_rows_to_string(fit_curve_rows(data, r))},
          {stem + "_summary.txt", summary}};
}

PulseTrainRecord pulse_train_from(const Options& o, const RunConfig& cfg) {
  if (o.input.empty()) return detail::desk_pulse_train(cfg);
  std::ifstream in(o.input);
  if (!in) throw DataError("cannot open " + o.input);
  return read_pulse_train(in, cfg.pulse.rep_rate_hz, cfg.seed);
}

Outputs pulse_train(const RunConfig& cfg) {
  const auto rec = detail::desk_pulse_train(cfg);
  double total = 0.0;
  for (auto c : rec.counts) total += c;
  std::cout << "sampled " << rec.size() << " pulses at " << cfg.pulse.rep_rate_hz << " Hz, mean "
            << total / static_cast<double>(rec.size()) << " electrons per pulse (seed " << cfg.seed << ")\n";
  return {{"pulse_train.csv", result_rows_to_string(pulse_train_rows(rec))}};
}

Outputs spectrum(const Options& o, const RunConfig& cfg) {
  const auto rec = pulse_train_from(o, cfg);
  const auto s = periodogram(rec, detail::desk_bin(cfg), cfg.pulse.spectral_window, cfg.constants);
  const auto sum = summarize_spectrum(rec, s);
  std::printf("carrier %.6g Hz  RBW %.6g Hz  -3 dBc width %.6g Hz  SNR %.2f dB\n", sum.carrier_hz,
              sum.resolution_bw_hz, sum.width_3db_hz, sum.snr_db);
  return {{"spectrum.csv", result_rows_to_string(spectrum_rows(s, 50))},
          {"spectrum_summary.csv", result_rows_to_string(spectrum_summary_rows(sum))}};
}

Outputs metrics(const RunConfig& cfg) {
  const auto m = metrics_rows(cfg);
  const auto l = laser_rows(cfg);
  std::printf("I_inst %.6g uA  J %.6g kA/cm^2  brightness %.6g A/(m^2 sr)\n", m[0].number("i_inst_uA"),
              m[0].number("j_inst_kA_per_cm2"), m[0].number("brightness_A_per_m2_sr"));
  std::printf("focus %.4g fs  peak intensity %.4g W/cm^2  apex field %.4g V/m\n",
              l[0].number("focus_duration_s") * 1e15, l[0].number("peak_intensity_W_per_cm2"),
              l[0].number("tip_field_V_per_m"));
  return {{"metrics.csv", result_rows_to_string(m)}, {"laser.csv", result_rows_to_string(l)}};
}

Outputs paper_report(const RunConfig& cfg, bool& all_ok) {
  const auto rows = evaluate_acceptance(cfg);
  const auto table = criterion_table(rows);
  std::cout << table;
  all_ok = all_pass(rows);
  std::cout << (all_ok ? "all criteria pass\n" : "some criteria FAIL\n");
  Outputs out{{"report.csv", result_rows_to_string(criterion_rows(rows))}, {"report.txt", table}};
  // The reproduction pipelines behind the figures, as plot-ready tables.
  for (const auto& [name, text] : pipeline_outputs(cfg)) out[name + ".csv"] = text;
  return out;
}

void add_common(CLI::App* sub, Options& o, bool input, bool model, bool noise) {
  sub->add_option("--config", o.config, "run configuration file (key = value)");
  sub->add_option("--output", o.output, "output directory (default: output_dir from the config)");
  sub->add_option("--seed", o.seed, "random seed override");
  if (input) sub->add_option("--input", o.input, "input CSV");
  if (model) sub->add_option("--model", o.model, "model: dc-fn, photofield, cos2 or ofe");
  if (noise) sub->add_option("--noise", o.noise, "relative gaussian noise")->check(CLI::NonNegativeNumber);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tip photoemission toolkit: simulate, fit and report"};
  app.require_subcommand(1);
  Options o;
  auto* sim_iv = app.add_subcommand("simulate-iv", "synthesize an I-V sweep (dc-fn or photofield)");
  auto* sim_pol = app.add_subcommand("simulate-polarization", "synthesize a polarization scan (cos2 or ofe)");
  auto* fit_iv = app.add_subcommand("fit-iv", "fit an I-V sweep CSV (dc-fn or photofield)");
  auto* fit_pol = app.add_subcommand("fit-polarization", "fit a polarization scan CSV (cos2 or ofe)");
  auto* train = app.add_subcommand("pulse-train", "sample a Poisson electron-per-pulse record");
  auto* spec = app.add_subcommand("spectrum", "power spectrum of a pulse train (sampled or --input)");
  auto* met = app.add_subcommand("metrics", "current density and brightness estimates");
  auto* report = app.add_subcommand("paper-report", "run every reproduction check and print a table");
  add_common(sim_iv, o, false, true, true);
  add_common(sim_pol, o, false, true, true);
  add_common(fit_iv, o, true, true, false);
  add_common(fit_pol, o, true, true, false);
  add_common(train, o, false, false, false);
  add_common(spec, o, true, false, false);
  add_common(met, o, false, false, false);
  add_common(report, o, false, false, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << app.help();
    return kUsage;
  }

  try {
    const auto cfg = make_config(o);
    Outputs out;
    bool report_ok = true;
    if (sim_iv->parsed()) out = simulate(o, cfg, SweepKind::kIv, "iv");
    else if (sim_pol->parsed()) out = simulate(o, cfg, SweepKind::kPolarization, "polarization");
    else if (fit_iv->parsed()) out = fit(o, cfg, SweepKind::kIv);
    else if (fit_pol->parsed()) out = fit(o, cfg, SweepKind::kPolarization);
    else if (train->parsed()) out = pulse_train(cfg);
    else if (spec->parsed()) out = spectrum(o, cfg);
    else if (met->parsed()) out = metrics(cfg);
    else out = paper_report(cfg, report_ok);
    commit(cfg.output_dir, out);
    return report_ok ? kOk : kNumerical;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return kNumerical;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kData;
  } catch (const DomainError& e) {
    std::cerr << "invalid value: " << e.what() << '\n';
    return kData;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid value: " << e.what() << '\n';
    return kData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kNumerical;
  }
}
