#pragma once

// Electron counting statistics of the pulse train and its power spectrum
// around the repetition rate.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <mutex>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include <fftw3.h>

#include "femtoemit/constants.hpp"
#include "femtoemit/errors.hpp"

namespace femtoemit {

/// Electrons detected in each pulse of a train.
struct PulseTrainRecord {
  std::vector<std::uint32_t> counts;
  double rep_rate_hz = 1e9;
  double window_s = 0.0;
  std::uint64_t seed = 0;

  std::size_t size() const { return counts.size(); }

  void validate() const {
    if (!(rep_rate_hz > 0.0) || !(window_s > 0.0)) {
      throw DomainError("PulseTrainRecord: rep_rate and window must be > 0");
    }
    const auto expect = static_cast<std::size_t>(std::llround(window_s * rep_rate_hz));
    if (counts.size() != expect) {
      throw DataError("PulseTrainRecord: " + std::to_string(counts.size()) +
                      " pulses, expected round(window * rep_rate) = " + std::to_string(expect));
    }
  }
};

/// One-sided power spectrum of the detected current.
struct SpectrumEstimate {
  std::vector<double> freqs;     // Hz, uniform spacing resolution_bw
  std::vector<double> power;     // A^2, one-sided periodogram, sums to mean-square * N
  std::vector<double> power_dbc; // dB relative to the carrier bin
  double resolution_bw = 0.0;    // Hz = 1 / window
  std::size_t carrier_index = 0;
  double carrier_power = 0.0;
};

enum class SpectralWindow { kRectangular, kHann };

inline constexpr std::size_t kMaxPulses = std::size_t{1} << 30;
inline constexpr double kDbFloor = -400.0;

inline double mean_electrons_per_pulse(double i_avg_a, double rep_rate_hz,
                                       const PhysicalConstants& k = kCodata2018) {
  if (!(i_avg_a >= 0.0)) throw DomainError("mean_electrons_per_pulse: current must be >= 0");
  if (!(rep_rate_hz > 0.0)) throw DomainError("mean_electrons_per_pulse: rep_rate must be > 0");
  return i_avg_a / (k.e * rep_rate_hz);
}

/// Independent Poisson counts per pulse from a seeded 64-bit Mersenne
/// Twister owned by this call.
inline PulseTrainRecord sample_pulse_train(double mean, double rep_rate_hz, double window_s,
                                           std::uint64_t seed) {
  if (!(mean >= 0.0) || !std::isfinite(mean)) throw DomainError("sample_pulse_train: mean must be >= 0");
  if (!(rep_rate_hz > 0.0) || !(window_s > 0.0)) {
    throw DomainError("sample_pulse_train: rep_rate and window must be > 0");
  }
  const double n_real = window_s * rep_rate_hz;
  if (!(n_real >= 1.0)) throw DomainError("sample_pulse_train: window * rep_rate must be >= 1");
  if (n_real > static_cast<double>(kMaxPulses)) {
    throw DomainError("sample_pulse_train: " + std::to_string(n_real) + " pulses exceeds limit " +
                      std::to_string(kMaxPulses));
  }
  if (mean > 1e9) throw DomainError("sample_pulse_train: mean exceeds 32-bit counter range");
  PulseTrainRecord rec;
  rec.rep_rate_hz = rep_rate_hz;
  rec.window_s = window_s;
  rec.seed = seed;
  rec.counts.assign(static_cast<std::size_t>(std::llround(n_real)), 0);
  if (mean == 0.0) return rec;
  std::mt19937_64 rng(seed);
  std::poisson_distribution<std::int64_t> dist(mean);
  for (auto& c : rec.counts) c = static_cast<std::uint32_t>(dist(rng));
  return rec;
}

namespace detail {

// FFTW planning is not thread-safe; execution on distinct plans is.
inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

// |X_k|^2 for k = 0..N/2 of a real sequence.
inline std::vector<double> real_power_spectrum(std::vector<double> x) {
  const auto n = x.size();
  const std::size_t nbins = n / 2 + 1;
  auto* out = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * nbins));
  if (out == nullptr) throw NumericalError("periodogram: FFT buffer allocation failed");
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    plan = fftw_plan_dft_r2c_1d(static_cast<int>(n), x.data(), out, FFTW_ESTIMATE);
  }
  if (plan == nullptr) {
    fftw_free(out);
    throw NumericalError("periodogram: FFT planning failed");
  }
  fftw_execute(plan);
  std::vector<double> p(nbins);
  for (std::size_t k = 0; k < nbins; ++k) p[k] = out[k][0] * out[k][0] + out[k][1] * out[k][1];
  {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    fftw_destroy_plan(plan);
  }
  fftw_free(out);
  return p;
}

inline double to_dbc(double p, double carrier) {
  if (!(carrier > 0.0) || !(p > 0.0)) return kDbFloor;
  return std::max(kDbFloor, 10.0 * std::log10(p / carrier));
}

}  // namespace detail

/// Binned current time series of a record: each pulse's charge lands in
/// the bin containing the pulse centre.
inline std::vector<double> binned_current(const PulseTrainRecord& rec, double bin_s,
                                          const PhysicalConstants& k = kCodata2018) {
  const auto n = static_cast<std::size_t>(std::llround(rec.window_s / bin_s));
  std::vector<double> x(n, 0.0);
  const double scale = k.e / bin_s;
  for (std::size_t i = 0; i < rec.counts.size(); ++i) {
    const double t = static_cast<double>(i) / rec.rep_rate_hz;
    auto idx = static_cast<std::size_t>(std::llround(t / bin_s));
    if (idx >= n) idx = n - 1;
    x[idx] += scale * rec.counts[i];
  }
  return x;
}

/// One-sided periodogram of the binned current, normalised so the bin at
/// the repetition rate reads 0 dBc. sum(power) equals sum(x^2) of the
/// (windowed) series.
inline SpectrumEstimate periodogram(const PulseTrainRecord& rec, double bin_s,
                                    SpectralWindow window = SpectralWindow::kRectangular,
                                    const PhysicalConstants& k = kCodata2018) {
  rec.validate();
  if (!(bin_s > 0.0)) throw DomainError("periodogram: bin must be > 0");
  if (bin_s * 2.0 * rec.rep_rate_hz > 1.0 + 1e-9) {
    throw DomainError("periodogram: bin " + std::to_string(bin_s) +
                      " s violates Nyquist for the repetition rate (need <= 1/(2 f_rep))");
  }
  auto x = binned_current(rec, bin_s, k);
  const auto n = x.size();
  if (n < 2) throw DomainError("periodogram: fewer than two time bins");
  if (n > static_cast<std::size_t>(std::numeric_limits<int>::max())) {
    throw DomainError("periodogram: series too long for the FFT backend");
  }
  if (window == SpectralWindow::kHann) {
    for (std::size_t i = 0; i < n; ++i) {
      x[i] *= 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                    static_cast<double>(n)));
    }
  }
  auto mag2 = detail::real_power_spectrum(std::move(x));

  SpectrumEstimate s;
  const double dn = static_cast<double>(n);
  s.resolution_bw = 1.0 / (dn * bin_s);
  s.freqs.resize(mag2.size());
  s.power.resize(mag2.size());
  for (std::size_t kk = 0; kk < mag2.size(); ++kk) {
    s.freqs[kk] = static_cast<double>(kk) * s.resolution_bw;
    const bool doubled = kk != 0 && !(n % 2 == 0 && kk == n / 2);
    s.power[kk] = (doubled ? 2.0 : 1.0) * mag2[kk] / dn;
  }
  s.carrier_index = std::min(static_cast<std::size_t>(std::llround(rec.rep_rate_hz / s.resolution_bw)),
                             s.power.size() - 1);
  s.carrier_power = s.power[s.carrier_index];
  s.power_dbc.resize(s.power.size());
  for (std::size_t kk = 0; kk < s.power.size(); ++kk) {
    s.power_dbc[kk] = detail::to_dbc(s.power[kk], s.carrier_power);
  }
  return s;
}

/// Index of the largest bin with frequency in [f_lo, f_hi].
inline std::size_t find_peak(const SpectrumEstimate& s, double f_lo, double f_hi) {
  std::size_t best = s.power.size();
  for (std::size_t k = 0; k < s.power.size(); ++k) {
    if (s.freqs[k] < f_lo || s.freqs[k] > f_hi) continue;
    if (best == s.power.size() || s.power[k] > s.power[best]) best = k;
  }
  if (best == s.power.size()) throw DomainError("find_peak: no bins in frequency range");
  return best;
}

/// Width of the contiguous run of bins around `index` at or above
/// `level_dbc`, in Hz.
inline double line_width(const SpectrumEstimate& s, std::size_t index, double level_dbc = -3.0) {
  const double ref = s.power_dbc.at(index);
  std::size_t lo = index, hi = index;
  while (lo > 0 && s.power_dbc[lo - 1] - ref >= level_dbc) --lo;
  while (hi + 1 < s.power_dbc.size() && s.power_dbc[hi + 1] - ref >= level_dbc) ++hi;
  return static_cast<double>(hi - lo + 1) * s.resolution_bw;
}

/// Median power of the bins away from DC and from every harmonic of the
/// repetition rate (guard of two bins on each side).
inline double noise_floor(const SpectrumEstimate& s, double rep_rate_hz) {
  std::vector<double> noise;
  noise.reserve(s.power.size());
  const double period_bins = rep_rate_hz / s.resolution_bw;
  for (std::size_t k = 0; k < s.power.size(); ++k) {
    const double harmonic = std::round(static_cast<double>(k) / period_bins);
    if (std::abs(static_cast<double>(k) - harmonic * period_bins) <= 2.0) continue;
    noise.push_back(s.power[k]);
  }
  if (noise.empty()) return 0.0;
  auto mid = noise.begin() + static_cast<std::ptrdiff_t>(noise.size() / 2);
  std::nth_element(noise.begin(), mid, noise.end());
  return *mid;
}

/// Carrier power over the median off-carrier noise floor, in dB. A zero
/// floor is capped 300 dB below the carrier.
inline double snr_at_carrier(const SpectrumEstimate& s, double rep_rate_hz) {
  if (s.freqs.empty() || rep_rate_hz < s.freqs.front() || rep_rate_hz > s.freqs.back()) {
    throw DomainError("snr_at_carrier: repetition rate outside the spectrum");
  }
  const auto idx = static_cast<std::size_t>(std::llround(rep_rate_hz / s.resolution_bw));
  const double carrier = s.power.at(idx);
  if (!(carrier > 0.0)) return kDbFloor;
  const double floor = std::max(noise_floor(s, rep_rate_hz), carrier * 1e-30);
  return 10.0 * std::log10(carrier / floor);
}

/// Fraction of the laser-on current that is photo-emitted.
inline double photo_fraction(double i_laser_on, double i_laser_off) {
  if (!(i_laser_on > 0.0)) throw DomainError("photo_fraction: laser-on current must be > 0");
  if (!(i_laser_off >= 0.0) || i_laser_off > i_laser_on) {
    throw DomainError("photo_fraction: need 0 <= i_off <= i_on");
  }
  return (i_laser_on - i_laser_off) / i_laser_on;
}

}  // namespace femtoemit
