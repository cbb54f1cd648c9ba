#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "femtoemit/errors.hpp"

namespace femtoemit {

enum class SweepKind { kIv, kPolarization };

inline const char* to_string(SweepKind k) { return k == SweepKind::kIv ? "iv" : "polarization"; }

/// Ordered (x, y, sigma_y) samples. x is bias voltage in V for I-V sweeps
/// and polarization angle in rad for theta scans; y is current in A.
struct SweepDataset {
  SweepKind kind = SweepKind::kIv;
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> sigma_y;  // empty when no uncertainties are known
  /// Source line of each sample, for error messages. May be empty.
  std::vector<std::size_t> source_rows;

  std::size_t size() const { return x.size(); }
  bool empty() const { return x.empty(); }
  bool has_sigma() const { return !sigma_y.empty(); }

  std::size_t row_of(std::size_t i) const { return i < source_rows.size() ? source_rows[i] : i; }

  void validate() const {
    if (y.size() != x.size()) throw DataError("dataset: x and y lengths differ");
    if (has_sigma() && sigma_y.size() != x.size()) throw DataError("dataset: sigma length differs");
    for (std::size_t i = 0; i < size(); ++i) {
      if (!std::isfinite(x[i]) || !std::isfinite(y[i])) {
        throw DataError("dataset: non-finite value at row " + std::to_string(row_of(i)), row_of(i));
      }
      if (y[i] < 0.0) {
        throw DataError("dataset: negative current at row " + std::to_string(row_of(i)), row_of(i));
      }
      if (has_sigma() && !(sigma_y[i] > 0.0)) {
        throw DataError("dataset: sigma must be > 0 at row " + std::to_string(row_of(i)), row_of(i));
      }
    }
    if (kind == SweepKind::kIv && size() > 1) {
      const bool up = x[1] > x[0];
      for (std::size_t i = 1; i < size(); ++i) {
        if (up ? !(x[i] > x[i - 1]) : !(x[i] < x[i - 1])) {
          throw DataError("dataset: voltages not strictly monotone at row " +
                              std::to_string(row_of(i)),
                          row_of(i));
        }
      }
    }
  }
};

/// One point of a Fowler-Nordheim plot: (1/U, ln(I/U^2)).
struct FnPlotPoint {
  double inv_voltage = 0.0;
  double log_current_over_v2 = 0.0;
};

inline std::vector<FnPlotPoint> fn_linearize(const SweepDataset& data) {
  if (data.kind != SweepKind::kIv) throw DataError("fn_linearize: needs an I-V sweep");
  if (data.empty()) throw DataError("fn_linearize: empty dataset");
  std::vector<FnPlotPoint> out;
  out.reserve(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double u = std::abs(data.x[i]);
    if (!(data.y[i] > 0.0)) {
      throw DataError("fn_linearize: current must be > 0 at row " + std::to_string(data.row_of(i)),
                      data.row_of(i));
    }
    if (!(u > 0.0)) {
      throw DataError("fn_linearize: voltage must be nonzero at row " +
                          std::to_string(data.row_of(i)),
                      data.row_of(i));
    }
    out.push_back({1.0 / u, std::log(data.y[i] / (u * u))});
  }
  return out;
}

/// Ordinary least-squares line through (x, y).
struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

inline LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  const auto n = static_cast<double>(x.size());
  if (x.size() < 2 || y.size() != x.size()) throw DataError("fit_line: need >= 2 paired points");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw DataError("fit_line: abscissae are all equal");
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r_squared = syy > 0.0 ? sxy * sxy / (sxx * syy) : 1.0;
  return f;
}

inline LineFit fit_line(const std::vector<FnPlotPoint>& pts) {
  std::vector<double> x, y;
  x.reserve(pts.size());
  y.reserve(pts.size());
  for (const auto& p : pts) {
    x.push_back(p.inv_voltage);
    y.push_back(p.log_current_over_v2);
  }
  return fit_line(x, y);
}

}  // namespace femtoemit
