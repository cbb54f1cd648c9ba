#pragma once

// Comma-separated tables: header row required, '#' comment lines and blank
// lines skipped, LF line endings on output.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <fstream>
#include <istream>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <variant>
#include <vector>

#include "femtoemit/dataset.hpp"
#include "femtoemit/errors.hpp"

namespace femtoemit {

// ---------------------------------------------------------------------------
// Number formatting
// ---------------------------------------------------------------------------

/// Result tables: scientific notation, 12 significant digits.
inline std::string format_result(double v) {
  if (!std::isfinite(v)) return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.11e", v);
  return buf;
}

/// Data files: shortest representation that parses back to the same double.
inline std::string format_exact(double v) {
  if (!std::isfinite(v)) return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

/// Strict parse: the whole (trimmed) cell must be a number.
inline std::optional<double> parse_number(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

// ---------------------------------------------------------------------------
// Raw tables
// ---------------------------------------------------------------------------

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;  // 1-based source line of each row

  std::optional<std::size_t> column(std::string_view name) const {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) return std::nullopt;
    return static_cast<std::size_t>(it - header.begin());
  }
};

namespace detail {

inline std::string trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return std::string(s);
}

inline std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    out.push_back(trim(line.substr(start, pos == std::string_view::npos ? line.npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

}  // namespace detail

inline CsvTable read_csv(std::istream& in) {
  CsvTable t;
  std::string line;
  std::size_t lineno = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    const auto trimmed = detail::trim(line);
    if (trimmed.empty() || trimmed.front() == '#') continue;
    auto cells = detail::split_csv_line(trimmed);
    if (!have_header) {
      t.header = std::move(cells);
      have_header = true;
      continue;
    }
    if (cells.size() != t.header.size()) {
      throw DataError("csv line " + std::to_string(lineno) + ": expected " +
                          std::to_string(t.header.size()) + " cells, found " +
                          std::to_string(cells.size()),
                      lineno);
    }
    t.rows.push_back(std::move(cells));
    t.line_numbers.push_back(lineno);
  }
  if (!have_header) throw DataError("csv: missing header row");
  return t;
}

inline CsvTable read_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  return read_csv(in);
}

// ---------------------------------------------------------------------------
// Result rows
// ---------------------------------------------------------------------------

using ResultValue = std::variant<double, std::string>;

/// Flat record; keys carry units, e.g. "radius_m".
struct ResultRow {
  std::vector<std::pair<std::string, ResultValue>> fields;

  ResultRow& add(std::string key, double v) {
    fields.emplace_back(std::move(key), v);
    return *this;
  }
  ResultRow& add(std::string key, std::string v) {
    fields.emplace_back(std::move(key), std::move(v));
    return *this;
  }
  ResultRow& add(std::string key, const char* v) { return add(std::move(key), std::string(v)); }

  const ResultValue& at(std::string_view key) const {
    for (const auto& [k, v] : fields) {
      if (k == key) return v;
    }
    throw DataError("ResultRow: no field " + std::string(key));
  }
  double number(std::string_view key) const { return std::get<double>(at(key)); }

  friend bool operator==(const ResultRow&, const ResultRow&) = default;
};

namespace detail {

inline std::string format_cell(const ResultValue& v) {
  if (const auto* d = std::get_if<double>(&v)) return format_result(*d);
  const auto& s = std::get<std::string>(v);
  if (s.find_first_of(",\n\r") != std::string::npos) {
    throw DataError("ResultRow: string cell contains a separator: " + s);
  }
  return s;
}

}  // namespace detail

inline void write_result_rows(std::ostream& out, const std::vector<ResultRow>& rows) {
  if (rows.empty()) return;
  const auto& first = rows.front().fields;
  for (std::size_t i = 0; i < first.size(); ++i) out << (i ? "," : "") << first[i].first;
  out << '\n';
  for (const auto& row : rows) {
    if (row.fields.size() != first.size()) throw DataError("write_result_rows: ragged rows");
    for (std::size_t i = 0; i < row.fields.size(); ++i) {
      if (row.fields[i].first != first[i].first) throw DataError("write_result_rows: key mismatch");
      out << (i ? "," : "") << detail::format_cell(row.fields[i].second);
    }
    out << '\n';
  }
}

inline std::string result_rows_to_string(const std::vector<ResultRow>& rows) {
  std::ostringstream os;
  write_result_rows(os, rows);
  return os.str();
}

inline std::vector<ResultRow> read_result_rows(std::istream& in) {
  const auto t = read_csv(in);
  std::vector<ResultRow> rows;
  rows.reserve(t.rows.size());
  for (const auto& cells : t.rows) {
    ResultRow r;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      const auto& c = cells[i];
      std::optional<double> v = parse_number(c);
      if (!v && (c == "nan" || c == "inf" || c == "-inf")) {
        v = c == "nan" ? std::nan("") : (c == "inf" ? HUGE_VAL : -HUGE_VAL);
      }
      if (v) {
        r.add(t.header[i], *v);
      } else {
        r.add(t.header[i], c);
      }
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Sweep datasets
// ---------------------------------------------------------------------------

/// Read an I-V (voltage_V) or polarization (theta_rad / theta_deg) sweep
/// with current_A and optional sigma_A columns. Errors name the file line.
inline SweepDataset read_sweep(std::istream& in, SweepKind kind) {
  const auto t = read_csv(in);
  std::optional<std::size_t> xcol;
  double xscale = 1.0;
  if (kind == SweepKind::kIv) {
    xcol = t.column("voltage_V");
    if (!xcol) throw DataError("sweep csv: missing column voltage_V");
  } else {
    xcol = t.column("theta_rad");
    if (!xcol) {
      xcol = t.column("theta_deg");
      xscale = std::numbers::pi / 180.0;
    }
    if (!xcol) throw DataError("sweep csv: missing column theta_rad or theta_deg");
  }
  const auto ycol = t.column("current_A");
  if (!ycol) throw DataError("sweep csv: missing column current_A");
  const auto scol = t.column("sigma_A");

  SweepDataset d;
  d.kind = kind;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto line = t.line_numbers[r];
    const auto cell = [&](std::size_t col) {
      const auto v = parse_number(t.rows[r][col]);
      if (!v) {
        throw DataError("sweep csv line " + std::to_string(line) + ": non-numeric cell '" +
                            t.rows[r][col] + "' in column " + t.header[col],
                        line);
      }
      return *v;
    };
    d.x.push_back(cell(*xcol) * xscale);
    d.y.push_back(cell(*ycol));
    if (scol) d.sigma_y.push_back(cell(*scol));
    d.source_rows.push_back(line);
  }
  d.validate();
  return d;
}

inline SweepDataset ingest_sweep_csv(const std::string& path, SweepKind kind) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  return read_sweep(in, kind);
}

/// Exact (round-trip) serialization of a sweep.
inline void write_sweep(std::ostream& out, const SweepDataset& d) {
  out << (d.kind == SweepKind::kIv ? "voltage_V" : "theta_rad") << ",current_A";
  if (d.has_sigma()) out << ",sigma_A";
  out << '\n';
  for (std::size_t i = 0; i < d.size(); ++i) {
    out << format_exact(d.x[i]) << ',' << format_exact(d.y[i]);
    if (d.has_sigma()) out << ',' << format_exact(d.sigma_y[i]);
    out << '\n';
  }
}

inline std::string sweep_to_string(const SweepDataset& d) {
  std::ostringstream os;
  write_sweep(os, d);
  return os.str();
}

}  // namespace femtoemit
