#pragma once

// Sweep and Pareto tables as CSV. Lines starting with '#' carry run metadata
// and are skipped on read.

#include <cstdio>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "qrecover/error.hpp"
#include "qrecover/mc_harness.hpp"

namespace qrecover {

inline constexpr std::string_view kSweepHeader = "r,p,q,ensemble,n_states,fid_mean,fid_std,g_mean,g_std,feasible,seed";
inline constexpr std::string_view kParetoHeader = "fidelity,success,p,q";

inline std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

inline void write_sweep_metadata(std::ostream& out, const SweepSpec& spec) {
  out << "# rng=" << Rng::kAlgorithm << " q_mode=" << to_string(spec.q_mode) << " mode=" << to_string(spec.mode)
      << " count=" << spec.ensemble.count << '\n';
}

inline void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << kSweepHeader << '\n';
  for (const auto& row : rows) {
    out << format_real(row.r) << ',' << format_real(row.p) << ',' << format_real(row.q) << ','
        << to_string(row.ensemble) << ',';
    if (row.feasible) {
      out << row.n_states << ',' << format_real(row.fid_mean) << ',' << format_real(row.fid_std) << ','
          << format_real(row.g_mean) << ',' << format_real(row.g_std) << ",1,";
    } else {
      out << ",,,,,0,";
    }
    out << row.seed << '\n';
  }
}

inline void write_pareto_csv(std::ostream& out, const std::vector<ParetoPoint>& points) {
  out << kParetoHeader << '\n';
  for (const auto& pt : points)
    out << format_real(pt.fidelity) << ',' << format_real(pt.success) << ',' << format_real(pt.p) << ','
        << format_real(pt.q) << '\n';
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

inline double parse_real(const std::string& s, std::size_t line_no) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size())
    throw Error(Errc::Parse, "line " + std::to_string(line_no) + ": bad number '" + s + "'");
  return v;
}

inline std::string strip_cr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

// Column name -> position, from the first non-comment line.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::pair<std::size_t, std::vector<std::string>>> rows;  // (line number, fields)

  std::size_t column(std::string_view name) const {
    for (std::size_t k = 0; k < header.size(); ++k)
      if (header[k] == name) return k;
    throw Error(Errc::Parse, "missing column '" + std::string(name) + "'");
  }
};

inline CsvTable read_csv(std::istream& in) {
  CsvTable t;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip_cr(line);
    if (line.empty() || line.front() == '#') continue;
    auto fields = split_csv_line(line);
    if (t.header.empty()) {
      t.header = std::move(fields);
      continue;
    }
    if (fields.size() != t.header.size())
      throw Error(Errc::Parse, "line " + std::to_string(line_no) + ": expected " + std::to_string(t.header.size()) +
                                   " fields, got " + std::to_string(fields.size()));
    t.rows.emplace_back(line_no, std::move(fields));
  }
  if (t.header.empty()) throw Error(Errc::EmptyInput, "CSV has no header");
  return t;
}

}  // namespace detail

inline std::vector<SweepRow> read_sweep_csv(std::istream& in) {
  const auto t = detail::read_csv(in);
  const std::size_t c_r = t.column("r"), c_p = t.column("p"), c_q = t.column("q"), c_e = t.column("ensemble"),
                    c_n = t.column("n_states"), c_fm = t.column("fid_mean"), c_fs = t.column("fid_std"),
                    c_gm = t.column("g_mean"), c_gs = t.column("g_std"), c_f = t.column("feasible"),
                    c_s = t.column("seed");
  std::vector<SweepRow> rows;
  for (const auto& [line_no, f] : t.rows) {
    SweepRow row;
    row.r = detail::parse_real(f[c_r], line_no);
    row.p = detail::parse_real(f[c_p], line_no);
    row.q = detail::parse_real(f[c_q], line_no);
    if (f[c_e] == "pure")
      row.ensemble = EnsembleKind::Pure;
    else if (f[c_e] == "mixed")
      row.ensemble = EnsembleKind::Mixed;
    else
      throw Error(Errc::Parse, "line " + std::to_string(line_no) + ": unknown ensemble '" + f[c_e] + "'");
    row.feasible = f[c_f] == "1";
    if (!row.feasible && f[c_f] != "0")
      throw Error(Errc::Parse, "line " + std::to_string(line_no) + ": feasible must be 0 or 1");
    row.seed = std::stoull(f[c_s]);
    if (row.feasible) {
      row.n_states = static_cast<std::size_t>(detail::parse_real(f[c_n], line_no));
      row.fid_mean = detail::parse_real(f[c_fm], line_no);
      row.fid_std = detail::parse_real(f[c_fs], line_no);
      row.g_mean = detail::parse_real(f[c_gm], line_no);
      row.g_std = detail::parse_real(f[c_gs], line_no);
    }
    rows.push_back(row);
  }
  return rows;
}

// Generic numeric columns for plotting; empty cells become NaN.
struct NumericTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> columns;

  const std::vector<double>& column(std::string_view name) const {
    for (std::size_t k = 0; k < header.size(); ++k)
      if (header[k] == name) return columns[k];
    throw Error(Errc::InvalidArgument, "no column '" + std::string(name) + "'");
  }
};

inline NumericTable read_numeric_csv(std::istream& in) {
  const auto t = detail::read_csv(in);
  NumericTable out;
  out.header = t.header;
  out.columns.resize(t.header.size());
  for (const auto& [line_no, f] : t.rows) {
    for (std::size_t k = 0; k < f.size(); ++k) {
      double v = std::numeric_limits<double>::quiet_NaN();
      if (!f[k].empty()) {
        char* end = nullptr;
        const double parsed = std::strtod(f[k].c_str(), &end);
        if (end == f[k].c_str() + f[k].size()) v = parsed;
      }
      out.columns[k].push_back(v);
    }
  }
  return out;
}

}  // namespace qrecover
