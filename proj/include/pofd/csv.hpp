#ifndef POFD_CSV_HPP
#define POFD_CSV_HPP

// CSV exchange format for samples:
//
//   t,<t_1>,...,<t_p>
//   curve_1,v_11,...,v_1p
//   ...
//
// Empty cells are missing values. Numbers are written in shortest
// round-trip form, so write/read reproduces values bit-exactly.

#include <charconv>
#include <cstddef>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "pofd/core.hpp"

namespace pofd::csv {

inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline double parse_double(std::string_view s, std::size_t line) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
    throw ParseError("invalid number '" + std::string(s) + "'", line);
  return v;
}

inline void write_sample(std::ostream& os, const FunctionalSample& sample) {
  os << 't';
  for (double t : sample.grid().points()) os << ',' << format_double(t);
  os << '\n';
  for (std::size_t i = 0; i < sample.n(); ++i) {
    os << "curve_" << (i + 1);
    for (std::size_t j = 0; j < sample.p(); ++j) {
      os << ',';
      if (sample.observed(i, j)) os << format_double(sample.value(i, j));
    }
    os << '\n';
  }
}

inline FunctionalSample read_sample(std::istream& is) {
  std::string line;
  std::size_t lineno = 0;
  std::vector<double> grid;
  std::vector<std::vector<double>> rows;
  std::vector<std::vector<bool>> observed;
  while (std::getline(is, line)) {
    ++lineno;
    const std::string_view view = trim(line);
    if (view.empty()) continue;
    const auto fields = split(view);
    if (grid.empty()) {
      if (trim(fields[0]) != "t") throw ParseError("header must start with 't'", lineno);
      if (fields.size() < 4) throw ParseError("header needs at least 3 grid points", lineno);
      for (std::size_t k = 1; k < fields.size(); ++k) grid.push_back(parse_double(fields[k], lineno));
      continue;
    }
    if (fields.size() != grid.size() + 1)
      throw ParseError("expected " + std::to_string(grid.size() + 1) + " fields, got " +
                       std::to_string(fields.size()), lineno);
    if (trim(fields[0]).empty()) throw ParseError("missing curve label", lineno);
    std::vector<double> v(grid.size(), kMissing);
    std::vector<bool> o(grid.size(), false);
    bool any = false;
    for (std::size_t k = 1; k < fields.size(); ++k) {
      if (trim(fields[k]).empty()) continue;
      v[k - 1] = parse_double(fields[k], lineno);
      o[k - 1] = true;
      any = true;
    }
    if (!any) throw ParseError("curve has no observed value", lineno);
    rows.push_back(std::move(v));
    observed.push_back(std::move(o));
  }
  if (grid.empty()) throw ParseError("empty input", lineno);
  if (rows.empty()) throw ParseError("no curves after the header", lineno);

  Grid g = [&] {
    try {
      return Grid(grid);
    } catch (const ArgumentError& e) {
      throw ParseError(std::string("invalid grid: ") + e.what(), 1);
    }
  }();
  const auto n = static_cast<Eigen::Index>(rows.size()), p = static_cast<Eigen::Index>(grid.size());
  Matrix values(n, p);
  Mask mask(n, p);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < p; ++j) {
      values(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
      mask(i, j) = observed[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }
  return FunctionalSample(std::move(g), std::move(values), std::move(mask));
}

/// Sidecar `i,d_i,xi_1,...,xi_J` for simulated draws.
inline void write_coefficients(std::ostream& os, const Vector& d, const Matrix& xi) {
  os << "i,d_i";
  for (Eigen::Index j = 0; j < xi.cols(); ++j) os << ",xi_" << (j + 1);
  os << '\n';
  for (Eigen::Index i = 0; i < xi.rows(); ++i) {
    os << (i + 1) << ',' << format_double(d(i));
    for (Eigen::Index j = 0; j < xi.cols(); ++j) os << ',' << format_double(xi(i, j));
    os << '\n';
  }
}

/// Grid-indexed estimate: `j,t,value` (empty value where undefined).
inline void write_curve(std::ostream& os, const Grid& g, const Vector& v, std::string_view name) {
  os << "j,t," << name << '\n';
  for (std::size_t j = 0; j < g.size(); ++j) {
    const double x = v(static_cast<Eigen::Index>(j));
    os << (j + 1) << ',' << format_double(g[j]) << ',';
    if (is_defined(x)) os << format_double(x);
    os << '\n';
  }
}

/// Matrix with the grid as header row and first column.
inline void write_surface(std::ostream& os, const Grid& g, const Matrix& m) {
  os << "s\\t";
  for (double t : g.points()) os << ',' << format_double(t);
  os << '\n';
  for (std::size_t r = 0; r < g.size(); ++r) {
    os << format_double(g[r]);
    for (std::size_t c = 0; c < g.size(); ++c) {
      const double x = m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
      os << ',';
      if (is_defined(x)) os << format_double(x);
    }
    os << '\n';
  }
}

}  // namespace pofd::csv

#endif  // POFD_CSV_HPP
