#pragma once

#include "gotd/common.hpp"

#include <cstdio>
#include <cstdlib>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace gotd {

/// One traced iterate of a run.
struct TraceRecord {
  int iter = 0;
  double wall_seconds = 0.0;
  double f_value = 0.0;
  double feas_norm = 0.0; // ||h(X_k)||
  double gh_norm = 0.0;
  double gf_norm = 0.0;
  std::optional<double> extra;
};

inline constexpr const char *kTraceHeader =
    "iter,time_s,f,feas_norm,gh_norm,gf_norm,extra";

inline std::string format_scientific(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17e", v);
  return buf;
}

/// Writes the trace as CSV. With `with_timing == false` the time column is
/// written as zero so that repeated runs produce identical bytes.
inline void write_trace_csv(std::ostream &os,
                            const std::vector<TraceRecord> &trace,
                            bool with_timing = true) {
  os << kTraceHeader << '\n';
  for (const TraceRecord &rec : trace) {
    os << rec.iter << ',' << format_scientific(with_timing ? rec.wall_seconds : 0.0)
       << ',' << format_scientific(rec.f_value) << ','
       << format_scientific(rec.feas_norm) << ','
       << format_scientific(rec.gh_norm) << ','
       << format_scientific(rec.gf_norm) << ',';
    if (rec.extra) {
      os << format_scientific(*rec.extra);
    }
    os << '\n';
  }
}

namespace detail {

// std::stod rejects subnormals, which a trace may legitimately contain.
inline double parse_double(const std::string &field) {
  char *end = nullptr;
  const double v = std::strtod(field.c_str(), &end);
  if (field.empty() || end != field.c_str() + field.size()) {
    throw Error(ErrorKind::UsageError, "read_trace_csv: bad number '" + field + "'");
  }
  return v;
}

} // namespace detail

inline std::vector<TraceRecord> read_trace_csv(std::istream &is) {
  std::string line;
  if (!std::getline(is, line) || line != kTraceHeader) {
    throw Error(ErrorKind::UsageError, "read_trace_csv: missing header");
  }
  std::vector<TraceRecord> out;
  while (std::getline(is, line)) {
    if (line.empty()) {
      continue;
    }
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) {
      fields.push_back(field);
    }
    if (fields.size() == 6) {
      fields.emplace_back(); // empty trailing extra column
    }
    if (fields.size() != 7) {
      throw Error(ErrorKind::UsageError, "read_trace_csv: bad row: " + line);
    }
    TraceRecord rec;
    rec.iter = std::stoi(fields[0]);
    rec.wall_seconds = detail::parse_double(fields[1]);
    rec.f_value = detail::parse_double(fields[2]);
    rec.feas_norm = detail::parse_double(fields[3]);
    rec.gh_norm = detail::parse_double(fields[4]);
    rec.gf_norm = detail::parse_double(fields[5]);
    if (!fields[6].empty()) {
      rec.extra = detail::parse_double(fields[6]);
    }
    out.push_back(rec);
  }
  return out;
}

} // namespace gotd
