#pragma once

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "distrep/cohort.hpp"
#include "distrep/curve.hpp"
#include "distrep/errors.hpp"

namespace distrep {

// Wake window on local clock time, half-open [start, end) in minutes of day.
struct EpochWindow {
  int start_minute = 480;   // 08:00
  int end_minute = 1200;    // 20:00
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur += ch;
    }
  }
  fields.push_back(cur);
  return fields;
}

// ISO-8601 local date-time, minute resolution; seconds tolerated and ignored.
inline int parse_minute_of_day(const std::string& ts, std::size_t line_no) {
  int y = 0, mo = 0, d = 0, h = 0, mi = 0, s = 0;
  char sep = 0;
  const int got = std::sscanf(ts.c_str(), "%4d-%2d-%2d%c%2d:%2d:%2d", &y, &mo, &d, &sep, &h, &mi, &s);
  if (got < 6 || (sep != 'T' && sep != ' '))
    throw data_error("line " + std::to_string(line_no) + ": unknown timestamp format '" + ts + "'");
  if (mo < 1 || mo > 12 || d < 1 || d > 31 || h < 0 || h > 23 || mi < 0 || mi > 59)
    throw data_error("line " + std::to_string(line_no) + ": invalid timestamp '" + ts + "'");
  return h * 60 + mi;
}

// shortest %g form that parses back to the identical double
inline std::string format_double(double v) {
  char buf[40];
  for (int precision : {15, 16, 17}) {
    std::snprintf(buf, sizeof(buf), "%.*g", precision, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

inline double parse_nonneg_real(const std::string& text, std::size_t line_no,
                                const char* what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    throw data_error("line " + std::to_string(line_no) + ": malformed " + what + " '" + text + "'");
  }
  if (used != text.size() || !std::isfinite(v))
    throw data_error("line " + std::to_string(line_no) + ": malformed " + what + " '" + text + "'");
  if (v < 0.0)
    throw data_error("line " + std::to_string(line_no) + ": negative " + what);
  return v;
}

}  // namespace detail

// Reads subject_id,timestamp,count rows, keeping epochs inside the window.
// Values concatenate across days in file order; subjects come out sorted.
inline std::map<std::string, std::vector<double>> load_epochs(const std::string& path,
                                                              const EpochWindow& window = {}) {
  std::ifstream in(path);
  if (!in) throw data_error("cannot open epochs file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw data_error("empty epochs file: " + path);
  {
    const auto header = detail::split_csv_line(line);
    if (header.size() != 3 || header[0] != "subject_id" || header[1] != "timestamp" ||
        header[2] != "count")
      throw data_error("epochs file must start with header subject_id,timestamp,count");
  }
  std::map<std::string, std::vector<double>> out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = detail::split_csv_line(line);
    if (fields.size() != 3)
      throw data_error("line " + std::to_string(line_no) + ": expected 3 fields, got " +
                       std::to_string(fields.size()));
    if (fields[0].empty())
      throw data_error("line " + std::to_string(line_no) + ": empty subject_id");
    const int minute = detail::parse_minute_of_day(fields[1], line_no);
    const double count = detail::parse_nonneg_real(fields[2], line_no, "count");
    if (minute >= window.start_minute && minute < window.end_minute)
      out[fields[0]].push_back(count);
  }
  return out;
}

// subject_id,edss rows; EDSS on the half-point grid in [0, 10].
inline std::map<std::string, double> load_outcomes(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw data_error("cannot open outcomes file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw data_error("empty outcomes file: " + path);
  {
    const auto header = detail::split_csv_line(line);
    if (header.size() != 2 || header[0] != "subject_id" || header[1] != "edss")
      throw data_error("outcomes file must start with header subject_id,edss");
  }
  std::map<std::string, double> out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = detail::split_csv_line(line);
    if (fields.size() != 2)
      throw data_error("line " + std::to_string(line_no) + ": expected 2 fields");
    const double edss = detail::parse_nonneg_real(fields[1], line_no, "edss");
    if (edss > 10.0 || std::fabs(edss * 2.0 - std::round(edss * 2.0)) > 1e-9)
      throw data_error("line " + std::to_string(line_no) +
                       ": edss must sit on the half-point grid in [0, 10]");
    if (!out.emplace(fields[0], edss).second)
      throw data_error("line " + std::to_string(line_no) + ": duplicate subject_id '" +
                       fields[0] + "' in outcomes");
  }
  return out;
}

// Inner join; the binary group is 1 for EDSS >= 4. Subjects below the
// minimum epoch count are dropped with a warning.
inline std::vector<SubjectSample> join_outcomes(
    const std::map<std::string, std::vector<double>>& epochs,
    const std::map<std::string, double>& outcomes, std::size_t min_epochs = 60,
    std::ostream* warn = &std::cerr) {
  std::vector<SubjectSample> out;
  for (const auto& [id, values] : epochs) {
    const auto it = outcomes.find(id);
    if (it == outcomes.end()) {
      if (warn) *warn << "warning: subject " << id << " has no outcome, excluded\n";
      continue;
    }
    if (values.size() < min_epochs) {
      if (warn)
        *warn << "warning: subject " << id << " has " << values.size()
              << " epochs (< " << min_epochs << "), dropped\n";
      continue;
    }
    SubjectSample s;
    s.subject_id = id;
    s.values = values;
    s.outcome_continuous = it->second;
    s.outcome_binary = it->second >= 4.0 ? 1 : 0;
    out.push_back(std::move(s));
  }
  if (out.empty()) throw data_error("join_outcomes: empty join");
  return out;
}

// Synthetic epoch writer: wake-window minutes, 720 per day, full precision.
inline void write_epochs_csv(const std::string& path, const std::vector<SubjectSample>& cohort,
                             const EpochWindow& window = {}) {
  std::ofstream out(path);
  if (!out) throw data_error("cannot write epochs file: " + path);
  out << "subject_id,timestamp,count\n";
  const int per_day = window.end_minute - window.start_minute;
  char buf[64];
  for (const auto& s : cohort) {
    for (std::size_t j = 0; j < s.values.size(); ++j) {
      const int day = static_cast<int>(j) / per_day;
      const int minute = window.start_minute + static_cast<int>(j) % per_day;
      std::snprintf(buf, sizeof(buf), "2024-%02d-%02dT%02d:%02d", 1 + day / 28, 1 + day % 28,
                    minute / 60, minute % 60);
      out << s.subject_id << ',' << buf << ',' << detail::format_double(s.values[j]) << '\n';
    }
  }
}

inline void write_outcomes_csv(const std::string& path,
                               const std::vector<std::pair<std::string, double>>& rows) {
  std::ofstream out(path);
  if (!out) throw data_error("cannot write outcomes file: " + path);
  out << "subject_id,edss\n";
  char buf[32];
  for (const auto& [id, edss] : rows) {
    std::snprintf(buf, sizeof(buf), "%.1f", edss);
    out << id << ',' << buf << '\n';
  }
}

// Canonical cached sample form: subject_id,value per row.
inline void write_subject_values_csv(const std::string& path,
                                     const std::vector<SubjectSample>& cohort) {
  std::ofstream out(path);
  if (!out) throw data_error("cannot write subject values file: " + path);
  out << "subject_id,value\n";
  for (const auto& s : cohort)
    for (double v : s.values) out << s.subject_id << ',' << detail::format_double(v) << '\n';
}

// Debug dump for basis/penalty/design matrices.
template <class Matrix>
inline void write_matrix_csv(const std::string& path, const Matrix& m) {
  std::ofstream out(path);
  if (!out) throw data_error("cannot write matrix file: " + path);
  for (long i = 0; i < static_cast<long>(m.rows()); ++i) {
    for (long j = 0; j < static_cast<long>(m.cols()); ++j) {
      if (j) out << ',';
      out << detail::format_double(m(i, j));
    }
    out << '\n';
  }
}

// Long-format curve export: one row per grid point.
inline void write_curves_csv(const std::string& path, const std::vector<std::string>& ids,
                             const std::vector<Curve>& curves) {
  if (ids.size() != curves.size()) throw data_error("write_curves_csv: id/curve mismatch");
  std::ofstream out(path);
  if (!out) throw data_error("cannot write curves file: " + path);
  out << "subject_id,kind,domain,grid,value\n";
  for (std::size_t i = 0; i < curves.size(); ++i) {
    const Curve& c = curves[i];
    for (std::size_t g = 0; g < c.grid.size(); ++g)
      out << ids[i] << ',' << kind_name(c.kind) << ',' << domain_name(c.domain) << ','
          << detail::format_double(c.grid[g]) << ',' << detail::format_double(c.values[g]) << '\n';
  }
}

}  // namespace distrep
