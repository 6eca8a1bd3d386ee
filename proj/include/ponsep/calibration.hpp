#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ponsep/model.hpp"
#include "ponsep/trace_io.hpp"

namespace ponsep {

// Calibration workflow: read fiber-end distances out of field traces,
// compare them with the design lengths branch by branch, and keep the
// calibrated values in a small append-only store.

struct CalibrationRecord {
  std::string code;       // external label, e.g. "PON06UDI"
  int branch = 0;
  double length_km = 0.0;
  std::string timestamp;  // ISO-8601 date
};

// Lengths are compared at the store's precision, 4 decimals in km.
struct CalibrationDiff {
  std::string code;
  double measured_km = 0.0;
  double design_km = 0.0;
  double diff_km = 0.0;  // measured - design
};

inline void validate(const CalibrationRecord& record) {
  if (record.code.empty())
    throw std::invalid_argument("CalibrationRecord: empty code");
  if (!(record.length_km > 0.0))
    throw std::invalid_argument("CalibrationRecord: length must be > 0");
}

namespace detail {

inline double round_4(double v) { return std::round(v * 1e4) / 1e4; }

}  // namespace detail

inline CalibrationDiff compare(const CalibrationRecord& field,
                               const CalibrationRecord& design) {
  validate(field);
  validate(design);
  if (field.code != design.code || field.branch != design.branch)
    throw std::invalid_argument("compare: records refer to different branches (" +
                                field.code + " vs " + design.code + ")");
  return CalibrationDiff{field.code, field.length_km, design.length_km,
                         detail::round_4(field.length_km - design.length_km)};
}

// Fiber-end candidates in a trace: samples whose power jumps at least
// min_rise_db above the extrapolation of a linear fit through the preceding
// baseline window, deduplicated within one event dead zone. Returns the
// distance of the last sample before each jump. An empty result just means
// no event was found.
inline std::vector<double> detect_fiber_end(const Trace& trace,
                                            double splitter_position_km,
                                            double min_rise_db = 10.5,
                                            std::size_t baseline_window = 50,
                                            std::size_t dead_zone_samples = 15) {
  if (baseline_window < 2)
    throw std::invalid_argument("detect_fiber_end: baseline window too small");
  const double step_km = trace.resolution_m() / 1000.0;
  // First sample strictly past the splitter, in this trace's index space.
  const double splitter_frac =
      (splitter_position_km - trace.start_km()) / step_km;
  std::size_t begin =
      splitter_frac < 0.0
          ? 0
          : static_cast<std::size_t>(std::floor(splitter_frac)) + 1;
  begin = std::max(begin, baseline_window);

  std::vector<double> events;
  std::size_t last_event = 0;
  bool have_event = false;
  for (std::size_t k = begin; k < trace.size(); ++k) {
    // Least-squares line through the window right before k, evaluated at k.
    const std::size_t w = baseline_window;
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t j = 0; j < w; ++j) {
      const double x = static_cast<double>(j);
      const double y = trace[k - w + j];
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
    }
    const double n = static_cast<double>(w);
    const double denom = n * sxx - sx * sx;
    const double slope = (n * sxy - sx * sy) / denom;
    const double intercept = (sy - slope * sx) / n;
    const double predicted = intercept + slope * n;  // one step past the window

    if (trace[k] - predicted >= min_rise_db) {
      if (!have_event || k - last_event > dead_zone_samples) {
        events.push_back(trace.distance_km(k - 1));
        have_event = true;
      }
      last_event = k;
    }
  }
  return events;
}

// --- calibration store ------------------------------------------------------
//
// Flat text, one record per line: "code<TAB>branch<TAB>length_km<TAB>date",
// UTF-8, LF. Lengths carry 4 decimals. The file is append-only; on load,
// duplicate (code, branch) keys resolve to the latest timestamp (file order
// breaking ties).

inline std::string format_calibration_line(const CalibrationRecord& r) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "\t%d\t%.4f\t", r.branch, r.length_km);
  return r.code + buf + r.timestamp + "\n";
}

inline void store(std::span<const CalibrationRecord> records,
                  const std::filesystem::path& path) {
  std::string payload;
  for (const CalibrationRecord& r : records) {
    validate(r);
    payload += format_calibration_line(r);
  }
  std::ofstream out(path, std::ios::binary | std::ios::app);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
  if (!out) throw std::runtime_error("short write to " + path.string());
}

inline void store(const std::vector<CalibrationRecord>& records,
                  const std::filesystem::path& path) {
  store(std::span<const CalibrationRecord>(records), path);
}

inline std::vector<CalibrationRecord> load(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  const std::string name = path.filename().string();

  // key -> (record, arrival order); later timestamps win.
  std::map<std::pair<std::string, int>, std::pair<CalibrationRecord, std::size_t>>
      merged;
  std::vector<std::pair<std::string, int>> order;

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = std::string_view(text).substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;

    std::vector<std::string_view> fields;
    std::size_t fpos = 0;
    while (true) {
      const std::size_t tab = line.find('\t', fpos);
      fields.push_back(line.substr(fpos, tab - fpos));
      if (tab == std::string_view::npos) break;
      fpos = tab + 1;
    }
    if (fields.size() != 4)
      detail::format_error(name, line_no, "expected 4 tab-separated fields");

    CalibrationRecord r;
    r.code = std::string(fields[0]);
    double branch = 0.0;
    if (!detail::parse_double(fields[1], branch) || branch != std::floor(branch))
      detail::format_error(name, line_no, "invalid branch id");
    r.branch = static_cast<int>(branch);
    if (!detail::parse_double(fields[2], r.length_km) || !(r.length_km > 0.0))
      detail::format_error(name, line_no, "invalid length");
    r.timestamp = std::string(fields[3]);
    if (r.code.empty() || r.timestamp.empty())
      detail::format_error(name, line_no, "empty code or timestamp");

    const auto key = std::make_pair(r.code, r.branch);
    auto it = merged.find(key);
    if (it == merged.end()) {
      merged.emplace(key, std::make_pair(r, order.size()));
      order.push_back(key);
    } else if (r.timestamp >= it->second.first.timestamp) {
      it->second.first = r;
    }
  }

  std::vector<CalibrationRecord> out;
  out.reserve(order.size());
  for (const auto& key : order) out.push_back(merged.at(key).first);
  return out;
}

}  // namespace ponsep
