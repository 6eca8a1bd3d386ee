#pragma once

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ponsep/model.hpp"

namespace ponsep {

// Canonical trace file: one "distance_km,power_db" record per line, no
// header, LF line ends, six fractional digits on distances, strictly
// increasing uniform distances. The parser additionally tolerates CRLF and a
// single leading header line.

namespace detail {

inline bool parse_double(std::string_view field, double& out) {
  const char* begin = field.data();
  const char* end = begin + field.size();
  const auto res = std::from_chars(begin, end, out);
  return res.ec == std::errc() && res.ptr == end;
}

[[noreturn]] inline void format_error(std::string_view source, std::size_t line,
                                      const std::string& what) {
  throw std::runtime_error(std::string(source) + ":" + std::to_string(line) +
                           ": " + what);
}

}  // namespace detail

inline Trace parse_trace_csv(std::string_view text,
                             std::string_view source = "trace") {
  if (text.empty()) detail::format_error(source, 1, "empty file");

  std::vector<double> distances;
  std::vector<double> powers;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) detail::format_error(source, line_no, "empty line");

    const std::size_t comma = line.find(',');
    const std::string_view first_field =
        comma == std::string_view::npos ? line : line.substr(0, comma);
    double distance = 0.0, power = 0.0;
    if (!detail::parse_double(first_field, distance)) {
      // A single non-numeric header line is tolerated and skipped.
      if (line_no == 1) continue;
      detail::format_error(source, line_no, "non-numeric distance field");
    }
    if (comma == std::string_view::npos ||
        line.find(',', comma + 1) != std::string_view::npos)
      detail::format_error(source, line_no, "expected two comma-separated fields");
    if (!detail::parse_double(line.substr(comma + 1), power))
      detail::format_error(source, line_no, "non-numeric power field");
    if (!std::isfinite(distance))
      detail::format_error(source, line_no, "non-finite distance");
    // -inf marks a disconnected-channel sample; NaN and +inf are malformed.
    if (std::isnan(power) || (std::isinf(power) && power > 0.0))
      detail::format_error(source, line_no, "invalid power value");

    if (!distances.empty()) {
      const double step = distance - distances.back();
      if (!(step > 0.0))
        detail::format_error(source, line_no, "distances must strictly increase");
      if (distances.size() >= 2 &&
          std::abs(step - (distances[1] - distances[0])) > 1e-6)
        detail::format_error(source, line_no, "non-uniform sample spacing");
    }
    distances.push_back(distance);
    powers.push_back(power);
  }

  if (powers.empty()) detail::format_error(source, line_no, "no trace records");
  if (powers.size() < 2)
    detail::format_error(source, line_no,
                         "a single record leaves the resolution undetermined");
  const double resolution_m = (distances[1] - distances[0]) * 1000.0;
  return Trace(distances.front(), resolution_m, std::move(powers));
}

inline std::string write_trace_csv(const Trace& trace) {
  if (trace.size() < 2)
    throw std::invalid_argument(
        "write_trace_csv: need at least 2 samples to pin the resolution");
  std::string out;
  out.reserve(trace.size() * 24);
  char buf[64];
  for (std::size_t k = 0; k < trace.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%.6f,%.9f\n", trace.distance_km(k), trace[k]);
    out += buf;
  }
  return out;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::filesystem::path& path,
                       std::string_view content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw std::runtime_error("short write to " + path.string());
}

inline Trace load_trace_csv(const std::filesystem::path& path) {
  return parse_trace_csv(read_file(path), path.filename().string());
}

inline void save_trace_csv(const Trace& trace,
                           const std::filesystem::path& path) {
  write_file(path, write_trace_csv(trace));
}

// Wide plot-data export: distance plus one named column per series, for
// overlaying the measurement, the fitted aggregate, and the separated
// channels in any plotting tool.
inline std::string overlay_csv(const Trace& measured, const Trace& fitted,
                               std::span<const Trace> channels,
                               std::span<const std::string> channel_names = {}) {
  if (!fitted.same_grid_as(measured))
    throw std::invalid_argument("overlay_csv: fitted trace grid mismatch");
  for (const Trace& c : channels)
    if (!c.same_grid_as(measured))
      throw std::invalid_argument("overlay_csv: channel trace grid mismatch");
  if (!channel_names.empty() && channel_names.size() != channels.size())
    throw std::invalid_argument("overlay_csv: one name per channel required");

  std::string out = "distance_km,measured,fitted";
  for (std::size_t c = 0; c < channels.size(); ++c) {
    out += ',';
    out += channel_names.empty() ? "channel_" + std::to_string(c + 1)
                                 : channel_names[c];
  }
  out += '\n';
  char buf[64];
  for (std::size_t k = 0; k < measured.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%.6f", measured.distance_km(k));
    out += buf;
    std::snprintf(buf, sizeof buf, ",%.9f,%.9f", measured[k], fitted[k]);
    out += buf;
    for (const Trace& c : channels) {
      std::snprintf(buf, sizeof buf, ",%.9f", c[k]);
      out += buf;
    }
    out += '\n';
  }
  return out;
}

inline void export_overlay(const Trace& measured, const Trace& fitted,
                           std::span<const Trace> channels,
                           const std::filesystem::path& path,
                           std::span<const std::string> channel_names = {}) {
  write_file(path, overlay_csv(measured, fitted, channels, channel_names));
}

}  // namespace ponsep
