#pragma once

#include <cstdio>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "ponsep/model.hpp"
#include "ponsep/trace_io.hpp"

namespace ponsep {

// Design documents are JSON:
//
// {
//   "settings": { "distance_range_km": 25.0, "resolution_m": 0.5,
//                 "pulse_width_ns": 500.0, "averages": 60 },
//   "feeder_length_km": 2.542,
//   "splitter_ratio": 8,
//   "launch_level_db": 0.0,
//   "branches": [
//     { "id": 1, "length_km": 5.6578, "insertion_loss_db": 10.375,
//       "return_loss_db": 71.14, "loss_per_km": 0.190,
//       "connected": true, "code": "PON02UDI",
//       "geometry": { "mode": "planar", "vertices": [[0,0],[3.39468,4.52624]],
//                     "length_tolerance": 0.01 } }
//   ]
// }
//
// "settings", "launch_level_db" and the per-branch "return_loss_db",
// "loss_per_km", "connected", "code", "geometry" keys are optional.

struct DesignDocument {
  OtdrSettings settings;
  NetworkDesign design;
};

namespace detail {

inline double require_number(const nlohmann::json& obj, const char* key,
                             const std::string& context) {
  if (!obj.contains(key))
    throw std::invalid_argument(context + ": missing \"" + key + "\"");
  if (!obj.at(key).is_number())
    throw std::invalid_argument(context + ": \"" + key + "\" must be a number");
  return obj.at(key).get<double>();
}

inline double number_or(const nlohmann::json& obj, const char* key,
                        double fallback, const std::string& context) {
  if (!obj.contains(key)) return fallback;
  if (!obj.at(key).is_number())
    throw std::invalid_argument(context + ": \"" + key + "\" must be a number");
  return obj.at(key).get<double>();
}

inline BranchGeometry parse_geometry(const nlohmann::json& g, double branch_length,
                                     const std::string& context) {
  BranchGeometry geometry;
  geometry.declared_length_km = branch_length;
  if (g.contains("mode")) {
    const std::string mode = g.at("mode").get<std::string>();
    if (mode == "planar")
      geometry.mode = CoordMode::planar;
    else if (mode == "geographic")
      geometry.mode = CoordMode::geographic;
    else
      throw std::invalid_argument(context + ": unknown geometry mode \"" + mode + "\"");
  }
  geometry.length_tolerance = number_or(g, "length_tolerance", 0.01, context);
  if (!g.contains("vertices") || !g.at("vertices").is_array() ||
      g.at("vertices").size() < 2)
    throw std::invalid_argument(context + ": geometry needs a vertex array of >= 2 points");
  for (const auto& v : g.at("vertices")) {
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
      throw std::invalid_argument(context + ": each vertex must be a [a, b] number pair");
    geometry.vertices.push_back({v[0].get<double>(), v[1].get<double>()});
  }
  if (!length_consistent(geometry)) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4f km vs declared %.4f km",
                  arc_length_km(geometry), branch_length);
    throw std::invalid_argument(context + ": geometry arc length disagrees with branch length (" +
                                buf + ")");
  }
  return geometry;
}

}  // namespace detail

inline DesignDocument parse_design_json(const std::string& text,
                                        const std::string& source = "design") {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(source + ": " + e.what());
  }
  if (!doc.is_object())
    throw std::invalid_argument(source + ": top level must be an object");

  DesignDocument out;
  if (doc.contains("settings")) {
    const auto& s = doc.at("settings");
    out.settings.distance_range_km =
        detail::number_or(s, "distance_range_km", out.settings.distance_range_km, source);
    out.settings.resolution_m =
        detail::number_or(s, "resolution_m", out.settings.resolution_m, source);
    out.settings.pulse_width_ns =
        detail::number_or(s, "pulse_width_ns", out.settings.pulse_width_ns, source);
    out.settings.averages = static_cast<int>(
        detail::number_or(s, "averages", out.settings.averages, source));
  }
  validate(out.settings);

  out.design.feeder_length_km = detail::require_number(doc, "feeder_length_km", source);
  out.design.splitter_ratio =
      static_cast<int>(detail::require_number(doc, "splitter_ratio", source));
  out.design.launch_level_db = detail::number_or(doc, "launch_level_db", 0.0, source);

  if (!doc.contains("branches") || !doc.at("branches").is_array())
    throw std::invalid_argument(source + ": missing \"branches\" array");
  for (const auto& b : doc.at("branches")) {
    const std::string context =
        source + ", branch " + (b.contains("id") ? b.at("id").dump() : "?");
    Branch branch;
    branch.id = static_cast<int>(detail::require_number(b, "id", context));
    branch.length_km = detail::require_number(b, "length_km", context);
    branch.insertion_loss_db = detail::require_number(b, "insertion_loss_db", context);
    branch.return_loss_db = detail::number_or(b, "return_loss_db", 0.0, context);
    branch.loss_per_km = detail::number_or(b, "loss_per_km", 0.0, context);
    if (b.contains("connected")) branch.connected = b.at("connected").get<bool>();
    if (b.contains("code"))
      branch.code = b.at("code").get<std::string>();
    else {
      char buf[16];
      std::snprintf(buf, sizeof buf, "BR%02d", branch.id);
      branch.code = buf;
    }
    if (b.contains("geometry"))
      branch.geometry = detail::parse_geometry(b.at("geometry"), branch.length_km, context);
    out.design.branches.push_back(std::move(branch));
  }
  validate(out.design);
  return out;
}

inline DesignDocument load_design(const std::filesystem::path& path) {
  return parse_design_json(read_file(path), path.filename().string());
}

// Default launch power per connected channel: the level at the splitter input
// minus the branch insertion loss.
inline std::vector<double> default_y0(const NetworkDesign& design) {
  std::vector<double> out;
  for (const Branch* b : design.connected_branches())
    out.push_back(design.launch_level_db - b->insertion_loss_db);
  return out;
}

}  // namespace ponsep
