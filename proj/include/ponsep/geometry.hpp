#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace ponsep {

enum class CoordMode { planar, geographic };

// Mean Earth radius backing the geographic (great-circle) mode.
inline constexpr double kEarthRadiusKm = 6371.0088;

// Cable route as an ordered vertex list. Planar vertices are (x, y) in km;
// geographic vertices are (latitude, longitude) in degrees.
struct BranchGeometry {
  CoordMode mode = CoordMode::planar;
  std::vector<std::array<double, 2>> vertices;
  double declared_length_km = 0.0;
  double length_tolerance = 0.01;  // relative, against declared_length_km
};

namespace detail {

inline double great_circle_km(const std::array<double, 2>& a, const std::array<double, 2>& b) {
  constexpr double deg = std::numbers::pi / 180.0;
  const double lat1 = a[0] * deg;
  const double lat2 = b[0] * deg;
  const double dlat = (b[0] - a[0]) * deg;
  const double dlon = (b[1] - a[1]) * deg;
  const double s1 = std::sin(dlat / 2.0);
  const double s2 = std::sin(dlon / 2.0);
  const double h = s1 * s1 + std::cos(lat1) * std::cos(lat2) * s2 * s2;
  return 2.0 * kEarthRadiusKm * std::asin(std::min(1.0, std::sqrt(h)));
}

inline double segment_length_km(CoordMode mode, const std::array<double, 2>& a,
                                const std::array<double, 2>& b) {
  if (mode == CoordMode::geographic) return great_circle_km(a, b);
  return std::hypot(b[0] - a[0], b[1] - a[1]);
}

}  // namespace detail

inline double arc_length_km(const BranchGeometry& geometry) {
  if (geometry.vertices.size() < 2)
    throw std::invalid_argument("arc_length_km: geometry needs at least 2 vertices");
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < geometry.vertices.size(); ++i)
    total += detail::segment_length_km(geometry.mode, geometry.vertices[i],
                                       geometry.vertices[i + 1]);
  return total;
}

// True when the polyline's arc length agrees with the declared cable length.
inline bool length_consistent(const BranchGeometry& geometry) {
  return std::abs(arc_length_km(geometry) - geometry.declared_length_km) <=
         geometry.length_tolerance * geometry.declared_length_km;
}

// Position along the polyline: segment index, intra-segment parameter in
// [0, 1], and the interpolated point. (segment, t) is lexicographically
// non-decreasing in the arc distance, which is what makes the cursor monotone.
struct CursorPos {
  std::size_t segment = 0;
  double t = 0.0;
  std::array<double, 2> point{0.0, 0.0};
};

inline CursorPos cursor_position(const BranchGeometry& geometry, double s_km) {
  const double total = arc_length_km(geometry);
  if (!(s_km >= 0.0) || s_km > total + 1e-9)
    throw std::out_of_range("cursor_position: arc distance outside [0, arc_length]");

  double remaining = std::min(s_km, total);
  for (std::size_t i = 0; i + 1 < geometry.vertices.size(); ++i) {
    const auto& a = geometry.vertices[i];
    const auto& b = geometry.vertices[i + 1];
    const double len = detail::segment_length_km(geometry.mode, a, b);
    if (len > 0.0 && remaining <= len) {
      const double t = remaining / len;
      // Geographic segments are interpolated chordally in (lat, lon); fine at
      // cable-segment scale.
      return CursorPos{i, t,
                       {a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])}};
    }
    remaining -= len;
  }
  // s == arc_length with trailing zero-length segments.
  return CursorPos{geometry.vertices.size() - 2, 1.0, geometry.vertices.back()};
}

inline std::array<double, 2> cursor(const BranchGeometry& geometry, double s_km) {
  return cursor_position(geometry, s_km).point;
}

}  // namespace ponsep
