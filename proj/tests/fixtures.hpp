#pragma once

// Shared test fixtures: the 1x8 reference network and small helper designs.

#include <vector>

#include "ponsep/model.hpp"

namespace fixtures {

inline ponsep::OtdrSettings reference_settings(double resolution_m = 0.5) {
  ponsep::OtdrSettings s;
  s.distance_range_km = 25.0;
  s.resolution_m = resolution_m;
  s.pulse_width_ns = 500.0;
  s.averages = 60;
  return s;
}

// The measured 1x8 bench network: feeder 2.5420 km, eight bobbins of known
// length and loss behind the splitter.
inline ponsep::NetworkDesign reference_network() {
  ponsep::NetworkDesign d;
  d.feeder_length_km = 2.5420;
  d.splitter_ratio = 8;
  d.launch_level_db = 0.0;
  d.branches = {
      {1, 5.6578, 10.375, 71.14, 0.190, true, "PON02UDI", std::nullopt},
      {2, 6.0108, 12.173, 59.61, 0.224, true, "PON03UDI", std::nullopt},
      {3, 5.7039, 11.438, 60.14, 0.200, true, "PON03UDI4", std::nullopt},
      {4, 3.3251, 10.088, 73.25, 0.233, true, "PON04UDI", std::nullopt},
      {5, 2.5168, 10.804, 72.18, 0.193, true, "PON05UDI", std::nullopt},
      {6, 2.6294, 9.684, 78.01, 0.219, true, "PON06UDI", std::nullopt},
      {7, 19.4239, 11.219, 71.94, 0.203, true, "PON07UDI", std::nullopt},
      {8, 12.4718, 10.50, 72.65, 0.223, true, "PON08UDI", std::nullopt},
  };
  return d;
}

inline std::vector<double> reference_y0() {
  ponsep::NetworkDesign d = reference_network();
  std::vector<double> y0;
  for (const ponsep::Branch& b : d.branches)
    y0.push_back(d.launch_level_db - b.insertion_loss_db);
  return y0;
}

// Minimal single-branch network on a short grid; cheap enough for
// optimizer-in-the-loop tests.
inline ponsep::NetworkDesign single_branch_network(double feeder_km = 1.0,
                                                   double branch_km = 2.0) {
  ponsep::NetworkDesign d;
  d.feeder_length_km = feeder_km;
  d.splitter_ratio = 1;
  d.launch_level_db = 0.0;
  d.branches = {{1, branch_km, 10.0, 70.0, 0.2, true, "BR01", std::nullopt}};
  return d;
}

inline ponsep::OtdrSettings short_settings(double range_km = 5.0,
                                           double resolution_m = 5.0) {
  ponsep::OtdrSettings s;
  s.distance_range_km = range_km;
  s.resolution_m = resolution_m;
  return s;
}

}  // namespace fixtures
