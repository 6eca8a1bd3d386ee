#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ponsep/geometry.hpp"

namespace ponsep {

// Power value marking a physically unplugged channel. It converts to zero
// linear intensity, so a disconnected branch contributes nothing to the
// splitter sum.
inline constexpr double kDisconnectedDb = -std::numeric_limits<double>::infinity();

// OTDR acquisition setup. Defaults are the usual 1x8 field configuration:
// 25 km display range, 0.5 m sampling, 500 ns pulses, 60 averages.
struct OtdrSettings {
  double distance_range_km = 25.0;
  double resolution_m = 0.5;
  double pulse_width_ns = 500.0;
  int averages = 60;

  std::size_t sample_count() const {
    return static_cast<std::size_t>(
               std::floor(distance_range_km * 1000.0 / resolution_m)) +
           1;
  }
};

inline void validate(const OtdrSettings& settings) {
  if (!(settings.resolution_m > 0.0))
    throw std::invalid_argument("OtdrSettings: resolution must be > 0");
  if (!(settings.distance_range_km > 0.0))
    throw std::invalid_argument("OtdrSettings: distance range must be > 0");
  if (!(settings.pulse_width_ns > 0.0))
    throw std::invalid_argument("OtdrSettings: pulse width must be > 0");
  if (settings.averages < 1)
    throw std::invalid_argument("OtdrSettings: averages must be >= 1");
  if (settings.sample_count() < 2)
    throw std::invalid_argument("OtdrSettings: grid has fewer than 2 samples");
}

// Uniformly sampled two-way power-vs-distance record in dB. Sample k sits at
// start_km + k * resolution_m / 1000.
class Trace {
 public:
  Trace(double start_km, double resolution_m, std::vector<double> samples)
      : start_km_(start_km),
        resolution_m_(resolution_m),
        samples_(std::move(samples)) {
    if (samples_.empty()) throw std::invalid_argument("Trace: no samples");
    if (!(resolution_m_ > 0.0))
      throw std::invalid_argument("Trace: resolution must be > 0");
    for (double v : samples_)
      if (std::isnan(v) || (std::isinf(v) && v > 0.0))
        throw std::invalid_argument(
            "Trace: samples must be finite or the disconnected sentinel");
  }

  double start_km() const { return start_km_; }
  double resolution_m() const { return resolution_m_; }
  const std::vector<double>& samples() const { return samples_; }
  std::size_t size() const { return samples_.size(); }
  double operator[](std::size_t k) const { return samples_[k]; }

  double distance_km(std::size_t k) const {
    return start_km_ + static_cast<double>(k) * resolution_m_ / 1000.0;
  }

  bool same_grid_as(const Trace& other, double tol = 1e-9) const {
    return size() == other.size() &&
           std::abs(start_km_ - other.start_km_) <= tol &&
           std::abs(resolution_m_ - other.resolution_m_) <= tol;
  }

 private:
  double start_km_;
  double resolution_m_;
  std::vector<double> samples_;
};

// One splitter output branch. return_loss_db and loss_per_km are carried
// plant records; the waveform model works from its own slope constant.
struct Branch {
  int id = 0;  // 1..N
  double length_km = 0.0;
  double insertion_loss_db = 0.0;
  double return_loss_db = 0.0;
  double loss_per_km = 0.0;  // dB/km
  bool connected = true;
  std::string code;  // external label, e.g. a calibration-database key
  std::optional<BranchGeometry> geometry;
};

// Feeder + 1xN splitter + N branches. The splitter sits at feeder_length_km
// along the trace.
struct NetworkDesign {
  double feeder_length_km = 0.0;
  int splitter_ratio = 0;  // N output ports
  std::vector<Branch> branches;  // exactly N entries, unplugged ones flagged
  double launch_level_db = 0.0;  // level at the splitter input

  const Branch* find_branch(int id) const {
    for (const Branch& b : branches)
      if (b.id == id) return &b;
    return nullptr;
  }

  std::vector<const Branch*> connected_branches() const {
    std::vector<const Branch*> out;
    for (const Branch& b : branches)
      if (b.connected) out.push_back(&b);
    return out;
  }

  std::size_t connected_count() const {
    return connected_branches().size();
  }

  double max_connected_length_km() const {
    double longest = 0.0;
    for (const Branch& b : branches)
      if (b.connected) longest = std::max(longest, b.length_km);
    return longest;
  }
};

inline void validate(const NetworkDesign& design) {
  if (!(design.feeder_length_km >= 0.0))
    throw std::invalid_argument("NetworkDesign: feeder length must be >= 0");
  if (design.splitter_ratio < 1)
    throw std::invalid_argument("NetworkDesign: splitter ratio must be >= 1");
  if (design.branches.size() != static_cast<std::size_t>(design.splitter_ratio))
    throw std::invalid_argument(
        "NetworkDesign: expected exactly one branch entry per splitter port");
  std::vector<int> seen;
  for (const Branch& b : design.branches) {
    if (b.id < 1 || b.id > design.splitter_ratio)
      throw std::invalid_argument("NetworkDesign: branch id " +
                                  std::to_string(b.id) + " outside 1..N");
    if (std::find(seen.begin(), seen.end(), b.id) != seen.end())
      throw std::invalid_argument("NetworkDesign: duplicate branch id " +
                                  std::to_string(b.id));
    seen.push_back(b.id);
    if (!(b.length_km > 0.0))
      throw std::invalid_argument("NetworkDesign: branch length must be > 0");
    if (!(b.loss_per_km >= 0.0))
      throw std::invalid_argument("NetworkDesign: loss/km must be >= 0");
  }
  if (design.connected_count() == 0)
    throw std::invalid_argument("NetworkDesign: no connected branches");
}

// Sample window [start_index, end_index) of a Trace. Used to restrict
// fitting and scoring to the span where the splitter superposition model is
// valid: after the splitter, before the farthest branch's logarithmic tail.
struct RegionOfInterest {
  std::size_t start_index = 0;
  std::size_t end_index = 0;  // exclusive

  std::size_t length() const { return end_index - start_index; }
};

inline void validate(const RegionOfInterest& roi) {
  if (!(roi.start_index < roi.end_index))
    throw std::invalid_argument("RegionOfInterest: start must precede end");
}

// Nearest grid index of a distance. Inverse of Trace::distance_km on
// grid-aligned distances.
inline std::size_t index_of_distance(const OtdrSettings& settings, double z_km) {
  if (std::isnan(z_km) || !(z_km >= 0.0) || z_km > settings.distance_range_km)
    throw std::out_of_range("index_of_distance: distance outside [0, distance_range]");
  return static_cast<std::size_t>(
      std::llround(z_km * 1000.0 / settings.resolution_m));
}

inline double distance_of_index(const OtdrSettings& settings, std::size_t k) {
  return static_cast<double>(k) * settings.resolution_m / 1000.0;
}

// Map a trace distance on a branch to map coordinates by running the cursor
// along the branch polyline, starting at the splitter.
inline std::array<double, 2> locate_event(const NetworkDesign& design,
                                          int branch_id,
                                          double trace_distance_km) {
  const Branch* branch = design.find_branch(branch_id);
  if (branch == nullptr)
    throw std::invalid_argument("locate_event: unknown branch id " +
                                std::to_string(branch_id));
  if (!branch->geometry)
    throw std::invalid_argument("locate_event: branch " +
                                std::to_string(branch_id) + " has no geometry");
  if (trace_distance_km < design.feeder_length_km)
    throw std::out_of_range("locate_event: distance falls before the splitter");
  return cursor(*branch->geometry, trace_distance_km - design.feeder_length_km);
}

}  // namespace ponsep
