#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <optional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "ponsep/de.hpp"
#include "ponsep/model.hpp"
#include "ponsep/waveform.hpp"

namespace ponsep {

// Recovery of per-channel launch powers from one aggregate trace: simulate
// every connected channel from the known design geometry, superpose, and fit
// the per-channel y0 vector so the superposition matches the measurement.

// Aggregate correlations below this are not trustworthy separations.
inline constexpr double kPearsonGate = 0.97;

inline double pearson(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size())
    throw std::invalid_argument("pearson: length mismatch");
  if (a.size() < 2)
    throw std::invalid_argument("pearson: need at least 2 samples");
  const double n = static_cast<double>(a.size());
  double mean_a = 0.0, mean_b = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    mean_a += a[i];
    mean_b += b[i];
  }
  mean_a /= n;
  mean_b /= n;
  double cov = 0.0, var_a = 0.0, var_b = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - mean_a;
    const double db = b[i] - mean_b;
    cov += da * db;
    var_a += da * da;
    var_b += db * db;
  }
  if (var_a == 0.0 || var_b == 0.0)
    throw std::domain_error("pearson: undefined for zero-variance input");
  return std::clamp(cov / std::sqrt(var_a * var_b), -1.0, 1.0);
}

// View of a trace restricted to a region of interest.
inline std::span<const double> roi_window(const Trace& trace,
                                          const RegionOfInterest& roi) {
  validate(roi);
  if (roi.end_index > trace.size())
    throw std::invalid_argument("roi_window: region extends past the trace");
  return std::span<const double>(trace.samples())
      .subspan(roi.start_index, roi.length());
}

// Sum of squared residuals between a measured aggregate and the design's
// simulated aggregate for a candidate y0 genome, over the region of interest.
// Pure and reentrant: safe to evaluate from several workers at once.
class AggregateObjective {
 public:
  AggregateObjective(Trace measured, NetworkDesign design,
                     OtdrSettings settings, RegionOfInterest roi)
      : measured_(std::move(measured)),
        design_(std::move(design)),
        settings_(settings),
        roi_(roi) {
    validate(design_);
    validate(settings_);
    if (measured_.size() != settings_.sample_count() ||
        std::abs(measured_.resolution_m() - settings_.resolution_m) > 1e-9 ||
        std::abs(measured_.start_km()) > 1e-9)
      throw std::invalid_argument(
          "AggregateObjective: measured trace is not on the settings grid");
    roi_window(measured_, roi_);  // bounds check
  }

  double operator()(const std::vector<double>& genome) const {
    const Trace fitted = simulate_network(design_, genome, settings_);
    double sse = 0.0;
    for (std::size_t k = roi_.start_index; k < roi_.end_index; ++k) {
      const double r = measured_[k] - fitted[k];
      sse += r * r;
    }
    return sse;
  }

  const RegionOfInterest& roi() const { return roi_; }

 private:
  Trace measured_;
  NetworkDesign design_;
  OtdrSettings settings_;
  RegionOfInterest roi_;
};

inline AggregateObjective build_objective(const Trace& measured,
                                          const NetworkDesign& design,
                                          const OtdrSettings& settings,
                                          const RegionOfInterest& roi) {
  return AggregateObjective(measured, design, settings, roi);
}

struct SeparationResult {
  std::vector<double> y0_per_channel;  // connected branches, id order
  std::vector<Trace> per_channel_traces;
  Trace fitted_aggregate;
  double pearson = 0.0;       // over the region of interest
  double residual_sse = 0.0;  // dB^2
  int generations_used = 0;
  double elapsed_seconds = 0.0;
  bool success = false;  // pearson >= kPearsonGate
  // Groups of connected branch ids whose design ends fall within one
  // pulse-width dead zone of each other. Their fits are reported but cannot
  // be told apart from the trace alone.
  std::vector<std::vector<int>> ambiguous_groups;
};

namespace detail {

// Rule of thumb from the acquisition setup: a 500 ns pulse blinds roughly
// 100 m of fiber.
inline double pulse_dead_zone_km(const OtdrSettings& settings) {
  return settings.pulse_width_ns * 0.2 / 1000.0;
}

inline std::vector<std::vector<int>> ambiguous_length_groups(
    const NetworkDesign& design, const OtdrSettings& settings) {
  std::vector<std::pair<double, int>> ends;
  for (const Branch* b : design.connected_branches())
    ends.emplace_back(b->length_km, b->id);
  std::sort(ends.begin(), ends.end());
  const double dz = pulse_dead_zone_km(settings);

  std::vector<std::vector<int>> groups;
  std::vector<int> current{};
  for (std::size_t i = 0; i < ends.size(); ++i) {
    if (current.empty() || ends[i].first - ends[i - 1].first <= dz) {
      current.push_back(ends[i].second);
    } else {
      if (current.size() > 1) groups.push_back(current);
      current = {ends[i].second};
    }
  }
  if (current.size() > 1) groups.push_back(current);
  return groups;
}

}  // namespace detail

// Fit per-channel y0 values to a measured aggregate. Branch lengths come
// from the design; only the power split is unknown. A below-gate correlation
// is reported in the result, not thrown.
inline SeparationResult separate(
    const Trace& measured, const NetworkDesign& design,
    const OtdrSettings& settings, const DeConfig& de_config,
    std::optional<RegionOfInterest> roi_override = std::nullopt) {
  const auto t0 = std::chrono::steady_clock::now();
  const RegionOfInterest roi =
      roi_override ? *roi_override : default_roi(design, settings);

  DeConfig cfg = de_config;
  const std::size_t dim = design.connected_count();
  if (cfg.bounds.empty()) cfg.bounds.assign(dim, Bounds{-40.0, 0.0});
  if (cfg.bounds.size() != dim)
    throw std::invalid_argument("separate: bounds do not match channel count");

  const AggregateObjective objective =
      build_objective(measured, design, settings, roi);
  DeResult de = run(objective, cfg);

  Trace fitted = simulate_network(design, de.best.genome, settings);
  std::vector<Trace> channels;
  channels.reserve(dim);
  const std::vector<const Branch*> connected = design.connected_branches();
  for (std::size_t i = 0; i < connected.size(); ++i) {
    NetworkDesign solo = design;
    for (Branch& b : solo.branches) b.connected = (b.id == connected[i]->id);
    channels.push_back(
        simulate_network(solo, std::vector<double>{de.best.genome[i]}, settings));
  }

  const double corr =
      pearson(roi_window(measured, roi), roi_window(fitted, roi));
  const auto elapsed = std::chrono::duration<double>(
      std::chrono::steady_clock::now() - t0);

  return SeparationResult{
      std::move(de.best.genome),
      std::move(channels),
      std::move(fitted),
      corr,
      de.best.fitness,
      de.generations_used,
      elapsed.count(),
      corr >= kPearsonGate,
      detail::ambiguous_length_groups(design, settings)};
}

}  // namespace ponsep
