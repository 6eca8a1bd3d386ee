#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ponsep/model.hpp"
#include "ponsep/random.hpp"
#include "ponsep/superpose.hpp"

namespace ponsep {

// Single-channel post-splitter waveform model. A channel trace is built from
// four pieces over local sample ids xbar = 1..D (1-based, counted from the
// first sample after the splitter):
//
//   1..A      y0 + m*xbar                       Rayleigh backscatter line
//   A+1       (y(A) + v_f) * sqrt(2)/2          smoothed first peak sample
//   A+2..B    y(A) + v_f                        Fresnel reflection plateau
//   B+1..C    y(B) + decline_slope*(xbar - B)   linear decline
//   C+1..D    y(C) + tail_coeff*ln(xbar - C) + tail_offset
//
// with B = A + peak_len and C = B + decline_len. A is the last sample before
// the fiber end; A+1..D is the event's dead zone. The tail_offset term puts
// the first tail sample 1 dB above y(C); that step-up is part of the model,
// not an off-by-one.

// Rayleigh slope in dB per sample on the 0.5 m acquisition grid.
inline const double kRayleighSlopeBase = std::atan(-1.0 / 1150.0);
inline constexpr double kBaseResolutionM = 0.5;

// The slope constant is tied to the 0.5 m grid; on other grids it scales
// with the sample spacing.
inline double rayleigh_slope_per_sample(double resolution_m) {
  return kRayleighSlopeBase * (resolution_m / kBaseResolutionM);
}

struct ChannelSimParams {
  double y0_db = 0.0;  // power right after the splitter
  double slope_db_per_sample = kRayleighSlopeBase;  // m
  double fresnel_rise_db = 21.0;                    // v_f
  std::size_t end_sample = 0;   // A, 1-based local index of the fiber end
  std::size_t peak_len = 11;    // samples A+1..B
  std::size_t decline_len = 4;  // samples B+1..C
  double decline_slope_db = -3.86;  // per sample
  double tail_coeff_db = -2.41;
  double tail_offset_db = 1.0;
  std::size_t total_samples = 0;  // D
};

inline void validate(const ChannelSimParams& p) {
  if (p.end_sample < 1)
    throw std::invalid_argument("ChannelSimParams: fiber end precedes the splitter");
  if (p.peak_len < 1 || p.decline_len < 1)
    throw std::invalid_argument("ChannelSimParams: peak and decline need >= 1 sample");
  if (p.end_sample + p.peak_len + p.decline_len >= p.total_samples)
    throw std::invalid_argument(
        "ChannelSimParams: dead zone does not fit before the end of the grid");
}

// Local amplitude array for one channel, index i holding the sample at
// xbar = i + 1. All arithmetic stays in the 1-based local coordinates above;
// callers convert at the grid boundary.
inline std::vector<double> simulate_channel(const ChannelSimParams& p) {
  validate(p);
  const std::size_t a = p.end_sample;
  const std::size_t b = a + p.peak_len;
  const std::size_t c = b + p.decline_len;
  std::vector<double> y(p.total_samples);
  auto at = [&y](std::size_t xbar) -> double& { return y[xbar - 1]; };

  for (std::size_t x = 1; x <= a; ++x)
    at(x) = p.y0_db + p.slope_db_per_sample * static_cast<double>(x);
  at(a + 1) = (at(a) + p.fresnel_rise_db) * (std::sqrt(2.0) / 2.0);
  for (std::size_t x = a + 2; x <= b; ++x) at(x) = at(a) + p.fresnel_rise_db;
  for (std::size_t x = b + 1; x <= c; ++x)
    at(x) = at(b) + p.decline_slope_db * static_cast<double>(x - b);
  for (std::size_t x = c + 1; x <= p.total_samples; ++x)
    at(x) = at(c) + p.tail_coeff_db * std::log(static_cast<double>(x - c)) +
            p.tail_offset_db;
  return y;
}

// Channel parameters for one branch of a design: the fiber-end position A
// comes from the declared feeder + branch lengths, D spans the rest of the
// acquisition grid.
inline ChannelSimParams params_from_design(const NetworkDesign& design,
                                           int branch_id, double y0_db,
                                           const OtdrSettings& settings) {
  validate(settings);
  const Branch* branch = design.find_branch(branch_id);
  if (branch == nullptr)
    throw std::invalid_argument("params_from_design: unknown branch id " +
                                std::to_string(branch_id));
  if (!branch->connected)
    throw std::invalid_argument("params_from_design: branch " +
                                std::to_string(branch_id) + " is not connected");
  const std::size_t splitter = index_of_distance(settings, design.feeder_length_km);
  const std::size_t end =
      index_of_distance(settings, design.feeder_length_km + branch->length_km);
  if (end <= splitter)
    throw std::invalid_argument(
        "params_from_design: branch end does not clear the splitter");

  ChannelSimParams p;
  p.y0_db = y0_db;
  p.slope_db_per_sample = rayleigh_slope_per_sample(settings.resolution_m);
  p.end_sample = end - splitter;
  p.total_samples = settings.sample_count() - 1 - splitter;
  validate(p);
  return p;
}

// Default scoring window: from the first sample past the splitter's own dead
// zone to the last decline sample of the farthest connected branch. One
// event dead zone is peak_len + decline_len samples.
inline RegionOfInterest default_roi(const NetworkDesign& design,
                                    const OtdrSettings& settings,
                                    std::size_t peak_len = 11,
                                    std::size_t decline_len = 4) {
  validate(design);
  validate(settings);
  const std::size_t splitter = index_of_distance(settings, design.feeder_length_km);
  const std::size_t guard = peak_len + decline_len;
  const std::size_t farthest = index_of_distance(
      settings, design.feeder_length_km + design.max_connected_length_km());
  RegionOfInterest roi{splitter + guard + 1, farthest + guard + 1};
  validate(roi);
  if (roi.end_index > settings.sample_count())
    throw std::invalid_argument("default_roi: region extends past the grid");
  return roi;
}

// Full-grid aggregate trace of a design: every connected channel simulated
// and superposed after the splitter, the feeder span filled with a Rayleigh
// line from the launch level. y0_per_channel pairs with the connected
// branches in id order. Noise, when requested, is zero-mean Gaussian in dB.
inline Trace simulate_network(const NetworkDesign& design,
                              std::span<const double> y0_per_channel,
                              const OtdrSettings& settings,
                              double noise_sigma_db = 0.0,
                              std::uint64_t noise_seed = 0) {
  validate(design);
  validate(settings);
  const std::vector<const Branch*> connected = design.connected_branches();
  if (y0_per_channel.size() != connected.size())
    throw std::invalid_argument(
        "simulate_network: need one y0 per connected branch");

  const std::size_t splitter = index_of_distance(settings, design.feeder_length_km);
  const double local_start_km = distance_of_index(settings, splitter + 1);

  std::vector<Trace> channels;
  channels.reserve(connected.size());
  for (std::size_t i = 0; i < connected.size(); ++i) {
    const ChannelSimParams p =
        params_from_design(design, connected[i]->id, y0_per_channel[i], settings);
    channels.emplace_back(local_start_km, settings.resolution_m, simulate_channel(p));
  }
  const Trace aggregate = superpose(channels);

  std::vector<double> out(settings.sample_count());
  const double slope = rayleigh_slope_per_sample(settings.resolution_m);
  for (std::size_t k = 0; k <= splitter; ++k)
    out[k] = design.launch_level_db + slope * static_cast<double>(k);
  std::copy(aggregate.samples().begin(), aggregate.samples().end(),
            out.begin() + static_cast<std::ptrdiff_t>(splitter) + 1);

  if (noise_sigma_db > 0.0) {
    Rng rng(noise_seed);
    for (double& v : out) v += rng.gaussian(noise_sigma_db);
  }
  return Trace(0.0, settings.resolution_m, std::move(out));
}

inline Trace simulate_network(const NetworkDesign& design,
                              const std::vector<double>& y0_per_channel,
                              const OtdrSettings& settings,
                              double noise_sigma_db = 0.0,
                              std::uint64_t noise_seed = 0) {
  return simulate_network(design, std::span<const double>(y0_per_channel),
                          settings, noise_sigma_db, noise_seed);
}

}  // namespace ponsep
