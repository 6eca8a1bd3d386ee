#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ponsep/model.hpp"
#include "ponsep/separator.hpp"
#include "ponsep/superpose.hpp"
#include "ponsep/waveform.hpp"

namespace ponsep {

// Validation harness: simulate channel subsets two ways — each channel in
// isolation then superposed, versus the combination simulated directly — and
// score the agreement over the region of interest. Mirrors the bench
// procedure of unplugging branches one pattern at a time.

struct SequenceSpec {
  std::string name;                     // "A", "B", "C", or custom
  std::vector<std::vector<int>> steps;  // connected channel ids per step
};

inline void validate(const SequenceSpec& spec, int n_channels) {
  if (spec.steps.empty())
    throw std::invalid_argument("SequenceSpec: no steps");
  for (const std::vector<int>& step : spec.steps) {
    if (step.empty()) throw std::invalid_argument("SequenceSpec: empty step");
    for (int id : step)
      if (id < 1 || id > n_channels)
        throw std::invalid_argument("SequenceSpec: channel id " +
                                    std::to_string(id) + " outside 1..N");
  }
}

// A: each channel alone. B: pairs, then quads, then everything. C: growing
// prefixes, then everything.
inline SequenceSpec make_sequence(char name, int n_channels) {
  if (n_channels < 1)
    throw std::invalid_argument("make_sequence: need at least one channel");
  SequenceSpec spec;
  spec.name = std::string(1, name);
  std::vector<int> all(static_cast<std::size_t>(n_channels));
  for (int i = 0; i < n_channels; ++i) all[static_cast<std::size_t>(i)] = i + 1;

  switch (name) {
    case 'A':
      for (int id : all) spec.steps.push_back({id});
      break;
    case 'B':
      for (int group : {2, 4}) {
        if (group >= n_channels) continue;
        for (int first = 1; first + group - 1 <= n_channels; first += group) {
          std::vector<int> step;
          for (int id = first; id < first + group; ++id) step.push_back(id);
          spec.steps.push_back(std::move(step));
        }
      }
      spec.steps.push_back(all);
      break;
    case 'C':
      for (int k = 1; k <= n_channels - 2; ++k)
        spec.steps.emplace_back(all.begin(), all.begin() + k);
      spec.steps.push_back(all);
      break;
    default:
      throw std::invalid_argument("make_sequence: unknown sequence name");
  }
  return spec;
}

struct SequenceStepReport {
  int step = 0;  // 1-based
  std::vector<int> channels;
  double pearson = 0.0;
  double max_abs_err_db = 0.0;
};

namespace detail {

inline NetworkDesign with_connected(const NetworkDesign& design,
                                    std::span<const int> ids) {
  NetworkDesign out = design;
  for (Branch& b : out.branches)
    b.connected = std::find(ids.begin(), ids.end(), b.id) != ids.end();
  return out;
}

}  // namespace detail

// Run one sequence. y0_truth carries one entry per branch, in id order
// (1..N); steps pick their slice out of it. When a step has a measured trace
// supplied, the superposed isolated channels are scored against it instead of
// the direct simulation.
inline std::vector<SequenceStepReport> run_sequence(
    const SequenceSpec& spec, const NetworkDesign& design,
    const OtdrSettings& settings, std::span<const double> y0_truth,
    const std::map<int, Trace>& measured_by_step = {}) {
  validate(design);
  validate(spec, design.splitter_ratio);
  if (y0_truth.size() != design.branches.size())
    throw std::invalid_argument("run_sequence: y0_truth must cover all channels");

  std::vector<SequenceStepReport> reports;
  reports.reserve(spec.steps.size());
  for (std::size_t s = 0; s < spec.steps.size(); ++s) {
    std::vector<int> ids = spec.steps[s];
    std::sort(ids.begin(), ids.end());

    std::vector<Trace> isolated;
    isolated.reserve(ids.size());
    std::vector<double> y0_step;
    for (int id : ids) {
      const double y0 = y0_truth[static_cast<std::size_t>(id - 1)];
      y0_step.push_back(y0);
      const NetworkDesign solo = detail::with_connected(design, std::span(&id, 1));
      isolated.push_back(simulate_network(solo, std::vector<double>{y0}, settings));
    }
    const Trace superposed = superpose(isolated);

    const NetworkDesign combined = detail::with_connected(design, ids);
    const auto measured_it = measured_by_step.find(static_cast<int>(s) + 1);
    const Trace reference =
        measured_it != measured_by_step.end()
            ? measured_it->second
            : simulate_network(combined, y0_step, settings);

    const RegionOfInterest roi = default_roi(combined, settings);
    const auto win_sim = roi_window(superposed, roi);
    const auto win_ref = roi_window(reference, roi);
    double max_err = 0.0;
    for (std::size_t k = 0; k < win_sim.size(); ++k)
      max_err = std::max(max_err, std::abs(win_sim[k] - win_ref[k]));

    reports.push_back(SequenceStepReport{static_cast<int>(s) + 1, ids,
                                         pearson(win_sim, win_ref), max_err});
  }
  return reports;
}

inline std::string sequence_report_csv(std::span<const SequenceStepReport> reports) {
  std::string out = "step,channels,pearson,max_abs_err\n";
  char buf[64];
  for (const SequenceStepReport& r : reports) {
    out += std::to_string(r.step);
    out += ',';
    std::string joined;
    for (int id : r.channels) {
      if (!joined.empty()) joined += '+';
      joined += std::to_string(id);
    }
    out += joined;
    std::snprintf(buf, sizeof buf, ",%.9f,%.6e\n", r.pearson, r.max_abs_err_db);
    out += buf;
  }
  return out;
}

}  // namespace ponsep
