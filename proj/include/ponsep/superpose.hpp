#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ponsep/model.hpp"

namespace ponsep {

// Dimensionless linear signal intensity, >= 0. Zero is a disconnected
// channel.
struct LinearIntensity {
  double value = 0.0;
};

inline LinearIntensity db_to_linear(double power_db) {
  if (std::isnan(power_db))
    throw std::invalid_argument("db_to_linear: NaN power");
  if (std::isinf(power_db) && power_db > 0.0)
    throw std::invalid_argument("db_to_linear: +inf power");
  if (power_db == kDisconnectedDb) return {0.0};
  return {std::pow(10.0, 0.1 * power_db)};
}

inline double linear_to_db(LinearIntensity intensity) {
  if (std::isnan(intensity.value) || intensity.value < 0.0)
    throw std::invalid_argument("linear_to_db: intensity must be >= 0");
  if (intensity.value == 0.0) return kDisconnectedDb;
  return 10.0 * std::log10(intensity.value);
}

// Aggregate trace seen at the splitter input when every channel trace in
// `traces` backscatters through it:
//
//   S(z) = 10 log10( sqrt( sum_c (10^(0.1 Pc(z)))^2 ) )
//
// The square/square-root pair is the two-way-loss bookkeeping of OTDR power
// readings; it is kept literal here rather than folded into 5 log10(sum).
inline Trace superpose(std::span<const Trace> traces) {
  if (traces.empty()) throw std::invalid_argument("superpose: no input traces");
  const Trace& first = traces.front();
  for (const Trace& t : traces.subspan(1))
    if (!t.same_grid_as(first))
      throw std::invalid_argument("superpose: traces are not on a common grid");

  std::vector<double> out(first.size());
  std::vector<double> squares(traces.size());
  for (std::size_t k = 0; k < first.size(); ++k) {
    for (std::size_t c = 0; c < traces.size(); ++c) {
      const double lin = db_to_linear(traces[c][k]).value;
      squares[c] = lin * lin;
    }
    // Summed in ascending order so the result does not depend on the order
    // the inputs were passed in.
    std::sort(squares.begin(), squares.end());
    const double total = std::accumulate(squares.begin(), squares.end(), 0.0);
    if (total == 0.0)
      throw std::domain_error("superpose: every channel disconnected at sample " +
                              std::to_string(k));
    out[k] = 10.0 * std::log10(std::sqrt(total));
  }
  return Trace(first.start_km(), first.resolution_m(), std::move(out));
}

inline Trace superpose(const std::vector<Trace>& traces) {
  return superpose(std::span<const Trace>(traces));
}

// Splitter intensity conservation: the branch intensities must add up to the
// input intensity, within a relative tolerance.
inline bool conservation_check(LinearIntensity input,
                               std::span<const LinearIntensity> branches,
                               double tol) {
  double sum = 0.0;
  for (const LinearIntensity& b : branches) sum += b.value;
  return std::abs(input.value - sum) <= tol * input.value;
}

inline bool conservation_check(LinearIntensity input,
                               const std::vector<LinearIntensity>& branches,
                               double tol) {
  return conservation_check(input, std::span<const LinearIntensity>(branches), tol);
}

}  // namespace ponsep
