#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace ponsep {

// Seedable RNG used wherever the library needs randomness. Draws are derived
// from the raw mt19937_64 word stream instead of std:: distributions, whose
// output is implementation-defined; sequences here are identical on every
// platform for a given seed.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform in [0, 1), 53-bit resolution.
  double uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Uniform integer in [0, n). Modulo bias is below 2^-52 for any n the
  // library uses (population sizes, genome dimensions).
  std::size_t below(std::size_t n) {
    return static_cast<std::size_t>(engine_() % n);
  }

  // Zero-mean Gaussian, Box-Muller with a cached spare.
  double gaussian(double sigma) {
    if (has_spare_) {
      has_spare_ = false;
      return spare_ * sigma;
    }
    double u1 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta) * sigma;
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace ponsep
