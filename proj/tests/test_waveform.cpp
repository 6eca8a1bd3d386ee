#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "ponsep/waveform.hpp"

#include "fixtures.hpp"

using namespace ponsep;

namespace {

ChannelSimParams basic_params(double y0 = 0.0, std::size_t a = 100,
                              std::size_t d = 200) {
  ChannelSimParams p;
  p.y0_db = y0;
  p.end_sample = a;
  p.total_samples = d;
  return p;
}

}  // namespace

TEST_CASE("Rayleigh segment evaluates the sloped line") {
  const auto y = simulate_channel(basic_params(0.0));
  // y(1) = m, the slope constant itself.
  CHECK(y[0] == Catch::Approx(-0.000869565).margin(1e-9));
  CHECK(y[0] == Catch::Approx(std::atan(-1.0 / 1150.0)).margin(1e-15));
  // Affine: second differences vanish.
  for (std::size_t x = 2; x < 100; ++x) {
    const double d1 = y[x - 1] - y[x - 2];
    const double d2 = y[x] - y[x - 1];
    CHECK(std::abs(d2 - d1) <= 1e-12);
  }
}

TEST_CASE("first peak sample is smoothed by sqrt(2)/2") {
  // Flat baseline at -5 so y(A) is exact.
  ChannelSimParams p = basic_params(-5.0);
  p.slope_db_per_sample = 0.0;
  const auto y = simulate_channel(p);
  const std::size_t a = p.end_sample;
  CHECK(y[a - 1] == -5.0);
  CHECK(y[a] == Catch::Approx(16.0 * std::sqrt(2.0) / 2.0).margin(1e-12));
  CHECK(y[a] == Catch::Approx(11.313708).margin(1e-6));
}

TEST_CASE("reflection plateau holds y(A) + v_f") {
  ChannelSimParams p = basic_params(-5.0);
  p.slope_db_per_sample = 0.0;
  const auto y = simulate_channel(p);
  const std::size_t a = p.end_sample;
  const std::size_t b = a + p.peak_len;
  for (std::size_t x = a + 2; x <= b; ++x) CHECK(y[x - 1] == 16.0);
}

TEST_CASE("decline drops 3.86 dB per sample") {
  ChannelSimParams p = basic_params(-5.0);
  p.slope_db_per_sample = 0.0;
  const auto y = simulate_channel(p);
  const std::size_t b = p.end_sample + p.peak_len;
  const std::size_t c = b + p.decline_len;
  CHECK(y[b] == Catch::Approx(16.0 - 3.86).margin(1e-12));  // y(B+1) = 12.14
  CHECK(y[b] == Catch::Approx(12.14).margin(1e-12));
  for (std::size_t x = b + 2; x <= c; ++x)
    CHECK(y[x - 1] - y[x - 2] == Catch::Approx(-3.86).margin(1e-12));
}

TEST_CASE("tail starts one dB above y(C) and then decreases") {
  ChannelSimParams p = basic_params(-5.0);
  const auto y = simulate_channel(p);
  const std::size_t c = p.end_sample + p.peak_len + p.decline_len;
  // ln(1) = 0 leaves only the +1 offset at the first tail sample.
  CHECK(y[c] == Catch::Approx(y[c - 1] + 1.0).margin(1e-12));
  for (std::size_t x = c + 2; x <= p.total_samples; ++x)
    CHECK(y[x - 1] < y[x - 2]);
}

TEST_CASE("parameter invariants are enforced") {
  ChannelSimParams p = basic_params();
  p.end_sample = 0;
  CHECK_THROWS_AS(simulate_channel(p), std::invalid_argument);
  p = basic_params();
  p.total_samples = p.end_sample + p.peak_len + p.decline_len;  // no tail room
  CHECK_THROWS_AS(simulate_channel(p), std::invalid_argument);
  p = basic_params();
  p.peak_len = 0;
  CHECK_THROWS_AS(simulate_channel(p), std::invalid_argument);
}

TEST_CASE("single-sample peak still anchors the decline") {
  ChannelSimParams p = basic_params(-5.0, 10, 40);
  p.slope_db_per_sample = 0.0;
  p.peak_len = 1;
  const auto y = simulate_channel(p);
  // B = A + 1 is the smoothed sample; the decline hangs off it.
  CHECK(y[10] == Catch::Approx(16.0 * std::sqrt(2.0) / 2.0).margin(1e-12));
  CHECK(y[11] == Catch::Approx(y[10] - 3.86).margin(1e-12));
}

TEST_CASE("params_from_design places the fiber end on the grid") {
  const NetworkDesign d = fixtures::reference_network();
  const OtdrSettings s = fixtures::reference_settings();

  const ChannelSimParams p1 = params_from_design(d, 1, -10.0, s);
  const std::size_t splitter = index_of_distance(s, d.feeder_length_km);
  // Feeder 2.5420 + branch 5.6578 puts the end at 8.1998 km.
  const double end_km = distance_of_index(s, splitter + p1.end_sample);
  CHECK(std::abs(end_km - 8.1998) <= s.resolution_m / 2000.0);
  CHECK(p1.slope_db_per_sample == Catch::Approx(kRayleighSlopeBase));
  CHECK(p1.total_samples == s.sample_count() - 1 - splitter);

  const ChannelSimParams p7 = params_from_design(d, 7, -10.0, s);
  const double end7 = distance_of_index(s, splitter + p7.end_sample);
  CHECK(std::abs(end7 - 21.9659) <= s.resolution_m / 2000.0);
}

TEST_CASE("params_from_design rejects degenerate branches") {
  NetworkDesign d = fixtures::single_branch_network(1.0, 2.0);
  const OtdrSettings s = fixtures::short_settings();

  SECTION("zero-length branch") {
    d.branches[0].length_km = 1e-9;  // rounds onto the splitter sample
    CHECK_THROWS_AS(params_from_design(d, 1, -10.0, s), std::invalid_argument);
  }
  SECTION("branch past the distance range") {
    d.branches[0].length_km = 10.0;
    CHECK_THROWS_AS(params_from_design(d, 1, -10.0, s), std::out_of_range);
  }
  SECTION("unknown branch") {
    CHECK_THROWS_AS(params_from_design(d, 3, -10.0, s), std::invalid_argument);
  }
  SECTION("disconnected branch") {
    d.branches[0].connected = false;
    CHECK_THROWS_AS(params_from_design(d, 1, -10.0, s), std::invalid_argument);
  }
}

TEST_CASE("slope constant rescales with the grid") {
  CHECK(rayleigh_slope_per_sample(0.5) == kRayleighSlopeBase);
  CHECK(rayleigh_slope_per_sample(5.0) ==
        Catch::Approx(10.0 * kRayleighSlopeBase));
}

TEST_CASE("single connected channel passes through unchanged") {
  const NetworkDesign d = fixtures::single_branch_network();
  const OtdrSettings s = fixtures::short_settings();
  const Trace out = simulate_network(d, std::vector<double>{-12.0}, s);

  const ChannelSimParams p = params_from_design(d, 1, -12.0, s);
  const auto channel = simulate_channel(p);
  const std::size_t splitter = index_of_distance(s, d.feeder_length_km);
  REQUIRE(out.size() == splitter + 1 + channel.size());
  for (std::size_t i = 0; i < channel.size(); ++i)
    CHECK(out[splitter + 1 + i] == Catch::Approx(channel[i]).margin(1e-12));
  // Feeder span runs a Rayleigh line down from the launch level.
  CHECK(out[0] == d.launch_level_db);
  CHECK(out[splitter] < out[0]);
}

TEST_CASE("two equal channels sit 5*log10(2) above one") {
  NetworkDesign d = fixtures::single_branch_network();
  d.splitter_ratio = 2;
  d.branches.push_back(d.branches[0]);
  d.branches[1].id = 2;
  const OtdrSettings s = fixtures::short_settings();

  const Trace one = simulate_network(fixtures::single_branch_network(),
                                     std::vector<double>{-12.0}, s);
  const Trace two = simulate_network(d, std::vector<double>{-12.0, -12.0}, s);
  const std::size_t splitter = index_of_distance(s, d.feeder_length_km);
  const double shift = 5.0 * std::log10(2.0);
  for (std::size_t k = splitter + 1; k < two.size(); ++k)
    CHECK(two[k] - one[k] == Catch::Approx(shift).margin(1e-9));
  CHECK(shift == Catch::Approx(1.505150).margin(1e-6));
}

TEST_CASE("reference network shows eight Fresnel jumps at the design ends") {
  const NetworkDesign d = fixtures::reference_network();
  const OtdrSettings s = fixtures::reference_settings();
  const Trace agg = simulate_network(d, fixtures::reference_y0(), s);
  const std::size_t splitter = index_of_distance(s, d.feeder_length_km);

  int peaks = 0;
  for (const Branch& b : d.branches) {
    const ChannelSimParams p = params_from_design(d, b.id, -10.0, s);
    const std::size_t peak = splitter + p.end_sample + 1;
    if (agg[peak] - agg[peak - 1] >= 10.0) ++peaks;
  }
  CHECK(peaks == 8);
}

TEST_CASE("noiseless simulation is bit-deterministic") {
  const NetworkDesign d = fixtures::reference_network();
  const OtdrSettings s = fixtures::reference_settings(5.0);
  const auto y0 = fixtures::reference_y0();
  const Trace a = simulate_network(d, y0, s);
  const Trace b = simulate_network(d, y0, s);
  REQUIRE(a.size() == b.size());
  for (std::size_t k = 0; k < a.size(); ++k) CHECK(a[k] == b[k]);
}

TEST_CASE("noise is seeded and reproducible") {
  const NetworkDesign d = fixtures::single_branch_network();
  const OtdrSettings s = fixtures::short_settings();
  const std::vector<double> y0{-12.0};
  const Trace a = simulate_network(d, y0, s, 0.1, 42);
  const Trace b = simulate_network(d, y0, s, 0.1, 42);
  const Trace c = simulate_network(d, y0, s, 0.1, 43);
  bool differs = false;
  for (std::size_t k = 0; k < a.size(); ++k) {
    CHECK(a[k] == b[k]);
    differs = differs || a[k] != c[k];
  }
  CHECK(differs);
}

TEST_CASE("y0 vector must match the connected branch count") {
  const NetworkDesign d = fixtures::reference_network();
  const OtdrSettings s = fixtures::reference_settings(5.0);
  CHECK_THROWS_AS(simulate_network(d, std::vector<double>{-10.0}, s),
                  std::invalid_argument);
}

TEST_CASE("default ROI sits between the splitter and the farthest tail") {
  const NetworkDesign d = fixtures::reference_network();
  const OtdrSettings s = fixtures::reference_settings(5.0);
  const RegionOfInterest roi = default_roi(d, s);
  const std::size_t splitter = index_of_distance(s, d.feeder_length_km);
  CHECK(roi.start_index > splitter);
  const std::size_t farthest =
      index_of_distance(s, d.feeder_length_km + d.max_connected_length_km());
  CHECK(roi.end_index == farthest + 15 + 1);
  CHECK(roi.end_index <= s.sample_count());
}
