#include <catch2/catch_amalgamated.hpp>

#include <atomic>
#include <cmath>
#include <vector>

#include "ponsep/de.hpp"

using namespace ponsep;

namespace {

constexpr double kWide = 1e9;

double sphere(const std::vector<double>& x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return s;
}

DeConfig sphere_config(std::uint64_t seed = 1, int workers = 1) {
  DeConfig cfg;
  cfg.population_size = 100;
  cfg.generations = 400;
  cfg.crossover_rate = 0.9;
  cfg.scale_factor = 0.5;
  cfg.seed = seed;
  cfg.workers = workers;
  cfg.bounds.assign(4, Bounds{-5.0, 5.0});
  return cfg;
}

}  // namespace

TEST_CASE("mutate applies the differential step") {
  const std::vector<double> r1{1.0, 2.0}, r2{3.0, 4.0}, r3{1.0, 1.0};
  const std::vector<Bounds> wide(2, Bounds{-kWide, kWide});
  const auto u = mutate(r1, r2, r3, 0.05, wide);
  CHECK(u[0] == Catch::Approx(1.1).margin(1e-12));
  CHECK(u[1] == Catch::Approx(2.15).margin(1e-12));
}

TEST_CASE("mutate degenerate cases") {
  const std::vector<double> r1{1.0, 2.0}, r2{3.0, 4.0}, r3{1.0, 1.0};
  const std::vector<Bounds> wide(2, Bounds{-kWide, kWide});
  SECTION("zero scale factor returns the base vector") {
    CHECK(mutate(r1, r2, r3, 0.0, wide) == r1);
  }
  SECTION("equal difference donors return the base vector") {
    CHECK(mutate(r1, r2, r2, 0.7, wide) == r1);
  }
  SECTION("dimension mismatch") {
    const std::vector<double> shorter{1.0};
    CHECK_THROWS_AS(mutate(shorter, r2, r3, 0.5, wide), std::invalid_argument);
  }
}

TEST_CASE("mutants are clamped into bounds") {
  const std::vector<double> r1{0.9}, r2{1.0}, r3{0.0};
  const std::vector<Bounds> unit{{0.0, 1.0}};
  const auto u = mutate(r1, r2, r3, 0.5, unit);
  CHECK(u[0] == 1.0);
  const auto v = mutate(std::vector<double>{0.1}, r3, r2, 0.5, unit);
  CHECK(v[0] == 0.0);
}

TEST_CASE("crossover with rate 1 copies the mutant") {
  Rng rng(3);
  const std::vector<double> target{1.0, 2.0, 3.0}, mutant{9.0, 8.0, 7.0};
  for (int round = 0; round < 20; ++round) {
    const auto trial =
        crossover(target, mutant, 1.0, rng.below(3), [&] { return rng.uniform01(); });
    CHECK(trial == mutant);
  }
}

TEST_CASE("crossover with rate 0 keeps only the forced component") {
  Rng rng(4);
  const std::vector<double> target{1.0, 2.0, 3.0}, mutant{9.0, 8.0, 7.0};
  for (std::size_t delta = 0; delta < 3; ++delta) {
    const auto trial =
        crossover(target, mutant, 0.0, delta, [&] { return rng.uniform01(); });
    for (std::size_t j = 0; j < 3; ++j)
      CHECK(trial[j] == (j == delta ? mutant[j] : target[j]));
  }
}

TEST_CASE("one-dimensional crossover always inherits the mutant") {
  Rng rng(5);
  const std::vector<double> target{1.0}, mutant{9.0};
  const auto trial = crossover(target, mutant, 0.0, 0, [&] { return rng.uniform01(); });
  CHECK(trial == mutant);
}

TEST_CASE("selection is greedy with ties to the trial") {
  auto make = [](double f) {
    Individual ind;
    ind.genome = {f};
    ind.fitness = f;
    ind.evaluated = true;
    return ind;
  };
  CHECK(select(make(5.0), make(3.0)).fitness == 3.0);
  {
    const Individual target = make(5.0), trial = make(5.0);
    CHECK(&select(target, trial) == &trial);  // <= accepts equal fitness
  }
  CHECK(select(make(5.0), make(7.0)).fitness == 5.0);

  Individual raw;
  raw.genome = {0.0};
  CHECK_THROWS_AS(select(make(1.0), raw), std::invalid_argument);

  Individual poisoned = make(std::nan(""));
  poisoned.evaluated = true;
  CHECK(select(make(5.0), poisoned).fitness == 5.0);
}

TEST_CASE("schedules draw distinct donors and valid indices") {
  Rng rng(11);
  for (int round = 0; round < 50; ++round) {
    const auto schedule = draw_generation_schedule(rng, 12, 5);
    REQUIRE(schedule.size() == 12);
    for (std::size_t i = 0; i < schedule.size(); ++i) {
      const TrialSchedule& s = schedule[i];
      CHECK(s.r1 != i);
      CHECK(s.r2 != i);
      CHECK(s.r3 != i);
      CHECK(s.r1 != s.r2);
      CHECK(s.r1 != s.r3);
      CHECK(s.r2 != s.r3);
      CHECK(s.r1 < 12);
      CHECK(s.forced_index < 5);
      REQUIRE(s.crossover_draws.size() == 5);
      for (double u : s.crossover_draws) {
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
      }
    }
  }
}

TEST_CASE("run solves the 4-D sphere") {
  const DeResult result = run(sphere, sphere_config());
  CHECK(result.best.fitness < 1e-6);
  CHECK(result.history.size() == 401);
  CHECK(result.generations_used == 400);
}

TEST_CASE("history never increases") {
  const DeResult result = run(sphere, sphere_config(7));
  for (std::size_t g = 1; g < result.history.size(); ++g)
    CHECK(result.history[g] <= result.history[g - 1]);
}

TEST_CASE("zero generations returns the best of the initial draw") {
  DeConfig cfg = sphere_config();
  cfg.generations = 0;
  const DeResult result = run(sphere, cfg);
  CHECK(result.history.size() == 1);
  CHECK(result.generations_used == 0);
  CHECK(result.best.fitness >= 0.0);
}

TEST_CASE("constant objective yields a flat history") {
  DeConfig cfg = sphere_config();
  cfg.generations = 25;
  const DeResult result =
      run([](const std::vector<double>&) { return 3.25; }, cfg);
  for (double f : result.history) CHECK(f == 3.25);
}

TEST_CASE("identical seeds reproduce bit-identical runs for any worker count") {
  const DeResult w1 = run(sphere, sphere_config(42, 1));
  const DeResult w2 = run(sphere, sphere_config(42, 2));
  const DeResult w4 = run(sphere, sphere_config(42, 4));
  CHECK(w1.best.genome == w2.best.genome);
  CHECK(w1.best.genome == w4.best.genome);
  CHECK(w1.best.fitness == w2.best.fitness);
  CHECK(w1.best.fitness == w4.best.fitness);
  CHECK(w1.history == w2.history);
  CHECK(w1.history == w4.history);
}

TEST_CASE("every evaluated genome stays inside bounds") {
  std::atomic<bool> violated{false};
  DeConfig cfg = sphere_config(9, 4);
  cfg.generations = 60;
  auto spy = [&](const std::vector<double>& x) {
    for (double v : x)
      if (v < -5.0 || v > 5.0) violated = true;
    return sphere(x);
  };
  run(spy, cfg);
  CHECK_FALSE(violated.load());
}

TEST_CASE("NaN objectives are rejected unconditionally") {
  DeConfig cfg = sphere_config(13);
  cfg.generations = 80;
  cfg.bounds.assign(2, Bounds{-5.0, 5.0});
  auto half_nan = [](const std::vector<double>& x) {
    if (x[0] < 0.0) return std::nan("");
    return x[0] * x[0] + x[1] * x[1];
  };
  const DeResult result = run(half_nan, cfg);
  CHECK(std::isfinite(result.best.fitness));
  CHECK(result.best.genome[0] >= 0.0);
  for (std::size_t g = 1; g < result.history.size(); ++g)
    CHECK(result.history[g] <= result.history[g - 1]);
}

TEST_CASE("early stop truncates the loop") {
  DeConfig cfg = sphere_config(21);
  const DeResult result =
      run(sphere, cfg, [](int gen, const Individual&) { return gen >= 10; });
  CHECK(result.generations_used == 10);
  CHECK(result.history.size() == 11);
}

TEST_CASE("config validation") {
  DeConfig cfg = sphere_config();
  cfg.population_size = 3;
  CHECK_THROWS_AS(validate(cfg), std::invalid_argument);
  cfg = sphere_config();
  cfg.crossover_rate = 1.5;
  CHECK_THROWS_AS(validate(cfg), std::invalid_argument);
  cfg = sphere_config();
  cfg.bounds[2] = Bounds{1.0, 1.0};
  CHECK_THROWS_AS(validate(cfg), std::invalid_argument);
  cfg = sphere_config();
  cfg.scale_factor = 0.0;
  CHECK_THROWS_AS(validate(cfg), std::invalid_argument);
}
