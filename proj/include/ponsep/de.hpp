#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <limits>
#include <mutex>
#include <span>
#include <stdexcept>
#include <thread>
#include <utility>
#include <vector>

#include "ponsep/random.hpp"

namespace ponsep {

// Classical differential evolution (rand/1 mutation, binomial crossover with
// one forced component, greedy selection) over fixed-length real vectors.

struct Bounds {
  double lo = 0.0;
  double hi = 0.0;
};

struct DeConfig {
  int population_size = 100;   // N
  int generations = 400;       // G
  double crossover_rate = 0.3; // C
  double scale_factor = 0.05;  // eta
  std::uint64_t seed = 1;
  int workers = 1;
  std::vector<Bounds> bounds;  // one per genome dimension
};

struct Individual {
  std::vector<double> genome;
  double fitness = std::numeric_limits<double>::quiet_NaN();
  bool evaluated = false;
};

struct DeResult {
  Individual best;
  // Best fitness after initialization plus one entry per generation run.
  std::vector<double> history;
  int generations_used = 0;
};

// Called after each generation; returning true stops the run early.
using EarlyStop = std::function<bool(int generation, const Individual& best)>;

inline void validate(const DeConfig& cfg) {
  if (cfg.population_size < 4)
    throw std::invalid_argument("DeConfig: population must hold the target plus 3 donors");
  if (cfg.generations < 0)
    throw std::invalid_argument("DeConfig: negative generation count");
  if (!(cfg.crossover_rate >= 0.0) || !(cfg.crossover_rate <= 1.0))
    throw std::invalid_argument("DeConfig: crossover rate outside [0, 1]");
  if (!(cfg.scale_factor > 0.0))
    throw std::invalid_argument("DeConfig: scale factor must be > 0");
  if (cfg.workers < 1)
    throw std::invalid_argument("DeConfig: workers must be >= 1");
  if (cfg.bounds.empty())
    throw std::invalid_argument("DeConfig: bounds missing");
  for (const Bounds& b : cfg.bounds)
    if (!(b.lo < b.hi))
      throw std::invalid_argument("DeConfig: each bound needs lo < hi");
}

// Differential mutation u = r1 + eta * (r2 - r3), clamped into bounds.
inline std::vector<double> mutate(std::span<const double> r1,
                                  std::span<const double> r2,
                                  std::span<const double> r3, double eta,
                                  std::span<const Bounds> bounds) {
  if (r1.size() != r2.size() || r1.size() != r3.size() ||
      r1.size() != bounds.size())
    throw std::invalid_argument("mutate: dimension mismatch");
  std::vector<double> mutant(r1.size());
  for (std::size_t j = 0; j < r1.size(); ++j)
    mutant[j] =
        std::clamp(r1[j] + eta * (r2[j] - r3[j]), bounds[j].lo, bounds[j].hi);
  return mutant;
}

// Binomial crossover. Component j is copied from the mutant when the uniform
// draw is <= rate or j is the forced index (0-based), so at least one mutant
// component always survives into the trial. Exactly one draw is consumed per
// component.
template <typename UniformFn>
std::vector<double> crossover(std::span<const double> target,
                              std::span<const double> mutant, double rate,
                              std::size_t forced_index, UniformFn&& u01) {
  if (target.size() != mutant.size())
    throw std::invalid_argument("crossover: dimension mismatch");
  if (forced_index >= target.size())
    throw std::invalid_argument("crossover: forced index out of range");
  std::vector<double> trial(target.size());
  for (std::size_t j = 0; j < target.size(); ++j) {
    const double u = u01();
    trial[j] = (u <= rate || j == forced_index) ? mutant[j] : target[j];
  }
  return trial;
}

// Greedy selection; ties go to the trial. NaN-fitness trials never survive.
inline const Individual& select(const Individual& target,
                                const Individual& trial) {
  if (!target.evaluated || !trial.evaluated)
    throw std::invalid_argument("select: unevaluated individual");
  if (std::isnan(trial.fitness)) return target;
  if (std::isnan(target.fitness)) return trial;
  return trial.fitness <= target.fitness ? trial : target;
}

// Random choices for one trial: three donor rows (mutually distinct and
// distinct from the target), the forced crossover component, and one uniform
// draw per component.
struct TrialSchedule {
  std::size_t r1 = 0, r2 = 0, r3 = 0;
  std::size_t forced_index = 0;
  std::vector<double> crossover_draws;
};

// All random choices of a generation, drawn serially up front. Fitness
// evaluations can then run on any number of workers without touching the RNG,
// which is what makes the worker count affect speed only.
inline std::vector<TrialSchedule> draw_generation_schedule(Rng& rng,
                                                           std::size_t pop_size,
                                                           std::size_t dim) {
  std::vector<TrialSchedule> schedule(pop_size);
  for (std::size_t i = 0; i < pop_size; ++i) {
    TrialSchedule& s = schedule[i];
    do s.r1 = rng.below(pop_size); while (s.r1 == i);
    do s.r2 = rng.below(pop_size); while (s.r2 == i || s.r2 == s.r1);
    do s.r3 = rng.below(pop_size); while (s.r3 == i || s.r3 == s.r1 || s.r3 == s.r2);
    s.forced_index = rng.below(dim);
    s.crossover_draws.resize(dim);
    for (double& u : s.crossover_draws) u = rng.uniform01();
  }
  return schedule;
}

namespace detail {

// Runs fn(0..count-1) on up to `workers` threads. Each index writes its own
// slot, so the outcome is identical for any worker count.
template <typename Fn>
void parallel_for(std::size_t count, int workers, Fn&& fn) {
  if (workers <= 1 || count < 2) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  const std::size_t n_threads =
      std::min<std::size_t>(static_cast<std::size_t>(workers), count);
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(n_threads - 1);
  for (std::size_t t = 0; t + 1 < n_threads; ++t) pool.emplace_back(worker);
  worker();
  for (std::thread& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

inline bool better_fitness(const Individual& a, const Individual& b) {
  return a.fitness < b.fitness;
}

}  // namespace detail

// Full DE loop. The objective must be pure; NaN objective values are treated
// as unconditional rejections. Returns the best individual ever evaluated and
// the per-generation best-fitness history (initial population first).
template <typename Objective>
DeResult run(Objective&& objective, const DeConfig& cfg,
             const EarlyStop& early_stop = {}) {
  validate(cfg);
  const std::size_t pop_size = static_cast<std::size_t>(cfg.population_size);
  const std::size_t dim = cfg.bounds.size();
  Rng rng(cfg.seed);

  std::vector<Individual> population(pop_size);
  for (Individual& ind : population) {
    ind.genome.resize(dim);
    for (std::size_t j = 0; j < dim; ++j)
      ind.genome[j] = rng.uniform(cfg.bounds[j].lo, cfg.bounds[j].hi);
  }
  detail::parallel_for(pop_size, cfg.workers, [&](std::size_t i) {
    population[i].fitness = objective(population[i].genome);
    population[i].evaluated = true;
  });
  // NaN draws in the initial population lose every comparison.
  for (Individual& ind : population)
    if (std::isnan(ind.fitness))
      ind.fitness = std::numeric_limits<double>::infinity();

  DeResult result;
  result.best = *std::min_element(population.begin(), population.end(),
                                  detail::better_fitness);
  result.history.reserve(static_cast<std::size_t>(cfg.generations) + 1);
  result.history.push_back(result.best.fitness);

  std::vector<Individual> trials(pop_size);
  for (int gen = 1; gen <= cfg.generations; ++gen) {
    const std::vector<TrialSchedule> schedule =
        draw_generation_schedule(rng, pop_size, dim);
    for (std::size_t i = 0; i < pop_size; ++i) {
      const TrialSchedule& s = schedule[i];
      const std::vector<double> mutant =
          mutate(population[s.r1].genome, population[s.r2].genome,
                 population[s.r3].genome, cfg.scale_factor, cfg.bounds);
      std::size_t draw = 0;
      trials[i].genome =
          crossover(population[i].genome, mutant, cfg.crossover_rate,
                    s.forced_index, [&] { return s.crossover_draws[draw++]; });
      trials[i].evaluated = false;
    }
    detail::parallel_for(pop_size, cfg.workers, [&](std::size_t i) {
      trials[i].fitness = objective(trials[i].genome);
      trials[i].evaluated = true;
    });
    for (std::size_t i = 0; i < pop_size; ++i) {
      const Individual& winner = select(population[i], trials[i]);
      if (&winner != &population[i]) population[i] = winner;
      if (population[i].fitness < result.best.fitness)
        result.best = population[i];
    }
    result.history.push_back(result.best.fitness);
    result.generations_used = gen;
    if (early_stop && early_stop(gen, result.best)) break;
  }
  return result;
}

}  // namespace ponsep
