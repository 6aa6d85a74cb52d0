#pragma once

#include <algorithm>
#include <chrono>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gsgp/backend.hpp"
#include "gsgp/core.hpp"
#include "gsgp/fitness.hpp"
#include "gsgp/init.hpp"
#include "gsgp/interpreter.hpp"
#include "gsgp/mutation.hpp"
#include "gsgp/rng.hpp"

namespace gsgp {

// NaN never appears in a FitnessVector (rmse maps it to +inf), so plain
// comparisons give a total order with the sentinel as the maximum.

/// Index of the smallest fitness, lowest index on ties.
inline std::size_t argmin_fitness(std::span<const double> f) {
  if (f.empty()) throw DimensionError("argmin_fitness: empty fitness vector");
  std::size_t best = 0;
  for (std::size_t i = 1; i < f.size(); ++i)
    if (f[i] < f[best]) best = i;
  return best;
}

/// Index of the largest fitness, lowest index on ties.
inline std::size_t argmax_fitness(std::span<const double> f) {
  if (f.empty()) throw DimensionError("argmax_fitness: empty fitness vector");
  std::size_t worst = 0;
  for (std::size_t i = 1; i < f.size(); ++i)
    if (f[i] > f[worst]) worst = i;
  return worst;
}

/// Semantics on both splits plus train fitness for a whole population.
struct PopulationState {
  SemanticMatrix train;
  SemanticMatrix test;
  FitnessVector fitness;

  friend bool operator==(const PopulationState&, const PopulationState&) = default;
};

namespace detail {

inline void copy_row(const SemanticMatrix& from, std::size_t src, SemanticMatrix& to,
                     std::size_t dst) {
  auto s = from.row(src);
  std::copy(s.begin(), s.end(), to.row(dst).begin());
}

}  // namespace detail

/// Generational replacement with single-individual elitism, in place: the
/// offspring become the next population unless the best parent is strictly
/// better than the best offspring, in which case it overwrites the worst
/// offspring slot.
inline EliteRecord survive_in_place(const PopulationState& parent, PopulationState& offspring) {
  if (parent.fitness.size() != offspring.fitness.size() ||
      parent.train.rows() != offspring.train.rows() ||
      parent.train.cols() != offspring.train.cols() ||
      parent.test.rows() != offspring.test.rows() || parent.test.cols() != offspring.test.cols())
    throw DimensionError("survive: parent and offspring states differ in shape");

  EliteRecord rec;
  rec.parent_index = argmin_fitness(parent.fitness);
  const std::size_t best_offspring = argmin_fitness(offspring.fitness);
  if (parent.fitness[rec.parent_index] < offspring.fitness[best_offspring]) {
    rec.source = EliteSource::Parent;
    rec.replaced_slot = argmax_fitness(offspring.fitness);
    detail::copy_row(parent.train, rec.parent_index, offspring.train, rec.replaced_slot);
    detail::copy_row(parent.test, rec.parent_index, offspring.test, rec.replaced_slot);
    offspring.fitness[rec.replaced_slot] = parent.fitness[rec.parent_index];
  } else {
    rec.source = EliteSource::Offspring;
  }
  rec.elite_index = argmin_fitness(offspring.fitness);
  rec.fitness = offspring.fitness[rec.elite_index];
  return rec;
}

inline std::pair<PopulationState, EliteRecord> survive(const PopulationState& parent,
                                                       PopulationState offspring) {
  EliteRecord rec = survive_in_place(parent, offspring);
  return {std::move(offspring), rec};
}

struct StageTimings {
  double load_ms = 0.0;
  double create_population_ms = 0.0;
  double compute_semantics_ms = 0.0;
  double generation_ms = 0.0;  // mean over generations; 0 when g == 0
  double evolution_ms = 0.0;   // all generations
  double total_ms = 0.0;
};

struct RunResult {
  std::vector<double> train_trace;  // elite train RMSE, generation 0..g
  std::vector<double> test_trace;   // same elite's test RMSE
  LineageLog lineage;
  StageTimings timings;
  std::size_t elite_index = 0;
  std::vector<double> elite_train_semantics;
  std::vector<double> elite_test_semantics;
  std::size_t non_finite_outputs = 0;
};

namespace detail {

using Clock = std::chrono::steady_clock;

inline double millis_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

inline void check_run_inputs(const RunConfig& cfg, const Dataset& train, const Dataset& test) {
  cfg.validate();
  train.validate();
  test.validate();
  if (train.cases() == 0) throw DataError("training set has no fitness cases");
  if (test.cases() == 0) throw DataError("test set has no fitness cases");
  if (train.feature_count() != test.feature_count())
    throw DataError("train and test feature counts differ (" +
                    std::to_string(train.feature_count()) + " vs " +
                    std::to_string(test.feature_count()) + ")");
  if (cfg.expected_cases != 0 && cfg.expected_cases != train.cases())
    throw DataError("configured fitness case count " + std::to_string(cfg.expected_cases) +
                    " differs from the training set (" + std::to_string(train.cases()) + ")");
  if (cfg.expected_features != 0 && cfg.expected_features != train.feature_count())
    throw DataError("configured feature count " + std::to_string(cfg.expected_features) +
                    " differs from the training set (" +
                    std::to_string(train.feature_count()) + ")");
}

}  // namespace detail

/// Initial population and random-tree genomes for cfg.seed.
struct InitialStructures {
  Population population;
  Population random_trees;
};

inline InitialStructures create_initial_structures(const RunConfig& cfg,
                                                   std::size_t feature_count,
                                                   Backend& backend) {
  return {create_population(cfg.population_size, cfg, feature_count, streams::kPopulation,
                            backend),
          create_population(cfg.tree_count(), cfg, feature_count, streams::kRandomTrees,
                            backend)};
}

/// Full GSGP run: initialise, evaluate, then g rounds of
/// plan -> GSM on train and test -> fitness -> elitist survival.
/// Test RMSE is only observed for the train elite, never used for selection.
inline RunResult run_evolution(const RunConfig& cfg, const Dataset& train, const Dataset& test,
                               Backend& backend) {
  detail::check_run_inputs(cfg, train, test);
  const auto run_start = detail::Clock::now();
  const std::size_t m = cfg.population_size;
  const std::size_t r = cfg.tree_count();

  RunResult result;
  auto t0 = detail::Clock::now();
  const InitialStructures init = create_initial_structures(cfg, train.feature_count(), backend);
  result.timings.create_population_ms = detail::millis_since(t0);

  t0 = detail::Clock::now();
  Semantics pop_train = compute_semantics(init.population, train, cfg, backend);
  Semantics pop_test = compute_semantics(init.population, test, cfg, backend);
  Semantics trees_train = compute_semantics(init.random_trees, train, cfg, backend);
  Semantics trees_test = compute_semantics(init.random_trees, test, cfg, backend);
  result.timings.compute_semantics_ms = detail::millis_since(t0);
  result.non_finite_outputs = pop_train.non_finite + pop_test.non_finite +
                              trees_train.non_finite + trees_test.non_finite;

  const SemanticMatrix squashed_train = squash(trees_train.values, backend);
  const SemanticMatrix squashed_test = squash(trees_test.values, backend);

  PopulationState parent{std::move(pop_train.values), std::move(pop_test.values), {}};
  parent.fitness = compute_fitness(parent.train, train.target, backend);

  result.lineage.seed = cfg.seed;
  result.lineage.population_size = m;
  result.lineage.random_trees = r;
  result.lineage.program_size = cfg.program_size;
  result.lineage.generations = cfg.generations;
  result.lineage.entries.reserve(cfg.generations);

  std::size_t elite = argmin_fitness(parent.fitness);
  result.lineage.initial_elite = elite;
  result.train_trace.reserve(cfg.generations + 1);
  result.test_trace.reserve(cfg.generations + 1);
  result.train_trace.push_back(parent.fitness[elite]);
  result.test_trace.push_back(rmse(parent.test.row(elite), test.target));

  PopulationState offspring{SemanticMatrix(m, train.cases()), SemanticMatrix(m, test.cases()),
                            {}};
  const auto evo_start = detail::Clock::now();
  for (std::size_t gen = 1; gen <= cfg.generations; ++gen) {
    MutationPlan plan = build_mutation_plan(m, r, cfg, gen, backend);
    gsm_squashed_into(parent.train, squashed_train, plan, cfg.gsm_sign, offspring.train,
                      backend);
    gsm_squashed_into(parent.test, squashed_test, plan, cfg.gsm_sign, offspring.test, backend);
    offspring.fitness = compute_fitness(offspring.train, train.target, backend);
    const EliteRecord rec = survive_in_place(parent, offspring);
    std::swap(parent, offspring);
    elite = rec.elite_index;
    result.train_trace.push_back(rec.fitness);
    result.test_trace.push_back(rmse(parent.test.row(elite), test.target));
    result.lineage.entries.push_back({std::move(plan), rec});
  }
  result.timings.evolution_ms = detail::millis_since(evo_start);
  if (cfg.generations > 0)
    result.timings.generation_ms =
        result.timings.evolution_ms / static_cast<double>(cfg.generations);

  result.elite_index = elite;
  auto tr = parent.train.row(elite);
  auto te = parent.test.row(elite);
  result.elite_train_semantics.assign(tr.begin(), tr.end());
  result.elite_test_semantics.assign(te.begin(), te.end());
  result.timings.total_ms = detail::millis_since(run_start);
  return result;
}

inline RunResult run_evolution(const RunConfig& cfg, const Dataset& train, const Dataset& test) {
  Backend backend = Backend::from_config(cfg);
  return run_evolution(cfg, train, test, backend);
}

struct ReplayResult {
  std::size_t elite_index = 0;
  std::vector<double> elite_semantics;
};

/// Rebuilds the final elite's semantics from the initial population semantics,
/// the raw random-tree semantics and the logged plans and survival decisions.
/// Every logged plan is checked against the plan cfg regenerates, so a log
/// replayed under a different seed or size is rejected.
inline ReplayResult replay_lineage(const LineageLog& log, const SemanticMatrix& initial,
                                   const SemanticMatrix& trees, const RunConfig& cfg,
                                   Backend& backend) {
  if (log.seed != cfg.seed)
    throw LineageError("lineage seed " + std::to_string(log.seed) +
                       " differs from configured seed " + std::to_string(cfg.seed));
  if (initial.rows() != log.population_size || trees.rows() != log.random_trees)
    throw LineageError("semantic matrices do not match the lineage population sizes");
  if (log.entries.size() < log.generations)
    throw LineageError("truncated lineage: " + std::to_string(log.entries.size()) + " of " +
                       std::to_string(log.generations) + " generations");
  if (log.entries.size() > log.generations)
    throw LineageError("lineage has more entries than configured generations");
  if (log.initial_elite >= initial.rows()) throw LineageError("initial elite out of range");

  const SemanticMatrix squashed = squash(trees, backend);
  SemanticMatrix current = initial;
  SemanticMatrix next(initial.rows(), initial.cols());
  std::size_t elite = log.initial_elite;
  for (std::size_t t = 0; t < log.entries.size(); ++t) {
    const auto& entry = log.entries[t];
    if (entry.plan != build_mutation_plan(log.population_size, log.random_trees, cfg, t + 1,
                                          backend))
      throw LineageError("plan for generation " + std::to_string(t + 1) +
                         " does not match the configured random streams");
    gsm_squashed_into(current, squashed, entry.plan, cfg.gsm_sign, next, backend);
    const auto& rec = entry.elite;
    if (rec.source == EliteSource::Parent) {
      if (rec.parent_index >= current.rows() || rec.replaced_slot >= current.rows())
        throw LineageError("survival record out of range");
      detail::copy_row(current, rec.parent_index, next, rec.replaced_slot);
    }
    if (rec.elite_index >= current.rows()) throw LineageError("elite index out of range");
    std::swap(current, next);
    elite = rec.elite_index;
  }
  auto row = current.row(elite);
  return {elite, std::vector<double>(row.begin(), row.end())};
}

}  // namespace gsgp
