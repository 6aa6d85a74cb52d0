#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "gsgp/backend.hpp"
#include "gsgp/core.hpp"
#include "gsgp/evolution.hpp"
#include "gsgp/io.hpp"
#include "gsgp/rng.hpp"

namespace gsgp {

/// n cases of l features drawn uniformly from [-1, 1), target
/// x0 * x1 + sum_j x_j^2. Used for benchmarking where only the shape matters.
inline Dataset make_synthetic_dataset(std::size_t n, std::size_t l, std::uint64_t seed) {
  Dataset d{Matrix<double>(n, l), std::vector<double>(n)};
  for (std::size_t i = 0; i < n; ++i) {
    double t = 0.0;
    for (std::size_t j = 0; j < l; ++j) {
      const double x = 2.0 * rng_stream(seed, streams::kSynthetic + i, j) - 1.0;
      d.features(i, j) = x;
      t += x * x;
    }
    if (l >= 2) t += d.features(i, 0) * d.features(i, 1);
    d.target[i] = t;
  }
  return d;
}

struct TimedRun {
  StageTimings timings;
  RunResult result;
};

/// run_evolution with the load time folded into the timings.
inline TimedRun timed_run(const RunConfig& cfg, const Dataset& train, const Dataset& test,
                          Backend& backend, double load_ms = 0.0) {
  TimedRun out{{}, run_evolution(cfg, train, test, backend)};
  out.timings = out.result.timings;
  out.timings.load_ms = load_ms;
  out.timings.total_ms += load_ms;
  return out;
}

/// Loads both datasets inside the timed region.
inline TimedRun timed_run(const RunConfig& cfg, const fs::path& train_path,
                          const fs::path& test_path, Backend& backend) {
  const auto start = detail::Clock::now();
  const Dataset train = load_dataset(train_path);
  const Dataset test = load_dataset(test_path);
  return timed_run(cfg, train, test, backend, detail::millis_since(start));
}

struct BackendChoice {
  BackendKind kind = BackendKind::Sequential;
  std::size_t workers = 1;
};

struct SweepGrid {
  std::vector<std::size_t> population_sizes;  // m
  std::vector<std::size_t> cases;             // n (training); test uses n / 4, at least 1
  std::vector<std::size_t> program_sizes;     // k
  std::vector<BackendChoice> backends;
  std::size_t features = 8;
  RunConfig base{};  // generations, seed, etc.
};

struct SweepRow {
  std::size_t m = 0, n = 0, k = 0;
  std::string backend;
  std::size_t workers = 1;
  StageTimings timings;
  double best_train_fitness = kWorstFitness;
  std::string error;  // empty on success
};

/// One timed_run per grid cell, run one after another.
inline std::vector<SweepRow> sweep(const SweepGrid& grid) {
  if (grid.population_sizes.empty() || grid.cases.empty() || grid.program_sizes.empty() ||
      grid.backends.empty())
    throw ConfigError("sweep grid has an empty axis");
  std::vector<SweepRow> rows;
  for (const auto n : grid.cases) {
    // Same data for every cell that shares n.
    const Dataset train = make_synthetic_dataset(n, grid.features, grid.base.seed);
    const Dataset test = make_synthetic_dataset(std::max<std::size_t>(1, n / 4), grid.features,
                                                grid.base.seed + 1);
    for (const auto m : grid.population_sizes) {
      for (const auto k : grid.program_sizes) {
        for (const auto& bc : grid.backends) {
          SweepRow row;
          row.m = m;
          row.n = n;
          row.k = k;
          row.backend = bc.kind == BackendKind::Sequential ? "sequential" : "parallel";
          row.workers = bc.kind == BackendKind::Sequential ? 1 : bc.workers;
          try {
            RunConfig cfg = grid.base;
            cfg.population_size = m;
            cfg.program_size = k;
            Backend backend = bc.kind == BackendKind::Sequential ? Backend::sequential()
                                                                 : Backend::parallel(bc.workers);
            row.workers = backend.workers();
            const auto t = timed_run(cfg, train, test, backend);
            row.timings = t.timings;
            row.best_train_fitness = t.result.train_trace.back();
          } catch (const std::exception& e) {
            row.error = e.what();
          }
          rows.push_back(std::move(row));
        }
      }
    }
  }
  return rows;
}

/// Columns m,n,k,backend,workers,stage,millis; a failed cell emits one row
/// with stage "error" and millis "nan".
inline void write_sweep_csv(const std::vector<SweepRow>& rows, std::ostream& os) {
  os << "m,n,k,backend,workers,stage,millis\n";
  for (const auto& r : rows) {
    const std::string prefix = std::to_string(r.m) + ',' + std::to_string(r.n) + ',' +
                               std::to_string(r.k) + ',' + r.backend + ',' +
                               std::to_string(r.workers) + ',';
    if (!r.error.empty()) {
      os << prefix << "error,nan\n";
      continue;
    }
    os << prefix << "create_population," << r.timings.create_population_ms << '\n'
       << prefix << "compute_semantics," << r.timings.compute_semantics_ms << '\n'
       << prefix << "generation," << r.timings.generation_ms << '\n'
       << prefix << "total," << r.timings.total_ms << '\n';
  }
}

}  // namespace gsgp
