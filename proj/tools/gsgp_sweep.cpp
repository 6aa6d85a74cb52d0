#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gsgp/harness.hpp"

// Stage timing sweep over synthetic data; prints CSV.
int main(int argc, char** argv) {
  CLI::App app{"gsgp_sweep: stage timings over a grid of population size, cases, program size "
               "and backend"};

  std::vector<std::size_t> m{256}, n{1000}, k{127};
  std::vector<std::string> backends{"sequential", "parallel"};
  std::size_t features = 8, generations = 5, random_trees = 0, threads = 0;
  std::uint64_t seed = 1;
  std::string out_path;

  app.add_option("-m,--population", m, "population sizes")->delimiter(',');
  app.add_option("-n,--cases", n, "training case counts")->delimiter(',');
  app.add_option("-k,--program-size", k, "program sizes")->delimiter(',');
  app.add_option("-b,--backend", backends, "sequential and/or parallel[:WORKERS]")
      ->delimiter(',');
  app.add_option("--features", features, "feature count of the synthetic data");
  app.add_option("--generations", generations, "generations per cell");
  app.add_option("--random-trees", random_trees, "random tree count (0 = population size)");
  app.add_option("--threads", threads, "default parallel worker count (0 = all cores)");
  app.add_option("--seed", seed, "seed");
  app.add_option("-o,--output", out_path, "CSV file (default stdout)");
  CLI11_PARSE(app, argc, argv);

  gsgp::SweepGrid grid;
  grid.population_sizes = m;
  grid.cases = n;
  grid.program_sizes = k;
  grid.features = features;
  grid.base.generations = generations;
  grid.base.random_trees = random_trees;
  grid.base.seed = seed;
  for (const auto& b : backends) {
    if (b == "sequential") {
      grid.backends.push_back({gsgp::BackendKind::Sequential, 1});
    } else if (b.rfind("parallel", 0) == 0) {
      std::size_t workers = threads;
      if (b.size() > 8) {
        if (b[8] != ':') {
          std::cerr << "bad backend '" << b << "'\n";
          return 2;
        }
        workers = std::stoul(b.substr(9));
      }
      grid.backends.push_back({gsgp::BackendKind::Parallel, workers});
    } else {
      std::cerr << "bad backend '" << b << "'\n";
      return 2;
    }
  }

  try {
    const auto rows = gsgp::sweep(grid);
    if (out_path.empty()) {
      gsgp::write_sweep_csv(rows, std::cout);
    } else {
      std::ofstream os(out_path);
      if (!os) {
        std::cerr << "cannot write " << out_path << '\n';
        return 1;
      }
      gsgp::write_sweep_csv(rows, os);
    }
    for (const auto& r : rows)
      if (!r.error.empty()) std::cerr << "cell m=" << r.m << " n=" << r.n << " k=" << r.k
                                      << " " << r.backend << ": " << r.error << '\n';
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
