#pragma once

#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "gsgp/backend.hpp"
#include "gsgp/core.hpp"
#include "gsgp/evolution.hpp"
#include "gsgp/harness.hpp"
#include "gsgp/io.hpp"
#include "gsgp/rng.hpp"

namespace gsgp {

inline constexpr const char* kUsage =
    "usage: gsgp -train_file FILE -test_file FILE [options]\n"
    "       gsgp -replay LINEAGE -train_file FILE [-config FILE]\n"
    "\n"
    "options:\n"
    "  -config FILE       key=value run parameters (defaults apply when omitted)\n"
    "  -output_dir DIR    where traces, lineage and timing files are written (default .)\n"
    "  -seed N            base seed; run i uses a seed derived from N and i\n"
    "  -backend NAME      sequential | parallel\n"
    "  -threads N         worker count for the parallel backend (0 = all cores)\n"
    "  -replay FILE       rebuild the final elite from a lineage file and print its train RMSE\n"
    "  -help              show this text\n";

namespace detail {

struct CliArgs {
  std::map<std::string, std::string> values;
  bool help = false;
};

inline CliArgs parse_cli(std::span<const std::string> args) {
  static const char* const kFlags[] = {"-train_file", "-test_file", "-config", "-output_dir",
                                       "-seed",       "-backend",   "-threads", "-replay"};
  CliArgs out;
  for (std::size_t i = 0; i < args.size(); ++i) {
    const std::string& a = args[i];
    if (a == "-help" || a == "--help" || a == "-h") {
      out.help = true;
      continue;
    }
    bool known = false;
    for (const char* f : kFlags) known = known || a == f;
    if (!known) throw ConfigError("unknown argument '" + a + "'");
    if (i + 1 >= args.size()) throw ConfigError("missing value for " + a);
    out.values[a] = args[++i];
  }
  return out;
}

inline void apply_overrides(const CliArgs& cli, RunConfig& cfg) {
  if (auto it = cli.values.find("-seed"); it != cli.values.end()) {
    const auto v = text::parse_unsigned<std::uint64_t>(it->second);
    if (!v) throw ConfigError("-seed expects an unsigned integer");
    cfg.seed = *v;
  }
  if (auto it = cli.values.find("-backend"); it != cli.values.end()) {
    if (it->second == "sequential") cfg.backend = BackendKind::Sequential;
    else if (it->second == "parallel") cfg.backend = BackendKind::Parallel;
    else throw ConfigError("-backend expects 'sequential' or 'parallel'");
  }
  if (auto it = cli.values.find("-threads"); it != cli.values.end()) {
    const auto v = text::parse_unsigned<std::size_t>(it->second);
    if (!v) throw ConfigError("-threads expects a non-negative integer");
    cfg.threads = *v;
  }
}

inline int run_replay(const CliArgs& cli, RunConfig cfg, std::ostream& out) {
  const LineageLog log = load_lineage(cli.values.at("-replay"));
  const Dataset train = load_dataset(cli.values.at("-train_file"));
  train.validate();
  cfg.seed = log.seed;
  if (!cli.values.contains("-config")) {
    // Sizes come from the log itself; other parameters keep their defaults.
    cfg.population_size = log.population_size;
    cfg.random_trees = log.random_trees;
    cfg.program_size = log.program_size;
    cfg.generations = log.generations;
  } else if (cfg.population_size != log.population_size || cfg.tree_count() != log.random_trees ||
             cfg.program_size != log.program_size) {
    throw LineageError("config sizes do not match the lineage file");
  }
  Backend backend = Backend::from_config(cfg);
  const auto init = create_initial_structures(cfg, train.feature_count(), backend);
  const auto pop = compute_semantics(init.population, train, cfg, backend);
  const auto trees = compute_semantics(init.random_trees, train, cfg, backend);
  const auto replay = replay_lineage(log, pop.values, trees.values, cfg, backend);
  out << text::format_real(rmse(replay.elite_semantics, train.target)) << '\n';
  return 0;
}

}  // namespace detail

/// Command-line entry point; args excludes the program name.
inline int run_cli(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
  detail::CliArgs cli;
  try {
    cli = detail::parse_cli(args);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n\n" << kUsage;
    return 2;
  }
  if (cli.help) {
    out << kUsage;
    return 0;
  }
  const bool replay = cli.values.contains("-replay");
  if (!cli.values.contains("-train_file") || (!replay && !cli.values.contains("-test_file"))) {
    err << "error: -train_file and -test_file are required\n\n" << kUsage;
    return 2;
  }

  try {
    RunConfig cfg;
    if (auto it = cli.values.find("-config"); it != cli.values.end())
      cfg = load_config(it->second);
    detail::apply_overrides(cli, cfg);
    cfg.validate();
    if (replay) return detail::run_replay(cli, cfg, out);

    const auto load_start = detail::Clock::now();
    const Dataset train = load_dataset(cli.values.at("-train_file"));
    const Dataset test = load_dataset(cli.values.at("-test_file"));
    const double load_ms = detail::millis_since(load_start);

    const fs::path dir = cli.values.contains("-output_dir") ? fs::path(cli.values.at("-output_dir"))
                                                            : fs::path(".");
    Backend backend = Backend::from_config(cfg);
    std::vector<RunResult> results;
    std::vector<SweepRow> timing;
    for (std::size_t run = 0; run < cfg.runs; ++run) {
      RunConfig run_cfg = cfg;
      run_cfg.seed = derive_run_seed(cfg.seed, run);
      auto timed = timed_run(run_cfg, train, test, backend, run == 0 ? load_ms : 0.0);
      out << "run " << run << ": seed " << run_cfg.seed << ", best train RMSE "
          << text::format_real(timed.result.train_trace.back()) << ", test RMSE "
          << text::format_real(timed.result.test_trace.back()) << ", "
          << timed.result.non_finite_outputs << " non-finite outputs zeroed, "
          << text::format_real(timed.timings.total_ms) << " ms\n";
      SweepRow row;
      row.m = cfg.population_size;
      row.n = train.cases();
      row.k = cfg.program_size;
      row.backend = backend.descriptor().name;
      row.workers = backend.workers();
      row.timings = timed.timings;
      timing.push_back(row);
      results.push_back(std::move(timed.result));
    }
    const auto paths = write_traces(results, dir);
    std::ofstream csv(dir / "timing.csv");
    if (!csv) throw DataError("cannot write " + (dir / "timing.csv").string());
    write_sweep_csv(timing, csv);
    out << "wrote " << paths.train.string() << ", " << paths.test.string() << ", "
        << paths.lineage.size() << " lineage file(s), " << (dir / "timing.csv").string() << '\n';
    return 0;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace gsgp
