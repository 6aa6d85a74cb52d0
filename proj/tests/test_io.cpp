#include <gtest/gtest.h>

#include <cstring>
#include <fstream>
#include <random>

#include "gsgp/io.hpp"
#include "oracles.hpp"
#include "temp_dir.hpp"

namespace gsgp {
namespace {

using testing::TempDir;

void write_file(const fs::path& p, const std::string& s) {
  std::ofstream out(p, std::ios::binary);
  out << s;
}

std::size_t count_lines(const fs::path& p) {
  std::ifstream in(p);
  std::size_t n = 0;
  for (std::string line; std::getline(in, line);) ++n;
  return n;
}

TEST(Config, RealProblemSetup) {
  const auto cfg = parse_config(
      "; run parameters\n[run]\npopulation_size=1024\ngenerations = 1024\nprogram_size=1024\n"
      "runs=10\n# trailing comment\n");
  EXPECT_EQ(cfg.population_size, 1024u);
  EXPECT_EQ(cfg.generations, 1024u);
  EXPECT_EQ(cfg.program_size, 1024u);
  EXPECT_EQ(cfg.runs, 10u);
  EXPECT_EQ(cfg.erc_lo, 1.0);
  EXPECT_EQ(cfg.erc_hi, 10.0);
  EXPECT_EQ(cfg.gsm_sign, GsmSign::Minus);
}

TEST(Config, EmptyFileGivesDefaults) {
  TempDir dir;
  write_file(dir / "config.ini", "");
  const auto cfg = load_config(dir / "config.ini");
  const RunConfig defaults;
  EXPECT_EQ(format_config(cfg), format_config(defaults));
  EXPECT_NO_THROW(cfg.validate());
}

TEST(Config, ZeroPopulationIsRangeError) {
  try {
    parse_config("program_size=3\npopulation_size=0\n");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
    EXPECT_NE(std::string(e.what()).find("population_size"), std::string::npos);
  }
}

TEST(Config, MalformedLinesAndUnknownKeys) {
  EXPECT_THROW(parse_config("population_size\n"), ParseError);
  EXPECT_THROW(parse_config("colour=blue\n"), ParseError);
  EXPECT_THROW(parse_config("generations=-3\n"), ParseError);
  EXPECT_THROW(parse_config("generations=12x\n"), ParseError);
  EXPECT_THROW(parse_config("backend=gpu\n"), ParseError);
  EXPECT_THROW(parse_config("mutation_step=uniform:1\n"), ParseError);
  EXPECT_THROW(parse_config("mutation_step=uniform:1:0.5\n"), ParseError);
  EXPECT_THROW(parse_config("erc_min=nan\n"), ParseError);
  EXPECT_THROW(parse_config("erc_min=5\nerc_max=2\n"), ConfigError);
  EXPECT_THROW(parse_config("p_function=0\np_feature=0\np_constant=0\n"), ConfigError);
  EXPECT_THROW(load_config("/nonexistent/gsgp/config.ini"), ConfigError);
}

TEST(Config, Extensions) {
  const auto cfg = parse_config(
      "seed=18446744073709551615\nbackend=sequential\nthreads=3\ngsm_sign=plus\n"
      "mutation_step=constant:0.25\nerc_min=-2\nerc_max=2\ndivision_epsilon=0.001\n"
      "random_trees=5\nfitness_cases=308\nfeatures=7\np_function=1\np_feature=1\np_constant=0\n");
  EXPECT_EQ(cfg.seed, 18446744073709551615ull);
  EXPECT_EQ(cfg.backend, BackendKind::Sequential);
  EXPECT_EQ(cfg.threads, 3u);
  EXPECT_EQ(cfg.gsm_sign, GsmSign::Plus);
  EXPECT_EQ(cfg.mutation_step, StepDistribution::constant(0.25));
  EXPECT_EQ(cfg.erc_lo, -2.0);
  EXPECT_EQ(cfg.division_epsilon, 0.001);
  EXPECT_EQ(cfg.tree_count(), 5u);
  EXPECT_EQ(cfg.expected_cases, 308u);
  EXPECT_EQ(cfg.expected_features, 7u);
  EXPECT_EQ(cfg.gene_probabilities.function(), 0.5);
  EXPECT_EQ(cfg.gene_probabilities.constant(), 0.0);
}

TEST(Config, FormatRoundTrips) {
  RunConfig cfg;
  cfg.population_size = 77;
  cfg.seed = 123456789;
  cfg.gsm_sign = GsmSign::Plus;
  cfg.mutation_step = StepDistribution::uniform(0.0, 0.3);
  cfg.erc_lo = 0.1;
  cfg.gene_probabilities = GeneProbabilities(0.7, 0.2, 0.1);
  const auto back = parse_config(format_config(cfg));
  EXPECT_EQ(back.population_size, 77u);
  EXPECT_EQ(back.seed, 123456789u);
  EXPECT_EQ(back.gsm_sign, GsmSign::Plus);
  EXPECT_EQ(back.mutation_step, cfg.mutation_step);
  EXPECT_EQ(back.erc_lo, 0.1);
  EXPECT_EQ(back.division_epsilon, cfg.division_epsilon);
  // Renormalising already-normalised weights may move the last bit.
  EXPECT_NEAR(back.gene_probabilities.function(), cfg.gene_probabilities.function(), 1e-15);
  EXPECT_NEAR(back.gene_probabilities.feature(), cfg.gene_probabilities.feature(), 1e-15);
  EXPECT_NEAR(back.gene_probabilities.constant(), cfg.gene_probabilities.constant(), 1e-15);
}

TEST(Dataset, ThreeByThree) {
  const auto d = parse_dataset("1 2 3\n4\t5 6\n\n  7 8 9  \n");
  EXPECT_EQ(d.cases(), 3u);
  EXPECT_EQ(d.feature_count(), 2u);
  EXPECT_EQ(d.target, (std::vector<double>{3, 6, 9}));
  EXPECT_EQ(d.features(2, 0), 7.0);
  EXPECT_EQ(d.features(1, 1), 5.0);
}

TEST(Dataset, LetterTokenNamesLine) {
  try {
    parse_dataset("1 2 3\n4 x 6\n", "train.txt");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
    EXPECT_NE(std::string(e.what()).find("train.txt:2"), std::string::npos);
  }
}

TEST(Dataset, StructuralErrors) {
  EXPECT_THROW(parse_dataset("1 2 3\n4 5\n"), ParseError);
  EXPECT_THROW(parse_dataset("1\n2\n"), ParseError);
  EXPECT_THROW(parse_dataset("1 inf\n"), ParseError);
  EXPECT_THROW(parse_dataset("1 nan\n"), ParseError);
  EXPECT_THROW(parse_dataset("\n\n"), DataError);
  EXPECT_THROW(load_dataset("/nonexistent/gsgp/train.txt"), DataError);
}

TEST(Dataset, WriteLoadRoundTripsExactly) {
  TempDir dir;
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> mag(-300, 300);
  for (int t = 0; t < 20; ++t) {
    const std::size_t n = 1 + rng() % 30, l = 1 + rng() % 6;
    Dataset d{Matrix<double>(n, l), std::vector<double>(n)};
    for (double& v : d.features.flat()) v = std::ldexp(mag(rng), static_cast<int>(rng() % 200) - 100);
    for (double& v : d.target) v = mag(rng) / 3.0;
    d.features.flat()[0] = -0.0;
    write_dataset(d, dir / "d.txt");
    const auto back = load_dataset(dir / "d.txt");
    ASSERT_EQ(back.features, d.features);
    ASSERT_EQ(back.target, d.target);
  }
}

TEST(Dataset, SplitIsSeededPartition) {
  std::mt19937_64 rng(4);
  Dataset d{Matrix<double>(50, 1), std::vector<double>(50)};
  for (std::size_t i = 0; i < 50; ++i) d.features(i, 0) = d.target[i] = static_cast<double>(i);
  auto [tr, te] = split_dataset(d, 0.7, 9);
  EXPECT_EQ(tr.cases(), 35u);
  EXPECT_EQ(te.cases(), 15u);
  std::vector<double> all = tr.target;
  all.insert(all.end(), te.target.begin(), te.target.end());
  std::sort(all.begin(), all.end());
  EXPECT_EQ(all, d.target);
  for (std::size_t i = 0; i < tr.cases(); ++i) EXPECT_EQ(tr.features(i, 0), tr.target[i]);
  auto [tr2, te2] = split_dataset(d, 0.7, 9);
  EXPECT_EQ(tr2.target, tr.target);
  auto [tr3, te3] = split_dataset(d, 0.7, 10);
  EXPECT_NE(tr3.target, tr.target);
  EXPECT_THROW(split_dataset(d, 1.0, 1), ConfigError);
}

Dataset toy(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Dataset d{testing::random_matrix(rng, n, 2, -1, 1), std::vector<double>(n)};
  for (std::size_t j = 0; j < n; ++j) d.target[j] = d.features(j, 0) - 2 * d.features(j, 1);
  return d;
}

RunResult toy_run(std::size_t g) {
  RunConfig cfg;
  cfg.population_size = 8;
  cfg.program_size = 15;
  cfg.generations = g;
  auto seq = Backend::sequential();
  return run_evolution(cfg, toy(12, 1), toy(5, 2), seq);
}

TEST(Lineage, FormatParseRoundTrip) {
  const auto res = toy_run(6);
  const auto text = format_lineage(res.lineage);
  EXPECT_EQ(parse_lineage(text), res.lineage);
  EXPECT_EQ(format_lineage(parse_lineage(text)), text);
}

TEST(Lineage, CorruptFilesRejected) {
  const auto text = format_lineage(toy_run(2).lineage);
  EXPECT_THROW(parse_lineage(text.substr(0, text.size() / 2)), LineageError);
  EXPECT_THROW(parse_lineage("gsgp-lineage 2\n"), LineageError);
  auto bad = text;
  bad.replace(bad.find("source "), 7, "origin ");
  EXPECT_THROW(parse_lineage(bad), LineageError);
  EXPECT_THROW(load_lineage("/nonexistent/lineage_0.txt"), LineageError);
}

TEST(Traces, OneGenerationGivesInitialPlusOneLine) {
  TempDir dir;
  const auto res = toy_run(1);
  const auto paths = write_traces(res, dir.path());
  EXPECT_EQ(count_lines(paths.train), 2u);
  EXPECT_EQ(count_lines(paths.test), 2u);
  EXPECT_EQ(load_trace(paths.train), res.train_trace);
  EXPECT_EQ(load_trace(paths.test), res.test_trace);
  ASSERT_EQ(paths.lineage.size(), 1u);
  EXPECT_EQ(load_lineage(paths.lineage[0]), res.lineage);
}

TEST(Traces, ZeroGenerationsHoldInitialEliteOnly) {
  TempDir dir;
  const auto res = toy_run(0);
  const auto paths = write_traces(res, dir.path());
  EXPECT_EQ(count_lines(paths.train), 1u);
  EXPECT_EQ(load_trace(paths.train), res.train_trace);
}

TEST(Traces, RunsAreConcatenated) {
  TempDir dir;
  const std::vector<RunResult> runs{toy_run(3), toy_run(4)};
  const auto paths = write_traces(runs, dir / "nested");
  EXPECT_EQ(count_lines(paths.train), 4u + 5u);
  EXPECT_EQ(paths.lineage.size(), 2u);
  EXPECT_TRUE(fs::exists(dir / "nested" / "lineage_1.txt"));
}

TEST(Text, FormatRealIsLossless) {
  std::mt19937_64 rng(6);
  for (int t = 0; t < 10000; ++t) {
    double v;
    const std::uint64_t bits = rng();
    std::memcpy(&v, &bits, sizeof v);
    if (!std::isfinite(v)) continue;
    ASSERT_EQ(*text::parse_real(text::format_real(v)), v);
  }
  EXPECT_EQ(*text::parse_real("+2.5"), 2.5);
  EXPECT_FALSE(text::parse_real("1.0abc"));
  EXPECT_FALSE(text::parse_real(""));
}

}  // namespace
}  // namespace gsgp
