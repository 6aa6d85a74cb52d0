#pragma once

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <numeric>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

#include "gsgp/core.hpp"
#include "gsgp/evolution.hpp"
#include "gsgp/rng.hpp"

namespace gsgp {

namespace fs = std::filesystem;

struct ParseError : std::runtime_error {
  ParseError(const std::string& source, std::size_t line, const std::string& what)
      : std::runtime_error(source + ":" + std::to_string(line) + ": " + what), line_(line) {}
  [[nodiscard]] std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// ---------------------------------------------------------------------------
// Text helpers

namespace text {

inline std::string_view trim(std::string_view s) {
  const auto ws = " \t\r\n\f\v";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    std::size_t j = i;
    while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j]))) ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

inline std::optional<double> parse_real(std::string_view s) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size()) return std::nullopt;
  return v;
}

template <typename Int>
std::optional<Int> parse_unsigned(std::string_view s) {
  Int v{};
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size()) return std::nullopt;
  return v;
}

/// Shortest form that carries 17 significant digits.
inline std::string format_real(double v) {
  char buf[64];
  const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, p);
}

inline std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace text

// ---------------------------------------------------------------------------
// Config

/// INI-style key=value text. Blank lines, '#' or ';' comments and [section]
/// headers are ignored; unknown keys are rejected; missing keys keep their
/// defaults.
inline RunConfig parse_config(std::string_view content, const std::string& source = "config") {
  RunConfig cfg;
  double p_function = 0.8, p_feature = 0.14, p_constant = 0.04;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= content.size()) {
    const auto nl = content.find('\n', pos);
    const auto raw = content.substr(pos, nl == std::string_view::npos ? std::string_view::npos
                                                                       : nl - pos);
    pos = nl == std::string_view::npos ? content.size() + 1 : nl + 1;
    ++line_no;
    const auto line = text::trim(raw);
    if (line.empty() || line.front() == '#' || line.front() == ';') continue;
    if (line.front() == '[' && line.back() == ']') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError(source, line_no, "expected key=value");
    const std::string key(text::trim(line.substr(0, eq)));
    const auto value = text::trim(line.substr(eq + 1));
    if (key.empty()) throw ParseError(source, line_no, "empty key");

    auto fail = [&](const std::string& why) -> ParseError {
      return ParseError(source, line_no, key + ": " + why);
    };
    auto count = [&](std::size_t min) {
      const auto v = text::parse_unsigned<std::size_t>(value);
      if (!v) throw fail("expected a non-negative integer, got '" + std::string(value) + "'");
      if (*v < min) throw fail("must be >= " + std::to_string(min));
      return *v;
    };
    auto real = [&] {
      const auto v = text::parse_real(value);
      if (!v || !std::isfinite(*v)) throw fail("expected a finite real, got '" + std::string(value) + "'");
      return *v;
    };

    if (key == "population_size") cfg.population_size = count(1);
    else if (key == "program_size") cfg.program_size = count(1);
    else if (key == "generations") cfg.generations = count(0);
    else if (key == "runs") cfg.runs = count(1);
    else if (key == "random_trees") cfg.random_trees = count(0);
    else if (key == "fitness_cases") cfg.expected_cases = count(0);
    else if (key == "features") cfg.expected_features = count(0);
    else if (key == "threads") cfg.threads = count(0);
    else if (key == "seed") {
      const auto v = text::parse_unsigned<std::uint64_t>(value);
      if (!v) throw fail("expected a 64-bit unsigned integer");
      cfg.seed = *v;
    } else if (key == "backend") {
      if (value == "sequential") cfg.backend = BackendKind::Sequential;
      else if (value == "parallel") cfg.backend = BackendKind::Parallel;
      else throw fail("expected 'sequential' or 'parallel'");
    } else if (key == "gsm_sign") {
      if (value == "minus") cfg.gsm_sign = GsmSign::Minus;
      else if (value == "plus") cfg.gsm_sign = GsmSign::Plus;
      else throw fail("expected 'minus' or 'plus'");
    } else if (key == "mutation_step") {
      // uniform:LO:HI draws from (LO, HI]; constant:V fixes the step.
      const std::string step(value);
      std::vector<std::string> parts;
      std::stringstream ss(step);
      for (std::string part; std::getline(ss, part, ':');) parts.push_back(part);
      auto num = [&](const std::string& s) {
        const auto v = text::parse_real(s);
        if (!v) throw fail("bad number '" + s + "'");
        return *v;
      };
      if (parts.size() == 3 && parts[0] == "uniform")
        cfg.mutation_step = StepDistribution::uniform(num(parts[1]), num(parts[2]));
      else if (parts.size() == 2 && parts[0] == "constant")
        cfg.mutation_step = StepDistribution::constant(num(parts[1]));
      else
        throw fail("expected uniform:LO:HI or constant:V");
      try {
        cfg.mutation_step.validate();
      } catch (const ConfigError& e) {
        throw fail(e.what());
      }
    } else if (key == "erc_min") cfg.erc_lo = real();
    else if (key == "erc_max") cfg.erc_hi = real();
    else if (key == "division_epsilon") {
      cfg.division_epsilon = real();
      if (cfg.division_epsilon < 0.0) throw fail("must be >= 0");
    } else if (key == "p_function") p_function = real();
    else if (key == "p_feature") p_feature = real();
    else if (key == "p_constant") p_constant = real();
    else throw ParseError(source, line_no, "unknown key '" + key + "'");
  }
  cfg.gene_probabilities = GeneProbabilities(p_function, p_feature, p_constant);
  cfg.validate();
  return cfg;
}

inline RunConfig load_config(const fs::path& path) {
  std::string content;
  try {
    content = text::read_file(path);
  } catch (const DataError&) {
    throw ConfigError("cannot read config file " + path.string());
  }
  return parse_config(content, path.string());
}

/// Renders cfg in the same key=value format parse_config accepts.
inline std::string format_config(const RunConfig& cfg) {
  std::ostringstream os;
  os << "population_size=" << cfg.population_size << '\n'
     << "program_size=" << cfg.program_size << '\n'
     << "generations=" << cfg.generations << '\n'
     << "runs=" << cfg.runs << '\n'
     << "random_trees=" << cfg.random_trees << '\n'
     << "fitness_cases=" << cfg.expected_cases << '\n'
     << "features=" << cfg.expected_features << '\n'
     << "seed=" << cfg.seed << '\n'
     << "backend=" << (cfg.backend == BackendKind::Sequential ? "sequential" : "parallel") << '\n'
     << "threads=" << cfg.threads << '\n'
     << "gsm_sign=" << (cfg.gsm_sign == GsmSign::Minus ? "minus" : "plus") << '\n';
  if (cfg.mutation_step.kind == StepDistribution::Kind::Constant)
    os << "mutation_step=constant:" << text::format_real(cfg.mutation_step.lo) << '\n';
  else
    os << "mutation_step=uniform:" << text::format_real(cfg.mutation_step.lo) << ':'
       << text::format_real(cfg.mutation_step.hi) << '\n';
  os << "erc_min=" << text::format_real(cfg.erc_lo) << '\n'
     << "erc_max=" << text::format_real(cfg.erc_hi) << '\n'
     << "division_epsilon=" << text::format_real(cfg.division_epsilon) << '\n'
     << "p_function=" << text::format_real(cfg.gene_probabilities.function()) << '\n'
     << "p_feature=" << text::format_real(cfg.gene_probabilities.feature()) << '\n'
     << "p_constant=" << text::format_real(cfg.gene_probabilities.constant()) << '\n';
  return os.str();
}

// ---------------------------------------------------------------------------
// Datasets

/// Whitespace-separated reals, one instance per line; the last column is the
/// target. Blank lines are skipped.
inline Dataset parse_dataset(std::string_view content, const std::string& source = "dataset") {
  std::vector<double> values;
  std::size_t cols = 0;
  std::size_t rows = 0;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < content.size()) {
    const auto nl = content.find('\n', pos);
    const auto line = content.substr(pos, nl == std::string_view::npos ? std::string_view::npos
                                                                        : nl - pos);
    pos = nl == std::string_view::npos ? content.size() : nl + 1;
    ++line_no;
    const auto tokens = text::split_ws(line);
    if (tokens.empty()) continue;
    if (cols == 0) {
      if (tokens.size() < 2)
        throw ParseError(source, line_no, "need at least one feature column and a target");
      cols = tokens.size();
    } else if (tokens.size() != cols) {
      throw ParseError(source, line_no,
                       "expected " + std::to_string(cols) + " columns, found " +
                           std::to_string(tokens.size()));
    }
    for (const auto tok : tokens) {
      const auto v = text::parse_real(tok);
      if (!v) throw ParseError(source, line_no, "not a number: '" + std::string(tok) + "'");
      if (!std::isfinite(*v))
        throw ParseError(source, line_no, "non-finite value: '" + std::string(tok) + "'");
      values.push_back(*v);
    }
    ++rows;
  }
  if (rows == 0) throw DataError(source + ": no data rows");

  Dataset d{Matrix<double>(rows, cols - 1), std::vector<double>(rows)};
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j + 1 < cols; ++j) d.features(i, j) = values[i * cols + j];
    d.target[i] = values[i * cols + cols - 1];
  }
  return d;
}

inline Dataset load_dataset(const fs::path& path) {
  return parse_dataset(text::read_file(path), path.string());
}

/// Tab-separated, 17 significant digits, target last.
inline std::string format_dataset(const Dataset& d) {
  std::string out;
  for (std::size_t i = 0; i < d.cases(); ++i) {
    for (std::size_t j = 0; j < d.feature_count(); ++j) {
      out += text::format_real(d.features(i, j));
      out += '\t';
    }
    out += text::format_real(d.target[i]);
    out += '\n';
  }
  return out;
}

inline void write_dataset(const Dataset& d, const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << format_dataset(d);
  if (!out) throw DataError("write failed: " + path.string());
}

/// Rows in `order`, in that order.
inline Dataset select_rows(const Dataset& d, std::span<const std::size_t> order) {
  Dataset out{Matrix<double>(order.size(), d.feature_count()), std::vector<double>(order.size())};
  for (std::size_t i = 0; i < order.size(); ++i) {
    auto src = d.features.row(order[i]);
    std::copy(src.begin(), src.end(), out.features.row(i).begin());
    out.target[i] = d.target[order[i]];
  }
  return out;
}

/// Seeded shuffle, then the first round(train_fraction * n) rows train.
inline std::pair<Dataset, Dataset> split_dataset(const Dataset& d, double train_fraction,
                                                 std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw ConfigError("train fraction must lie in (0, 1)");
  const std::size_t n = d.cases();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t i = n; i > 1; --i) {
    const auto b = random_block(seed, streams::kDataSplit, i);
    std::swap(order[i - 1], order[to_index(combine_words(b[0], b[1]), i)]);
  }
  auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(n)));
  n_train = std::clamp<std::size_t>(n_train, 1, n > 1 ? n - 1 : 1);
  const std::span<const std::size_t> all(order);
  return {select_rows(d, all.first(n_train)), select_rows(d, all.subspan(n_train))};
}

// ---------------------------------------------------------------------------
// Lineage sidecar
//
//   gsgp-lineage 1
//   seed <u64>
//   population_size <m>
//   random_trees <r>
//   program_size <k>
//   generations <g>
//   initial_elite <index>
//   generation <t> source parent|offspring parent_index <i> replaced_slot <i> elite_index <i> fitness <real>
//   plan <slot> <u> <v> <ms>            (m lines per generation)
//   end

inline std::string format_lineage(const LineageLog& log) {
  std::string out = "gsgp-lineage 1\n";
  out += "seed " + std::to_string(log.seed) + '\n';
  out += "population_size " + std::to_string(log.population_size) + '\n';
  out += "random_trees " + std::to_string(log.random_trees) + '\n';
  out += "program_size " + std::to_string(log.program_size) + '\n';
  out += "generations " + std::to_string(log.generations) + '\n';
  out += "initial_elite " + std::to_string(log.initial_elite) + '\n';
  for (std::size_t t = 0; t < log.entries.size(); ++t) {
    const auto& e = log.entries[t];
    out += "generation " + std::to_string(t + 1) + " source " +
           (e.elite.source == EliteSource::Parent ? "parent" : "offspring") + " parent_index " +
           std::to_string(e.elite.parent_index) + " replaced_slot " +
           std::to_string(e.elite.replaced_slot) + " elite_index " +
           std::to_string(e.elite.elite_index) + " fitness " + text::format_real(e.elite.fitness) +
           '\n';
    for (std::size_t i = 0; i < e.plan.size(); ++i) {
      out += "plan " + std::to_string(i) + ' ' + std::to_string(e.plan.u[i]) + ' ' +
             std::to_string(e.plan.v[i]) + ' ' + text::format_real(e.plan.ms[i]) + '\n';
    }
  }
  out += "end\n";
  return out;
}

inline LineageLog parse_lineage(std::string_view content, const std::string& source = "lineage") {
  std::vector<std::vector<std::string_view>> lines;
  std::size_t pos = 0;
  while (pos < content.size()) {
    const auto nl = content.find('\n', pos);
    const auto line = content.substr(pos, nl == std::string_view::npos ? std::string_view::npos
                                                                        : nl - pos);
    pos = nl == std::string_view::npos ? content.size() : nl + 1;
    lines.push_back(text::split_ws(line));
  }
  std::size_t at = 0;
  auto fail = [&](const std::string& why) {
    return LineageError(source + ":" + std::to_string(at) + ": " + why);
  };
  auto next = [&]() -> const std::vector<std::string_view>& {
    while (at < lines.size() && lines[at].empty()) ++at;
    if (at >= lines.size()) throw fail("truncated lineage file");
    return lines[at++];
  };
  auto uint_at = [&](std::string_view tok) {
    const auto v = text::parse_unsigned<std::uint64_t>(tok);
    if (!v) throw fail("expected an unsigned integer, got '" + std::string(tok) + "'");
    return *v;
  };
  auto header = [&](std::string_view key) {
    const auto& l = next();
    if (l.size() != 2 || l[0] != key) throw fail("expected '" + std::string(key) + " <value>'");
    return uint_at(l[1]);
  };

  {
    const auto& l = next();
    if (l.size() != 2 || l[0] != "gsgp-lineage" || l[1] != "1")
      throw fail("not a gsgp-lineage v1 file");
  }
  LineageLog log;
  log.seed = header("seed");
  log.population_size = header("population_size");
  log.random_trees = header("random_trees");
  log.program_size = header("program_size");
  log.generations = header("generations");
  log.initial_elite = header("initial_elite");

  while (true) {
    const auto& l = next();
    if (l.size() == 1 && l[0] == "end") break;
    if (l.size() != 12 || l[0] != "generation" || l[2] != "source" || l[4] != "parent_index" ||
        l[6] != "replaced_slot" || l[8] != "elite_index" || l[10] != "fitness")
      throw fail("malformed generation record");
    if (uint_at(l[1]) != log.entries.size() + 1) throw fail("generations out of order");
    LineageEntry e;
    if (l[3] == "parent") e.elite.source = EliteSource::Parent;
    else if (l[3] == "offspring") e.elite.source = EliteSource::Offspring;
    else throw fail("unknown elite source");
    e.elite.parent_index = uint_at(l[5]);
    e.elite.replaced_slot = uint_at(l[7]);
    e.elite.elite_index = uint_at(l[9]);
    const auto f = text::parse_real(l[11]);
    if (!f) throw fail("bad fitness value");
    e.elite.fitness = *f;
    e.plan.u.resize(log.population_size);
    e.plan.v.resize(log.population_size);
    e.plan.ms.resize(log.population_size);
    for (std::size_t i = 0; i < log.population_size; ++i) {
      const auto& p = next();
      if (p.size() != 5 || p[0] != "plan" || uint_at(p[1]) != i) throw fail("malformed plan line");
      e.plan.u[i] = static_cast<std::uint32_t>(uint_at(p[2]));
      e.plan.v[i] = static_cast<std::uint32_t>(uint_at(p[3]));
      const auto ms = text::parse_real(p[4]);
      if (!ms) throw fail("bad mutation step");
      e.plan.ms[i] = *ms;
    }
    log.entries.push_back(std::move(e));
  }
  return log;
}

inline LineageLog load_lineage(const fs::path& path) {
  std::string content;
  try {
    content = text::read_file(path);
  } catch (const DataError&) {
    throw LineageError("cannot read lineage file " + path.string());
  }
  return parse_lineage(content, path.string());
}

// ---------------------------------------------------------------------------
// Traces

struct TracePaths {
  fs::path train;
  fs::path test;
  std::vector<fs::path> lineage;  // one per run
};

inline std::string format_trace(std::span<const double> values) {
  std::string out;
  for (double v : values) {
    out += text::format_real(v);
    out += '\n';
  }
  return out;
}

namespace detail {
inline void write_text(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << content;
  out.flush();
  if (!out) throw DataError("write failed: " + path.string());
}
}  // namespace detail

/// train_fitness.txt and test_fitness.txt hold one real per line, generation 0
/// through g for each run in order; lineage_<run>.txt holds each run's sidecar.
inline TracePaths write_traces(std::span<const RunResult> runs, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw DataError("cannot create " + dir.string() + ": " + ec.message());
  TracePaths paths{dir / "train_fitness.txt", dir / "test_fitness.txt", {}};
  std::string train, test;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    train += format_trace(runs[i].train_trace);
    test += format_trace(runs[i].test_trace);
    paths.lineage.push_back(dir / ("lineage_" + std::to_string(i) + ".txt"));
    detail::write_text(paths.lineage.back(), format_lineage(runs[i].lineage));
  }
  detail::write_text(paths.train, train);
  detail::write_text(paths.test, test);
  return paths;
}

inline TracePaths write_traces(const RunResult& result, const fs::path& dir) {
  return write_traces(std::span<const RunResult>(&result, 1), dir);
}

/// Parses a trace file back into reals.
inline std::vector<double> load_trace(const fs::path& path) {
  std::vector<double> out;
  std::istringstream in(text::read_file(path));
  std::size_t line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    const auto t = text::trim(line);
    if (t.empty()) continue;
    const auto v = text::parse_real(t);
    if (!v) throw ParseError(path.string(), line_no, "not a number");
    out.push_back(*v);
  }
  return out;
}

}  // namespace gsgp
