#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace gsgp {

// ---------------------------------------------------------------------------
// Errors

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DimensionError : std::logic_error {
  using std::logic_error::logic_error;
};

struct LineageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Dense row-major matrix

template <typename T>
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, T fill = T{})
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  [[nodiscard]] std::size_t rows() const noexcept { return rows_; }
  [[nodiscard]] std::size_t cols() const noexcept { return cols_; }
  [[nodiscard]] std::size_t size() const noexcept { return data_.size(); }
  [[nodiscard]] bool empty() const noexcept { return data_.empty(); }

  T& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * cols_ + j]; }
  const T& operator()(std::size_t i, std::size_t j) const noexcept {
    return data_[i * cols_ + j];
  }

  std::span<T> row(std::size_t i) noexcept { return {data_.data() + i * cols_, cols_}; }
  std::span<const T> row(std::size_t i) const noexcept {
    return {data_.data() + i * cols_, cols_};
  }

  std::span<T> flat() noexcept { return data_; }
  std::span<const T> flat() const noexcept { return data_; }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

// ---------------------------------------------------------------------------
// Genome

enum class GeneKind : std::uint8_t { Function, Feature, Constant };

enum class Op : std::uint8_t { Add, Sub, Mul, ProtectedDiv };

inline constexpr std::size_t kOpCount = 4;
inline constexpr std::size_t kOpArity = 2;

struct Gene {
  GeneKind kind = GeneKind::Constant;
  Op op = Op::Add;
  std::uint32_t feature = 0;
  double constant = 0.0;

  static constexpr Gene function(Op o) noexcept { return {GeneKind::Function, o, 0, 0.0}; }
  static constexpr Gene variable(std::uint32_t index) noexcept {
    return {GeneKind::Feature, Op::Add, index, 0.0};
  }
  static constexpr Gene ephemeral(double value) noexcept {
    return {GeneKind::Constant, Op::Add, 0, value};
  }

  friend bool operator==(const Gene& a, const Gene& b) noexcept {
    if (a.kind != b.kind) return false;
    switch (a.kind) {
      case GeneKind::Function: return a.op == b.op;
      case GeneKind::Feature: return a.feature == b.feature;
      case GeneKind::Constant: return a.constant == b.constant;
    }
    return false;
  }
};

using Chromosome = std::vector<Gene>;

/// m chromosomes of identical length k, stored as one m x k gene matrix.
class Population {
 public:
  Population() = default;
  explicit Population(Matrix<Gene> genes) : genes_(std::move(genes)) {}

  [[nodiscard]] std::size_t size() const noexcept { return genes_.rows(); }
  [[nodiscard]] std::size_t program_size() const noexcept { return genes_.cols(); }
  std::span<const Gene> chromosome(std::size_t i) const noexcept { return genes_.row(i); }
  const Matrix<Gene>& genes() const noexcept { return genes_; }

  friend bool operator==(const Population&, const Population&) = default;

 private:
  Matrix<Gene> genes_;
};

// ---------------------------------------------------------------------------
// Data

/// n fitness cases of l features plus the target column.
struct Dataset {
  Matrix<double> features;
  std::vector<double> target;

  [[nodiscard]] std::size_t cases() const noexcept { return target.size(); }
  [[nodiscard]] std::size_t feature_count() const noexcept { return features.cols(); }

  void validate() const {
    if (features.rows() != target.size())
      throw DataError("feature rows (" + std::to_string(features.rows()) +
                      ") differ from target length (" + std::to_string(target.size()) + ")");
    for (double v : features.flat())
      if (!std::isfinite(v)) throw DataError("non-finite feature value");
    for (double v : target)
      if (!std::isfinite(v)) throw DataError("non-finite target value");
  }
};

using SemanticMatrix = Matrix<double>;

/// Fitness assigned to any individual whose error is not finite.
inline constexpr double kWorstFitness = std::numeric_limits<double>::infinity();

using FitnessVector = std::vector<double>;

// ---------------------------------------------------------------------------
// Mutation bookkeeping

/// Random-tree index pairs and mutation steps for one generation.
struct MutationPlan {
  std::vector<std::uint32_t> u;
  std::vector<std::uint32_t> v;
  std::vector<double> ms;

  [[nodiscard]] std::size_t size() const noexcept { return ms.size(); }
  friend bool operator==(const MutationPlan&, const MutationPlan&) = default;
};

enum class EliteSource : std::uint8_t { Parent, Offspring };

struct EliteRecord {
  EliteSource source = EliteSource::Offspring;
  std::size_t parent_index = 0;   // argmin of parent fitness
  std::size_t replaced_slot = 0;  // offspring slot overwritten when source == Parent
  std::size_t elite_index = 0;    // argmin of the surviving population
  double fitness = kWorstFitness;

  friend bool operator==(const EliteRecord&, const EliteRecord&) = default;
};

struct LineageEntry {
  MutationPlan plan;
  EliteRecord elite;
  friend bool operator==(const LineageEntry&, const LineageEntry&) = default;
};

struct LineageLog {
  std::uint64_t seed = 0;
  std::size_t population_size = 0;
  std::size_t random_trees = 0;
  std::size_t program_size = 0;
  std::size_t generations = 0;  // generations the run was configured for
  std::size_t initial_elite = 0;
  std::vector<LineageEntry> entries;

  friend bool operator==(const LineageLog&, const LineageLog&) = default;
};

// ---------------------------------------------------------------------------
// Configuration

/// Gene-kind probabilities, normalized on construction.
class GeneProbabilities {
 public:
  GeneProbabilities() : GeneProbabilities(0.8, 0.14, 0.04) {}
  GeneProbabilities(double function, double feature, double constant) {
    if (!(function >= 0.0 && feature >= 0.0 && constant >= 0.0) ||
        !std::isfinite(function + feature + constant))
      throw ConfigError("gene probabilities must be finite and non-negative");
    const double total = function + feature + constant;
    if (total <= 0.0) throw ConfigError("gene probabilities sum to zero");
    function_ = function / total;
    feature_ = feature / total;
    constant_ = constant / total;
  }

  [[nodiscard]] double function() const noexcept { return function_; }
  [[nodiscard]] double feature() const noexcept { return feature_; }
  [[nodiscard]] double constant() const noexcept { return constant_; }

  friend bool operator==(const GeneProbabilities&, const GeneProbabilities&) = default;

 private:
  double function_ = 0.0;
  double feature_ = 0.0;
  double constant_ = 0.0;
};

/// Distribution of the per-offspring mutation step.
struct StepDistribution {
  enum class Kind : std::uint8_t { Uniform, Constant };
  Kind kind = Kind::Uniform;
  double lo = 0.0;  // uniform: (lo, hi]; constant: lo
  double hi = 1.0;

  static StepDistribution uniform(double lo, double hi) { return {Kind::Uniform, lo, hi}; }
  static StepDistribution constant(double value) { return {Kind::Constant, value, value}; }

  /// Maps a [0, 1) draw onto the distribution.
  [[nodiscard]] double sample(double unit) const noexcept {
    if (kind == Kind::Constant) return lo;
    return lo + (hi - lo) * (1.0 - unit);
  }

  void validate() const {
    if (kind == Kind::Constant) {
      if (!(lo > 0.0) || !std::isfinite(lo))
        throw ConfigError("constant mutation step must be positive and finite");
    } else if (!(lo >= 0.0 && hi > lo) || !std::isfinite(hi)) {
      throw ConfigError("uniform mutation step requires 0 <= lo < hi");
    }
  }

  friend bool operator==(const StepDistribution&, const StepDistribution&) = default;
};

enum class GsmSign : std::uint8_t { Minus, Plus };

enum class BackendKind : std::uint8_t { Sequential, Parallel };

struct RunConfig {
  std::size_t population_size = 1024;  // m
  std::size_t random_trees = 0;        // r; 0 means "same as population_size"
  std::size_t program_size = 1024;     // k
  std::size_t generations = 1024;      // g
  std::size_t runs = 1;
  std::uint64_t seed = 1;
  GeneProbabilities gene_probabilities{};
  double erc_lo = 1.0;
  double erc_hi = 10.0;
  StepDistribution mutation_step{};
  double division_epsilon = 1e-6;
  GsmSign gsm_sign = GsmSign::Minus;
  BackendKind backend = BackendKind::Parallel;
  std::size_t threads = 0;  // 0 = hardware concurrency
  // Optional cross-checks against the loaded training data; 0 disables.
  std::size_t expected_cases = 0;
  std::size_t expected_features = 0;

  [[nodiscard]] std::size_t tree_count() const noexcept {
    return random_trees == 0 ? population_size : random_trees;
  }

  void validate() const {
    if (population_size < 1) throw ConfigError("population_size must be >= 1");
    if (program_size < 1) throw ConfigError("program_size must be >= 1");
    if (runs < 1) throw ConfigError("runs must be >= 1");
    if (tree_count() < 2) throw ConfigError("random_trees must be >= 2");
    if (population_size > std::numeric_limits<std::uint32_t>::max() ||
        tree_count() > std::numeric_limits<std::uint32_t>::max())
      throw ConfigError("population or random tree count too large");
    if (!std::isfinite(erc_lo) || !std::isfinite(erc_hi) || erc_lo > erc_hi)
      throw ConfigError("erc range must be finite with lo <= hi");
    if (!(division_epsilon >= 0.0) || !std::isfinite(division_epsilon))
      throw ConfigError("division_epsilon must be finite and non-negative");
    mutation_step.validate();
  }
};

}  // namespace gsgp
