#pragma once

#include <cmath>
#include <span>

#include "gsgp/backend.hpp"
#include "gsgp/core.hpp"

namespace gsgp {

/// Root mean squared error, summed left to right. Non-finite results map to
/// kWorstFitness.
inline double rmse(std::span<const double> row, std::span<const double> target) {
  if (row.size() != target.size())
    throw DimensionError("rmse: row and target lengths differ");
  if (row.empty()) throw DimensionError("rmse: empty input");
  double sum = 0.0;
  for (std::size_t j = 0; j < row.size(); ++j) {
    const double d = row[j] - target[j];
    sum += d * d;
  }
  const double value = std::sqrt(sum / static_cast<double>(row.size()));
  return std::isfinite(value) ? value : kWorstFitness;
}

/// One task per row, so the per-row summation order never depends on the
/// backend.
inline FitnessVector compute_fitness(const SemanticMatrix& s, std::span<const double> target,
                                     Backend& backend) {
  if (s.cols() != target.size())
    throw DimensionError("compute_fitness: column count differs from target length");
  FitnessVector f(s.rows());
  backend.map_rows(std::span<double>(f), [&](std::size_t i) { return rmse(s.row(i), target); });
  return f;
}

}  // namespace gsgp
