#pragma once

#include <cmath>
#include <numeric>
#include <span>
#include <vector>

#include "gsgp/backend.hpp"
#include "gsgp/core.hpp"

namespace gsgp {

constexpr double apply_op(Op op, double left, double right, double eps) noexcept {
  switch (op) {
    case Op::Add: return left + right;
    case Op::Sub: return left - right;
    case Op::Mul: return left * right;
    case Op::ProtectedDiv: return (right < 0.0 ? -right : right) < eps ? 1.0 : left / right;
  }
  return 0.0;
}

/// Evaluates a linear genome on one fitness case with a LIFO operand stack.
///
/// Terminals push their value. A function pops its right then its left
/// operand, pushes the result and overwrites the output register; when fewer
/// than two operands are available the gene is skipped and the stack is left
/// untouched. The result is the output register if any function executed,
/// otherwise the stack top, otherwise 0.
///
/// `stack` is caller-provided scratch; it is cleared on entry.
inline double interpret(std::span<const Gene> genes, std::span<const double> case_features,
                        double eps, std::vector<double>& stack) {
  stack.clear();
  double out = 0.0;
  bool fired = false;
  for (const Gene& g : genes) {
    switch (g.kind) {
      case GeneKind::Feature: stack.push_back(case_features[g.feature]); break;
      case GeneKind::Constant: stack.push_back(g.constant); break;
      case GeneKind::Function: {
        if (stack.size() < kOpArity) break;
        const double right = stack.back();
        stack.pop_back();
        const double left = stack.back();
        out = apply_op(g.op, left, right, eps);
        stack.back() = out;
        fired = true;
        break;
      }
    }
  }
  if (fired) return out;
  return stack.empty() ? 0.0 : stack.back();
}

inline double interpret(std::span<const Gene> genes, std::span<const double> case_features,
                        double eps) {
  std::vector<double> stack;
  stack.reserve(genes.size());
  return interpret(genes, case_features, eps, stack);
}

struct Semantics {
  SemanticMatrix values;
  std::size_t non_finite = 0;  // interpreter outputs replaced by 0.0
};

/// Row i holds member i evaluated on every row of `features`. Non-finite
/// outputs are replaced by 0.0 and counted. Parallel over individuals.
inline Semantics compute_semantics(const Population& pop, const Matrix<double>& features,
                                   const RunConfig& cfg, Backend& backend) {
  const std::size_t n = features.rows();
  Semantics result{SemanticMatrix(pop.size(), n), 0};
  std::vector<std::size_t> replaced(pop.size(), 0);
  backend.for_rows(pop.size(), [&](std::size_t i) {
    std::vector<double> stack;
    stack.reserve(pop.program_size());
    auto genome = pop.chromosome(i);
    auto row = result.values.row(i);
    std::size_t bad = 0;
    for (std::size_t j = 0; j < n; ++j) {
      const double v = interpret(genome, features.row(j), cfg.division_epsilon, stack);
      if (std::isfinite(v)) {
        row[j] = v;
      } else {
        row[j] = 0.0;
        ++bad;
      }
    }
    replaced[i] = bad;
  });
  result.non_finite = std::accumulate(replaced.begin(), replaced.end(), std::size_t{0});
  return result;
}

inline Semantics compute_semantics(const Population& pop, const Dataset& data,
                                   const RunConfig& cfg, Backend& backend) {
  return compute_semantics(pop, data.features, cfg, backend);
}

}  // namespace gsgp
