#pragma once

// Independent reference implementations used only by tests.

#include <cmath>
#include <cstdint>
#include <memory>
#include <random>
#include <span>
#include <vector>

#include "gsgp/core.hpp"

namespace gsgp::testing {

// Builds an expression tree from the genome (a function consumes the two most
// recent unconsumed subtrees, earlier one on the left), then evaluates it by
// recursive descent. A function with fewer than two subtrees is dropped.
class TreeOracle {
 public:
  TreeOracle(std::span<const Gene> genes, double eps) : eps_(eps) {
    std::vector<std::unique_ptr<Node>> forest;
    for (const Gene& g : genes) {
      if (g.kind != GeneKind::Function) {
        auto leaf = std::make_unique<Node>();
        leaf->gene = g;
        forest.push_back(std::move(leaf));
        continue;
      }
      if (forest.size() < 2) continue;
      auto node = std::make_unique<Node>();
      node->gene = g;
      node->right = std::move(forest.back());
      forest.pop_back();
      node->left = std::move(forest.back());
      forest.pop_back();
      last_function_ = node.get();
      forest.push_back(std::move(node));
    }
    forest_ = std::move(forest);
  }

  double operator()(std::span<const double> x) const {
    if (last_function_) return eval(*last_function_, x);
    if (forest_.empty()) return 0.0;
    return eval(*forest_.back(), x);
  }

 private:
  struct Node {
    Gene gene;
    std::unique_ptr<Node> left, right;
  };

  double eval(const Node& n, std::span<const double> x) const {
    switch (n.gene.kind) {
      case GeneKind::Feature: return x[n.gene.feature];
      case GeneKind::Constant: return n.gene.constant;
      case GeneKind::Function: break;
    }
    const double a = eval(*n.left, x);
    const double b = eval(*n.right, x);
    switch (n.gene.op) {
      case Op::Add: return a + b;
      case Op::Sub: return a - b;
      case Op::Mul: return a * b;
      case Op::ProtectedDiv: return std::fabs(b) < eps_ ? 1.0 : a / b;
    }
    return 0.0;
  }

  double eps_;
  std::vector<std::unique_ptr<Node>> forest_;
  const Node* last_function_ = nullptr;
};

/// GSM on a single element, written out directly.
inline double gsm_element(double parent, double ms, double raw_u, double raw_v, bool minus) {
  const double su = 1.0 / (1.0 + std::exp(-raw_u));
  const double sv = 1.0 / (1.0 + std::exp(-raw_v));
  return parent + ms * (minus ? su - sv : su + sv);
}

/// Random genome with the given composition, for property tests.
inline Chromosome random_chromosome(std::mt19937_64& rng, std::size_t length,
                                    std::uint32_t features, double lo = -5.0, double hi = 5.0) {
  std::uniform_int_distribution<int> kind(0, 2);
  std::uniform_int_distribution<int> op(0, 3);
  std::uniform_int_distribution<std::uint32_t> feat(0, features - 1);
  std::uniform_real_distribution<double> c(lo, hi);
  Chromosome out;
  for (std::size_t i = 0; i < length; ++i) {
    switch (kind(rng)) {
      case 0: out.push_back(Gene::function(static_cast<Op>(op(rng)))); break;
      case 1: out.push_back(Gene::variable(feat(rng))); break;
      default: out.push_back(Gene::ephemeral(c(rng))); break;
    }
  }
  return out;
}

inline Matrix<double> random_matrix(std::mt19937_64& rng, std::size_t rows, std::size_t cols,
                                    double lo = -3.0, double hi = 3.0) {
  std::uniform_real_distribution<double> d(lo, hi);
  Matrix<double> m(rows, cols);
  for (double& v : m.flat()) v = d(rng);
  return m;
}

inline Population population_of(const std::vector<Chromosome>& members) {
  Matrix<Gene> genes(members.size(), members.empty() ? 0 : members.front().size());
  for (std::size_t i = 0; i < members.size(); ++i)
    for (std::size_t j = 0; j < members[i].size(); ++j) genes(i, j) = members[i][j];
  return Population(std::move(genes));
}

}  // namespace gsgp::testing
