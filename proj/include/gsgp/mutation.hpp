#pragma once

#include <cmath>
#include <cstdint>
#include <utility>

#include "gsgp/backend.hpp"
#include "gsgp/core.hpp"
#include "gsgp/rng.hpp"

namespace gsgp {

/// Random-tree indices and mutation steps for generation `generation`.
/// Slot i reads blocks (seed, plan stream + generation, 2i) for the index pair
/// and 2i + 1 for the step, so the plan is the same under any backend.
inline MutationPlan build_mutation_plan(std::size_t m, std::size_t r, const RunConfig& cfg,
                                        std::uint64_t generation, Backend& backend) {
  if (r < 2) throw ConfigError("mutation needs at least two random trees");
  MutationPlan plan;
  plan.u.resize(m);
  plan.v.resize(m);
  plan.ms.resize(m);
  const std::uint64_t stream = streams::kMutationPlan + generation;
  backend.for_rows(m, [&](std::size_t i) {
    const auto idx = random_block(cfg.seed, stream, 2 * std::uint64_t{i});
    const auto u = to_index(combine_words(idx[0], idx[1]), r);
    auto v = to_index(combine_words(idx[2], idx[3]), r - 1);
    if (v >= u) ++v;
    const auto step = random_block(cfg.seed, stream, 2 * std::uint64_t{i} + 1);
    plan.u[i] = static_cast<std::uint32_t>(u);
    plan.v[i] = static_cast<std::uint32_t>(v);
    plan.ms[i] = cfg.mutation_step.sample(to_unit(combine_words(step[0], step[1])));
  });
  return plan;
}

inline MutationPlan build_mutation_plan(std::size_t m, std::size_t r, const RunConfig& cfg,
                                        std::uint64_t generation) {
  auto seq = Backend::sequential();
  return build_mutation_plan(m, r, cfg, generation, seq);
}

inline double sigmoid(double x) noexcept { return 1.0 / (1.0 + std::exp(-x)); }

namespace detail {

inline void check_gsm_shapes(const SemanticMatrix& parents, const SemanticMatrix& trees,
                             const MutationPlan& plan) {
  if (parents.cols() != trees.cols())
    throw DimensionError("gsm: parent and random-tree matrices have different case counts");
  if (plan.size() != parents.rows() || plan.u.size() != plan.ms.size() ||
      plan.v.size() != plan.ms.size())
    throw DimensionError("gsm: plan length differs from population size");
  for (std::size_t i = 0; i < plan.size(); ++i)
    if (plan.u[i] >= trees.rows() || plan.v[i] >= trees.rows())
      throw DimensionError("gsm: plan references a random tree out of range");
}

inline double perturb(double parent, double ms, double sig_u, double sig_v,
                      GsmSign sign) noexcept {
  return parent + ms * (sign == GsmSign::Minus ? sig_u - sig_v : sig_u + sig_v);
}

}  // namespace detail

/// Element-wise logistic of a raw random-tree semantic matrix.
inline SemanticMatrix squash(const SemanticMatrix& trees, Backend& backend) {
  SemanticMatrix out(trees.rows(), trees.cols());
  backend.map_elements(out, [&](std::size_t i, std::size_t j) { return sigmoid(trees(i, j)); });
  return out;
}

/// Offspring i of parent i:
///   parent(i, j) + ms[i] * (sigmoid(R[u[i], j]) -/+ sigmoid(R[v[i], j]))
/// with the sigmoid applied to the raw random-tree semantics here.
inline SemanticMatrix gsm(const SemanticMatrix& parents, const SemanticMatrix& trees,
                          const MutationPlan& plan, const RunConfig& cfg, Backend& backend) {
  detail::check_gsm_shapes(parents, trees, plan);
  SemanticMatrix out(parents.rows(), parents.cols());
  const GsmSign sign = cfg.gsm_sign;
  backend.map_elements(out, [&](std::size_t i, std::size_t j) {
    return detail::perturb(parents(i, j), plan.ms[i], sigmoid(trees(plan.u[i], j)),
                           sigmoid(trees(plan.v[i], j)), sign);
  });
  return out;
}

/// Same arithmetic as gsm() with the random-tree sigmoid precomputed by
/// squash(); writes into `out`, which must already have the parent shape.
inline void gsm_squashed_into(const SemanticMatrix& parents, const SemanticMatrix& squashed,
                              const MutationPlan& plan, GsmSign sign, SemanticMatrix& out,
                              Backend& backend) {
  detail::check_gsm_shapes(parents, squashed, plan);
  if (out.rows() != parents.rows() || out.cols() != parents.cols())
    throw DimensionError("gsm: output matrix shape differs from parents");
  backend.map_elements(out, [&](std::size_t i, std::size_t j) {
    return detail::perturb(parents(i, j), plan.ms[i], squashed(plan.u[i], j),
                           squashed(plan.v[i], j), sign);
  });
}

/// Applies one plan to the train and test matrices of the same population.
inline std::pair<SemanticMatrix, SemanticMatrix> gsm_paired(
    const SemanticMatrix& parents_train, const SemanticMatrix& parents_test,
    const SemanticMatrix& trees_train, const SemanticMatrix& trees_test,
    const MutationPlan& plan, const RunConfig& cfg, Backend& backend) {
  if (parents_train.rows() != parents_test.rows() || trees_train.rows() != trees_test.rows())
    throw DimensionError("gsm_paired: train and test populations differ in size");
  return {gsm(parents_train, trees_train, plan, cfg, backend),
          gsm(parents_test, trees_test, plan, cfg, backend)};
}

}  // namespace gsgp
