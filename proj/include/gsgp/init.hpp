#pragma once

#include <algorithm>
#include <cstdint>

#include "gsgp/backend.hpp"
#include "gsgp/core.hpp"
#include "gsgp/rng.hpp"

namespace gsgp {

/// Draws the gene at (stream, counter). One Philox block supplies both the
/// kind draw and the payload draw.
inline Gene sample_gene(const RunConfig& cfg, std::size_t feature_count, std::uint64_t stream,
                        std::uint64_t counter) {
  const auto block = random_block(cfg.seed, stream, counter);
  const double kind_draw = to_unit(combine_words(block[0], block[1]));
  const std::uint64_t payload_bits = combine_words(block[2], block[3]);
  const auto& p = cfg.gene_probabilities;

  GeneKind kind = GeneKind::Constant;
  if (kind_draw < p.function())
    kind = GeneKind::Function;
  else if (kind_draw < p.function() + p.feature())
    kind = GeneKind::Feature;
  // Rounding in the cumulative sum must not select a zero-probability kind.
  if (kind == GeneKind::Constant && p.constant() == 0.0)
    kind = p.feature() > 0.0 ? GeneKind::Feature : GeneKind::Function;

  switch (kind) {
    case GeneKind::Function:
      return Gene::function(static_cast<Op>(to_index(payload_bits, kOpCount)));
    case GeneKind::Feature:
      return Gene::variable(static_cast<std::uint32_t>(to_index(payload_bits, feature_count)));
    case GeneKind::Constant: break;
  }
  const double c = cfg.erc_lo + (cfg.erc_hi - cfg.erc_lo) * to_unit(payload_bits);
  return Gene::ephemeral(std::clamp(c, cfg.erc_lo, cfg.erc_hi));
}

/// count chromosomes of cfg.program_size genes. Gene (i, j) is drawn from
/// stream stream_base + i at counter j, independent of every other gene.
inline Population create_population(std::size_t count, const RunConfig& cfg,
                                    std::size_t feature_count, std::uint64_t stream_base,
                                    Backend& backend) {
  if (feature_count == 0 && cfg.gene_probabilities.feature() > 0.0)
    throw ConfigError("feature genes requested but the dataset has no features");
  Matrix<Gene> genes(count, cfg.program_size);
  backend.map_elements(genes, [&](std::size_t i, std::size_t j) {
    return sample_gene(cfg, feature_count, stream_base + i, j);
  });
  return Population(std::move(genes));
}

}  // namespace gsgp
