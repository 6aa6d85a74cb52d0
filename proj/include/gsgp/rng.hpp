#pragma once

#include <array>
#include <cstdint>

namespace gsgp {

// Philox4x32-10 counter-based generator (Salmon et al., SC'11). Every draw is a
// pure function of (key, counter), so parallel loops can address random values
// by index and obtain the same numbers regardless of scheduling.
namespace philox {

using Block = std::array<std::uint32_t, 4>;
using Key = std::array<std::uint32_t, 2>;

inline constexpr std::uint32_t kMul0 = 0xD2511F53u;
inline constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
inline constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
inline constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

constexpr Block round(Block ctr, Key key) noexcept {
  const std::uint64_t p0 = std::uint64_t{kMul0} * ctr[0];
  const std::uint64_t p1 = std::uint64_t{kMul1} * ctr[2];
  const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
  const auto lo0 = static_cast<std::uint32_t>(p0);
  const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
  const auto lo1 = static_cast<std::uint32_t>(p1);
  return {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
}

constexpr Block philox4x32_10(Block ctr, Key key) noexcept {
  for (int r = 0; r < 10; ++r) {
    if (r > 0) {
      key[0] += kWeyl0;
      key[1] += kWeyl1;
    }
    ctr = round(ctr, key);
  }
  return ctr;
}

}  // namespace philox

/// Raw 128-bit block addressed by (seed, stream, counter).
constexpr philox::Block random_block(std::uint64_t seed, std::uint64_t stream,
                                     std::uint64_t counter) noexcept {
  const philox::Block ctr{static_cast<std::uint32_t>(counter),
                          static_cast<std::uint32_t>(counter >> 32),
                          static_cast<std::uint32_t>(stream),
                          static_cast<std::uint32_t>(stream >> 32)};
  const philox::Key key{static_cast<std::uint32_t>(seed),
                        static_cast<std::uint32_t>(seed >> 32)};
  return philox::philox4x32_10(ctr, key);
}

constexpr std::uint64_t combine_words(std::uint32_t lo, std::uint32_t hi) noexcept {
  return (std::uint64_t{hi} << 32) | lo;
}

/// Maps 64 random bits to a double in [0, 1) using the top 53 bits.
constexpr double to_unit(std::uint64_t bits) noexcept {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

/// High 64 bits of the 128-bit product a * b.
constexpr std::uint64_t mul_hi64(std::uint64_t a, std::uint64_t b) noexcept {
  const std::uint64_t a_lo = a & 0xFFFFFFFFu, a_hi = a >> 32;
  const std::uint64_t b_lo = b & 0xFFFFFFFFu, b_hi = b >> 32;
  const std::uint64_t lo_lo = a_lo * b_lo;
  const std::uint64_t hi_lo = a_hi * b_lo;
  const std::uint64_t lo_hi = a_lo * b_hi;
  const std::uint64_t cross = (lo_lo >> 32) + (hi_lo & 0xFFFFFFFFu) + lo_hi;
  return a_hi * b_hi + (hi_lo >> 32) + (cross >> 32);
}

/// Maps 64 random bits to an index in [0, bound) by multiply-shift.
constexpr std::uint64_t to_index(std::uint64_t bits, std::uint64_t bound) noexcept {
  return mul_hi64(bits, bound);
}

/// Uniform real in [0, 1); stateless.
constexpr double rng_stream(std::uint64_t seed, std::uint64_t stream,
                            std::uint64_t counter) noexcept {
  const auto b = random_block(seed, stream, counter);
  return to_unit(combine_words(b[0], b[1]));
}

// Stream namespaces. Each consumer owns a disjoint range of stream ids, so no
// two purposes ever read the same block.
namespace streams {
inline constexpr std::uint64_t kPopulation = 0;
inline constexpr std::uint64_t kRandomTrees = std::uint64_t{1} << 40;
inline constexpr std::uint64_t kMutationPlan = std::uint64_t{2} << 40;
inline constexpr std::uint64_t kRunSeed = std::uint64_t{3} << 40;
inline constexpr std::uint64_t kDataSplit = std::uint64_t{4} << 40;
inline constexpr std::uint64_t kSynthetic = std::uint64_t{5} << 40;
}  // namespace streams

/// Seed for the run-th independent run of a multi-run invocation.
constexpr std::uint64_t derive_run_seed(std::uint64_t seed, std::uint64_t run) noexcept {
  const auto b = random_block(seed, streams::kRunSeed, run);
  return combine_words(b[0], b[1]);
}

}  // namespace gsgp
