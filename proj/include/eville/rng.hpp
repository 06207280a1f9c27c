#pragma once

#include <cstdint>
#include <random>

namespace eville {

/// The single generator used everywhere. Paths are reproducible within this
/// implementation (libstdc++ distributions), not across languages.
using Engine = std::mt19937_64;

/// Independent substream for replicate `replicate` of a job seeded with
/// `seed`. The seed_seq mixes all 128 input bits, so neighbouring indices
/// give unrelated engine states.
inline Engine substream(std::uint64_t seed, std::uint64_t replicate) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(replicate),
                    static_cast<std::uint32_t>(replicate >> 32)};
  return Engine(seq);
}

inline constexpr std::uint64_t kDefaultSeed = 271828;

}  // namespace eville
