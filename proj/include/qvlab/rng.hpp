#pragma once

#include <array>
#include <cstdint>

namespace qv {

std::uint64_t splitmix64(std::uint64_t x);

// Philox 4x64 with 10 rounds, the counter-based generator of Salmon et al.
// A block is a pure function of (key, counter), so any consumer can pull
// variate i without generating variates 0..i-1 first.
struct Philox4x64 {
  using Key = std::array<std::uint64_t, 2>;
  using Counter = std::array<std::uint64_t, 4>;

  static std::array<std::uint64_t, 4> block(const Key& key, const Counter& ctr);
};

// Uniform draw in (0, 1): index t lives in block t/4, lane t%4.
double uniform01_at(const Philox4x64::Key& key, std::uint64_t index);

// Standard normal via Box-Muller; the pair (2j, 2j+1) of uniforms feeds the
// pair (2j, 2j+1) of normals, so draws stay addressable.
double normal_at(const Philox4x64::Key& key, std::uint64_t index);

// Key for a (stream, substream) pair with a context value mixed in (grid size
// in practice), so distinct resolutions consume fresh variates.
Philox4x64::Key derive_key(std::uint64_t master_seed, std::uint64_t stream_index,
                           std::uint64_t substream, std::uint64_t context);

}  // namespace qv
