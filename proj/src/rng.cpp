#include "qvlab/rng.hpp"

#include <cmath>

namespace qv {

namespace {

constexpr std::uint64_t kPhiloxM0 = 0xD2E7470EE14C6C93ULL;
constexpr std::uint64_t kPhiloxM1 = 0xCA5A826395121157ULL;
constexpr std::uint64_t kWeyl0 = 0x9E3779B97F4A7C15ULL;
constexpr std::uint64_t kWeyl1 = 0xBB67AE8584CAA73BULL;

inline void mulhilo(std::uint64_t a, std::uint64_t b, std::uint64_t& hi,
                    std::uint64_t& lo) {
  unsigned __int128 p = static_cast<unsigned __int128>(a) * b;
  hi = static_cast<std::uint64_t>(p >> 64);
  lo = static_cast<std::uint64_t>(p);
}

}  // namespace

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::array<std::uint64_t, 4> Philox4x64::block(const Key& key, const Counter& ctr) {
  std::uint64_t c0 = ctr[0], c1 = ctr[1], c2 = ctr[2], c3 = ctr[3];
  std::uint64_t k0 = key[0], k1 = key[1];
  for (int round = 0; round < 10; ++round) {
    std::uint64_t hi0, lo0, hi1, lo1;
    mulhilo(kPhiloxM0, c0, hi0, lo0);
    mulhilo(kPhiloxM1, c2, hi1, lo1);
    std::uint64_t n0 = hi1 ^ c1 ^ k0;
    std::uint64_t n1 = lo1;
    std::uint64_t n2 = hi0 ^ c3 ^ k1;
    std::uint64_t n3 = lo0;
    c0 = n0; c1 = n1; c2 = n2; c3 = n3;
    k0 += kWeyl0;
    k1 += kWeyl1;
  }
  return {c0, c1, c2, c3};
}

double uniform01_at(const Philox4x64::Key& key, std::uint64_t index) {
  Philox4x64::Counter ctr = {index >> 2, 0, 0, 0};
  auto out = Philox4x64::block(key, ctr);
  std::uint64_t word = out[index & 3];
  // 53 random bits, nudged off zero so log() below is safe
  return (static_cast<double>(word >> 11) + 0.5) * 0x1.0p-53;
}

double normal_at(const Philox4x64::Key& key, std::uint64_t index) {
  std::uint64_t pair = index >> 1;
  double u1 = uniform01_at(key, 2 * pair);
  double u2 = uniform01_at(key, 2 * pair + 1);
  double r = std::sqrt(-2.0 * std::log(u1));
  double angle = 2.0 * M_PI * u2;
  return (index & 1) ? r * std::sin(angle) : r * std::cos(angle);
}

Philox4x64::Key derive_key(std::uint64_t master_seed, std::uint64_t stream_index,
                           std::uint64_t substream, std::uint64_t context) {
  std::uint64_t mixed = splitmix64(stream_index) ^
                        splitmix64(0xA5A5A5A500000000ULL + substream) ^
                        splitmix64(context);
  return {master_seed, splitmix64(mixed)};
}

}  // namespace qv
