#pragma once

#include <cstdint>
#include <random>

namespace rcgan {

using Rng = std::mt19937_64;

// Named random streams derived from a single root seed. Every consumer of
// randomness gets its own generator so that, e.g., turning the penalty term
// off does not shift the latent samples of an otherwise identical run.
enum class Stream : std::uint64_t {
  data = 1,
  init_encoder = 2,
  init_generator = 3,
  init_disc_xz = 4,
  init_disc_xx = 5,
  shuffle = 6,
  latent = 7,
  penalty = 8,
  split = 9,
  anomalies = 10,
};

// splitmix64 finalizer.
constexpr std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t root, Stream stream) {
  return mix_seed(mix_seed(root) ^ static_cast<std::uint64_t>(stream));
}

inline Rng make_rng(std::uint64_t root, Stream stream) {
  return Rng(derive_seed(root, stream));
}

}  // namespace rcgan
