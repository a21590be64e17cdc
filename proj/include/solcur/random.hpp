//
// solcur - solubility dataset curation and evaluation toolkit
// SPDX-License-Identifier: Apache-2.0
//

#ifndef SOLCUR_RANDOM_HPP_
#define SOLCUR_RANDOM_HPP_

#include <array>
#include <cstdint>
#include <limits>
#include <span>
#include <utility>

namespace solcur {

// SplitMix64 step (Steele, Lea, Flood 2014): state += 0x9E3779B97F4A7C15,
// then the 30/27/31 xor-shift multiply finalizer. Used for seeding and for
// deriving independent sub-seeds.
std::uint64_t splitmix64(std::uint64_t &state);

// Mixes a seed with a stream index into a fresh seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

// xoshiro256** 1.0 (Blackman, Vigna 2018). State is filled from four
// successive splitmix64 outputs of the seed. Every sequence this project
// draws comes from this generator so results are reproducible across
// platforms and standard library versions.
class Xoshiro256 {
public:
  using result_type = std::uint64_t;

  explicit Xoshiro256(std::uint64_t seed);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }
  result_type operator()() { return next(); }
  result_type next();

  // Uniform integer in [0, bound) by rejection; bound > 0.
  std::uint64_t below(std::uint64_t bound);
  // Uniform double in [0, 1) from the top 53 bits.
  double uniform();
  // Standard normal via the Box-Muller transform (one value per call).
  double normal();

private:
  std::array<std::uint64_t, 4> s_;
};

// Fisher-Yates shuffle driven by Xoshiro256::below.
template <class T>
void shuffle(std::span<T> items, Xoshiro256 &rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng.below(i));
    std::swap(items[i - 1], items[j]);
  }
}

}  // namespace solcur

#endif  // SOLCUR_RANDOM_HPP_
