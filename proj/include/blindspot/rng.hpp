#pragma once

// Deterministic random number generation.
//
// Every stochastic component in the library draws from this generator, never
// from std:: distributions, so that results are bit-identical across
// platforms and standard-library versions. The core is xoshiro256**, seeded
// via splitmix64; bounded integers use rejection sampling; reals use the
// 53-bit mantissa ladder.

#include <cstdint>
#include <string_view>
#include <vector>

namespace blindspot {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& x) {
  x += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t rotl(std::uint64_t v, int k) {
  return (v << k) | (v >> (64 - k));
}

}  // namespace detail

class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) { reseed(seed); }

  void reseed(std::uint64_t seed) {
    std::uint64_t x = seed;
    for (auto& word : state_) word = detail::splitmix64(x);
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = detail::rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = detail::rotl(state_[3], 45);
    return result;
  }

  // Uniform integer in [0, n). n must be > 0. Unbiased via rejection.
  std::uint64_t uniform_int(std::uint64_t n) {
    const std::uint64_t threshold = (0 - n) % n;  // 2^64 mod n
    for (;;) {
      const std::uint64_t r = next_u64();
      if (r >= threshold) return r % n;
    }
  }

  // Uniform double in [0, 1) with 53 random mantissa bits.
  double uniform_real() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Bernoulli draw with success probability p.
  bool bernoulli(double p) { return uniform_real() < p; }

  // In-place Fisher-Yates shuffle.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(uniform_int(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::uint64_t state_[4];
};

// --- Seed derivation ---
//
// Child seeds are derived by hashing the parent seed together with a list of
// string/integer tags (protocol name, budget, replicate index, ...). FNV-1a
// accumulates the tag bytes; a splitmix64 finalizer decorrelates nearby tags.

class SeedSequence {
 public:
  explicit SeedSequence(std::uint64_t base) : h_(0xcbf29ce484222325ULL) {
    mix(base);
  }

  SeedSequence& mix(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      h_ ^= (v >> (8 * i)) & 0xffULL;
      h_ *= 0x100000001b3ULL;
    }
    return *this;
  }

  SeedSequence& mix(std::string_view s) {
    for (unsigned char c : s) {
      h_ ^= c;
      h_ *= 0x100000001b3ULL;
    }
    h_ ^= 0xffULL;  // terminator so "ab","c" != "a","bc"
    h_ *= 0x100000001b3ULL;
    return *this;
  }

  std::uint64_t seed() const {
    std::uint64_t x = h_;
    return detail::splitmix64(x);
  }

 private:
  std::uint64_t h_;
};

inline std::uint64_t derive_seed(std::uint64_t base) {
  return SeedSequence(base).seed();
}

template <typename T, typename... Rest>
std::uint64_t derive_seed(std::uint64_t base, T first, Rest... rest) {
  SeedSequence seq(base);
  seq.mix(first);
  (seq.mix(rest), ...);
  return seq.seed();
}

}  // namespace blindspot
