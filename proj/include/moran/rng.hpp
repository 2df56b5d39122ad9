#pragma once

#include <cmath>
#include <cstdint>

namespace moran {

// Counter-based generator: every draw is a stateless 64-bit hash of
// (key, counter). Replicate streams derived from (master seed, stream index)
// are independent of each other and of how many draws earlier streams made,
// which keeps parallel Monte Carlo reproducible.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : key_(mix(seed ^ kGamma)) {}

  Rng(std::uint64_t master, std::uint64_t stream)
      : key_(mix(mix(master + kGamma) ^ (stream * 0xd1342543de82ef95ull + 1))) {}

  std::uint64_t next_u64() { return mix(key_ + (++ctr_) * kGamma); }

  // uniform on [0,1), 53 random bits
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // uniform on {0, ..., n-1}; bias is O(n / 2^64), negligible for our n
  std::int64_t uniform_int(std::int64_t n) {
    return static_cast<std::int64_t>(
        (static_cast<__uint128_t>(next_u64()) * static_cast<__uint128_t>(n)) >> 64);
  }

  double exponential(double rate) {
    // -log(1-U) stays finite because uniform() < 1
    return -std::log1p(-uniform()) / rate;
  }

  bool bernoulli(double p) { return uniform() < p; }

 private:
  static constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ull;

  static std::uint64_t mix(std::uint64_t z) {
    z += kGamma;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  std::uint64_t key_;
  std::uint64_t ctr_ = 0;
};

}  // namespace moran
