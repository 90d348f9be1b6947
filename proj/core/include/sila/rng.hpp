#ifndef SILA_RNG_HPP
#define SILA_RNG_HPP

#include <cstdint>
#include <random>
#include <vector>

namespace sila {

// Seedable 64-bit generator with platform-independent sampling helpers.
// std::mt19937_64 output is standardized, and the derived uniform/integer
// draws below avoid the implementation-defined std::distributions, so every
// stochastic run is reproducible from its seed on any platform.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  // Uniform in [0, 1).
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [lo, hi], inclusive. Rejection sampling keeps the
  // draw exactly uniform.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    const std::uint64_t range = static_cast<std::uint64_t>(hi - lo) + 1;
    if (range == 0) return static_cast<std::int64_t>(next_u64());  // full span
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % range;
    std::uint64_t x;
    do {
      x = next_u64();
    } while (x >= limit);
    return lo + static_cast<std::int64_t>(x % range);
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(uniform_int(0, static_cast<std::int64_t>(i) - 1));
      std::swap(v[i - 1], v[j]);
    }
  }

  // Independent child stream; mixing keeps substreams decorrelated.
  Rng fork(std::uint64_t salt) {
    return Rng(next_u64() ^ (salt * 0x9e3779b97f4a7c15ULL));
  }

private:
  std::mt19937_64 gen_;
};

}  // namespace sila

#endif
