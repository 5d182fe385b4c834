#pragma once

#include <bit>
#include <cstdint>
#include <random>
#include <span>
#include <utility>

namespace pslf {

// One splitmix64 step; used to derive decorrelated sub-seeds (the
// trainer's shuffle stream) from a run seed.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Deterministic random source behind every seed in the library. The raw
// stream is std::mt19937_64, whose output sequence is fixed by the C++
// standard; the derived draws are pinned here (not delegated to
// <random> distributions, which are implementation-defined) so that
// partitions, shuffles and initial factors reproduce bit-for-bit on any
// platform:
//   uniform_index(n)  rejection sampling on the low bits of next()
//   uniform(lo, hi)   top 53 bits of next() mapped to [0,1), scaled
//   shuffle           Fisher-Yates from the back, j = uniform_index(i+1)
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next() { return gen_(); }

  // Uniform in [0, bound); bound > 0.
  std::size_t uniform_index(std::size_t bound) {
    const std::uint64_t b = bound;
    const std::uint64_t mask = ~std::uint64_t{0} >> std::countl_zero(b | 1);
    std::uint64_t x;
    do {
      x = gen_() & mask;
    } while (x >= b);
    return static_cast<std::size_t>(x);
  }

  // Uniform in [lo, hi).
  double uniform(double lo, double hi) {
    const double unit = static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    return lo + unit * (hi - lo);
  }

  template <typename T>
  void shuffle(std::span<T> values) {
    for (std::size_t i = values.size(); i > 1; --i) {
      std::swap(values[i - 1], values[uniform_index(i)]);
    }
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace pslf
