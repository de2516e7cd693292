#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace panonav {

inline uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// mt19937_64 with hand-rolled bounded draws. std::uniform_int_distribution is
// not portable across standard libraries, and these streams must replay
// bit-identically everywhere.
class Rng {
 public:
  explicit Rng(uint64_t seed) : seed_(seed), engine_(splitmix64(seed)) {}

  uint64_t next() { return engine_(); }

  // Lemire's unbiased bounded draw.
  uint64_t below(uint64_t bound) {
    if (bound == 0) return 0;
    unsigned __int128 m = static_cast<unsigned __int128>(next()) * bound;
    auto lo = static_cast<uint64_t>(m);
    if (lo < bound) {
      uint64_t threshold = (0 - bound) % bound;
      while (lo < threshold) {
        m = static_cast<unsigned __int128>(next()) * bound;
        lo = static_cast<uint64_t>(m);
      }
    }
    return static_cast<uint64_t>(m >> 64);
  }

  int range(int lo, int hi) {  // inclusive
    return lo + static_cast<int>(below(static_cast<uint64_t>(hi - lo + 1)));
  }

  double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  bool chance(double p) { return unit() < p; }

  template <typename T>
  const T& pick(const std::vector<T>& v) {
    return v[below(v.size())];
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      size_t j = below(i);
      std::swap(v[i - 1], v[j]);
    }
  }

  // Independent child stream; reproducible from the stored base seed.
  Rng fork(uint64_t salt) const { return Rng(splitmix64(seed_ ^ splitmix64(salt))); }

  uint64_t seed() const { return seed_; }

 private:
  uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace panonav
