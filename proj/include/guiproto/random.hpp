#pragma once

// Seeded randomness with library-independent distributions, so corpora and
// training runs are reproducible across standard library implementations.

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace guiproto {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t next() { return eng_(); }
  // Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // Uniform integer in [lo, hi].
  int uniform_int(int lo, int hi) {
    const auto span = static_cast<std::uint64_t>(static_cast<std::int64_t>(hi) - lo + 1);
    return lo + static_cast<int>(eng_() % span);
  }
  bool coin(double p = 0.5) { return uniform() < p; }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[static_cast<std::size_t>(eng_() % i)]);
  }

  // Derives an independent stream for a sub-task.
  Rng fork(std::uint64_t salt) { return Rng(eng_() ^ (salt * 0x9E3779B97F4A7C15ull)); }

 private:
  std::mt19937_64 eng_;
};

}  // namespace guiproto
