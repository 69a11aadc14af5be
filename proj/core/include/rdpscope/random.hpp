#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace rdpscope {

// Deterministic random source. All randomness in the toolkit flows through
// this wrapper so that results are reproducible bit-for-bit from a seed:
// mt19937_64 has a standard-mandated output sequence and the derived draws
// below avoid the implementation-defined std distributions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const { return seed_; }

  std::uint64_t next() { return engine_(); }

  // Uniform integer in [0, n). n must be > 0.
  std::uint64_t below(std::uint64_t n) { return engine_() % n; }

  // Uniform double in [0, 1) with 53 bits of precision.
  double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double range(double lo, double hi) { return lo + (hi - lo) * unit(); }

  // Standard normal via Box-Muller, no cached spare (keeps draws stateless).
  double gaussian() {
    double u1 = unit();
    while (u1 <= 0.0) u1 = unit();
    const double u2 = unit();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::swap(items[i - 1], items[below(i)]);
    }
  }

  // k distinct indices drawn from [0, n), returned in ascending order
  // (Floyd's sampling; sorted so traversal order is deterministic).
  std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k) {
    if (k >= n) {
      std::vector<std::size_t> all(n);
      for (std::size_t i = 0; i < n; ++i) all[i] = i;
      return all;
    }
    std::vector<std::size_t> picked;
    picked.reserve(k);
    std::vector<bool> seen(n, false);
    for (std::size_t j = n - k; j < n; ++j) {
      std::size_t t = static_cast<std::size_t>(below(j + 1));
      if (seen[t]) t = j;
      seen[t] = true;
      picked.push_back(t);
    }
    std::sort(picked.begin(), picked.end());
    return picked;
  }

  // Derives an independent stream; the mixing constants are fixed forever.
  Rng fork(std::uint64_t stream) const {
    const std::uint64_t mixed = seed_ * 0xbf58476d1ce4e5b9ULL + 0x94d049bb133111ebULL;
    return Rng(mixed ^ (0x9e3779b97f4a7c15ULL * (stream + 1)));
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace rdpscope
