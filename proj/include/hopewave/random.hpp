#ifndef HOPEWAVE_RANDOM_HPP
#define HOPEWAVE_RANDOM_HPP

#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace hopewave {

/// splitmix64 finalizer; used to derive independent substream seeds.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Seed of the substream identified by `tags` under `seed`.
inline std::uint64_t substream_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> tags) {
  std::uint64_t s = mix64(seed);
  for (std::uint64_t t : tags) s = mix64(s ^ mix64(t + 0x632BE59BD9B4E019ULL));
  return s;
}

/// Seeded generator with platform-independent sampling helpers.
///
/// The standard distributions are implementation-defined, so uniform reals and
/// bounded integers are derived from raw mt19937_64 output here. This keeps
/// corpora, masks and initializations identical across standard libraries.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(mix64(seed)) {}
  Rng(std::uint64_t seed, std::initializer_list<std::uint64_t> tags)
      : engine_(substream_seed(seed, tags)) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, bound). Rejection sampling, no modulo bias.
  std::uint64_t below(std::uint64_t bound) {
    if (bound <= 1) return 0;
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % bound;
  }

  bool bernoulli(double p) { return uniform() < p; }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

  /// `k` distinct elements of `pool` chosen uniformly (partial Fisher-Yates).
  /// The pool is reordered in place; the sample is its first k entries.
  template <typename T>
  std::vector<T> sample_without_replacement(std::vector<T>& pool, std::size_t k) {
    if (k > pool.size()) k = pool.size();
    for (std::size_t i = 0; i < k; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(below(pool.size() - i));
      std::swap(pool[i], pool[j]);
    }
    return std::vector<T>(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(k));
  }

private:
  std::mt19937_64 engine_;
};

}  // namespace hopewave

#endif
