#ifndef STPLAN_RNG_HPP
#define STPLAN_RNG_HPP

#include <cstdint>
#include <random>

namespace stplan {

// Deterministic RNG wrapper. Distribution sampling is hand-rolled on top of
// the raw mt19937_64 stream so that identical seeds give identical draws
// regardless of the standard library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  // Uniform in [0, 1).
  double uniform01() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Uniform integer in [0, n).
  std::uint64_t uniform_index(std::uint64_t n) {
    // Rejection sampling keeps the distribution exact.
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    std::uint64_t v = gen_();
    while (v >= limit) v = gen_();
    return v % n;
  }

  bool bernoulli(double p) { return uniform01() < p; }

  // Derive an independent stream, e.g. one per trial or per agent.
  Rng fork(std::uint64_t salt) const {
    std::uint64_t s = seed_mix_ ^ (salt * 0x9e3779b97f4a7c15ull);
    s ^= s >> 30;
    s *= 0xbf58476d1ce4e5b9ull;
    s ^= s >> 27;
    s *= 0x94d049bb133111ebull;
    s ^= s >> 31;
    return Rng(s);
  }

  void note_seed(std::uint64_t seed) { seed_mix_ = seed; }

  static Rng seeded(std::uint64_t seed) {
    Rng r(seed);
    r.note_seed(seed);
    return r;
  }

 private:
  std::mt19937_64 gen_;
  std::uint64_t seed_mix_ = 0;
};

}  // namespace stplan

#endif  // STPLAN_RNG_HPP
