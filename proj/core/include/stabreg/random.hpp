#ifndef STABREG_RANDOM_HPP
#define STABREG_RANDOM_HPP

#include <cstdint>
#include <random>

namespace stabreg {

/// Seeded generator with a platform-independent bounded draw, so seeded
/// runs produce the same samples under every standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t next() { return eng_(); }

  /// Uniform in [0, n); n > 0.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = ~std::uint64_t(0) - (~std::uint64_t(0) % n);
    std::uint64_t v;
    do v = eng_();
    while (v >= limit);
    return v % n;
  }

  /// True with probability num/den.
  bool chance(std::uint64_t num, std::uint64_t den) { return below(den) < num; }

 private:
  std::mt19937_64 eng_;
};

}  // namespace stabreg

#endif  // STABREG_RANDOM_HPP
