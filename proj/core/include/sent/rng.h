#ifndef SENT_RNG_H_
#define SENT_RNG_H_

#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>
#include <string_view>
#include <utility>

namespace sent {

// SplitMix64 finalizer.
uint64_t Mix64(uint64_t x);

// Combines an ordered list of values into one seed. Used for every derived
// random stream, e.g. DeriveSeed({base, iteration, epoch}).
uint64_t DeriveSeed(std::initializer_list<uint64_t> parts);

// FNV-1a. Stable across platforms, unlike std::hash.
uint64_t HashString(std::string_view s);

// Seeded generator. Only the raw 64-bit mt19937_64 stream is used; bounded
// and real draws are computed here so results do not depend on the standard
// library's distribution implementations.
class Rng {
 public:
  using result_type = uint64_t;

  explicit Rng(uint64_t seed) : engine_(seed) {}

  static constexpr result_type min() { return std::mt19937_64::min(); }
  static constexpr result_type max() { return std::mt19937_64::max(); }
  result_type operator()() { return engine_(); }

  // Uniform in [0, 1) with 53 bits of precision.
  double Uniform();

  // Uniform integer in [0, n). n must be positive.
  uint64_t Below(uint64_t n);

  // Uniform real in [-a, a).
  double Symmetric(double a) { return (2.0 * Uniform() - 1.0) * a; }

  // Fisher-Yates shuffle.
  template <typename T>
  void Shuffle(std::span<T> items) {
    for (size_t i = items.size(); i > 1; --i) {
      size_t j = Below(i);
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace sent

#endif  // SENT_RNG_H_
