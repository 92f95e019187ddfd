#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>

namespace lmdc {

// splitmix64 finalizer; used to derive independent stream seeds from one
// master seed so that e.g. exploration noise draws never shift world layouts.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t tag) {
  return splitmix64(base ^ splitmix64(tag ^ 0x6a09e667f3bcc909ULL));
}

inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b) {
  return derive_seed(derive_seed(base, a), b);
}

inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b,
                                 std::uint64_t c) {
  return derive_seed(derive_seed(base, a, b), c);
}

// Deterministic random stream. The raw generator is std::mt19937_64 (its
// output sequence is fully pinned by the standard); the distributions are
// hand-rolled because <random> distribution internals are
// implementation-defined and would break run-to-run reproducibility claims
// across standard libraries.
class Rng {
 public:
  Rng() : Rng(0) {}
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  // Uniform in [0, 1) with 53-bit resolution.
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n); unbiased via rejection.
  std::uint64_t uniform_index(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("uniform_index: n must be positive");
    const std::uint64_t threshold = (0 - n) % n;  // 2^64 mod n
    for (;;) {
      std::uint64_t r = gen_();
      if (r >= threshold) return r % n;
    }
  }

  // Standard normal via Box-Muller (cosine branch only, so one draw consumes
  // exactly two generator outputs and the stream stays stateless).
  double normal() {
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
  }

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

 private:
  static constexpr double kPi = 3.14159265358979323846;
  std::mt19937_64 gen_;
};

}  // namespace lmdc
