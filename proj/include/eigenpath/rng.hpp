#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace eigenpath {

// Deterministic RNG used everywhere randomness is needed. Distribution
// sampling is written out explicitly (rather than via std:: distribution
// adapters, whose output is implementation defined) so that a given seed
// produces the same stream on every platform and standard library.
class Rng {
 public:
  explicit Rng(uint64_t seed) : gen_(seed) {}

  uint64_t integer() { return gen_(); }

  // Uniform in the open interval (0, 1).
  double uniform() {
    for (;;) {
      double u = static_cast<double>(gen_() >> 11) * 0x1.0p-53;
      if (u > 0.0) return u;
    }
  }

  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  // Standard normal via Box-Muller; caches the second sample.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  double exponential(double rate) { return -std::log(uniform()) / rate; }

  // Uniform integer in [0, n).
  uint64_t below(uint64_t n) {
    // Rejection-free modulo is biased for large n; all our n are tiny, but
    // do the rejection anyway for exactness.
    uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    for (;;) {
      uint64_t x = gen_();
      if (x < limit) return x % n;
    }
  }

 private:
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

// splitmix64 step, used to derive per-trajectory seeds from a master seed
// so that trajectory i is reproducible independently of thread scheduling.
inline uint64_t mix_seed(uint64_t master, uint64_t index) {
  uint64_t z = master + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace eigenpath
