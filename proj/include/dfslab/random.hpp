#ifndef DFSLAB_RANDOM_HPP
#define DFSLAB_RANDOM_HPP

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>

namespace dfslab {

/// Seeded generator with distribution code written out by hand, so a given
/// seed produces the same numbers with every standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller.
  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  std::complex<double> complex_normal() { return {normal(), normal()}; }

  std::uint64_t next() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace dfslab

#endif  // DFSLAB_RANDOM_HPP
