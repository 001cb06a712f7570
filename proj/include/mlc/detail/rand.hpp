#pragma once

#include <cmath>
#include <cstdint>

#include "mlc/rng.hpp"
#include "mlc/statespace.hpp"

namespace mlc::detail {

/// Deterministic random stream. Draws come from splitmix64 with explicit
/// Box-Muller, so sequences are identical across platforms and standard
/// libraries.
class Rand {
 public:
  explicit Rand(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() { return splitmix64(state_); }

  double uniform() { return double(next() >> 11) * 0x1.0p-53; }  // [0, 1)

  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log1p(-u1));
    double a = 2.0 * M_PI * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  Complex cnormal() {
    double re = normal();
    double im = normal();
    return Complex(re, im);
  }

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

inline Matrix random_hermitian(int d, Rand& r) {
  Matrix g(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) g(i, j) = r.cnormal();
  return (g + g.adjoint().eval()) / 2.0;
}

}  // namespace mlc::detail
