/*
 * util.hpp — shared small helpers: circle arithmetic, deterministic RNG,
 * local sup refinement and error types used across the library.
 */

#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace nct {

using cplx = std::complex<double>;

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

// fractional part in [0,1)
inline double frac(double x) {
  double f = x - std::floor(x);
  if (f >= 1.0) f -= 1.0;
  if (f < 0.0) f += 1.0;
  return f;
}

// distance on R/Z
inline double circle_dist(double a, double b) {
  double d = frac(a - b);
  return std::min(d, 1.0 - d);
}

// e^{2 pi i x}
inline cplx unit_phase(double x) {
  double t = kTwoPi * frac(x);
  return {std::cos(t), std::sin(t)};
}

struct monotonicity_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct positivity_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct bound_violation_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct contraction_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct overflow_guard_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Golden-section refinement of a smooth local maximum around x0.
// Interval halfwidth h should be on the order of one grid cell.
template <class F>
double refine_max(F&& f, double x0, double h, int iters = 56) {
  const double gr = 0.6180339887498949;
  double a = x0 - h, b = x0 + h;
  double c = b - gr * (b - a);
  double d = a + gr * (b - a);
  double fc = f(c), fd = f(d);
  for (int i = 0; i < iters && (b - a) > 1e-15; ++i) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - gr * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + gr * (b - a);
      fd = f(d);
    }
  }
  double m = std::max(fc, fd);
  m = std::max(m, f(x0));
  return m;
}

// Grid sup of |f| followed by local refinement at the argmax.
template <class F>
double refined_grid_sup(F&& f, int grid) {
  double best = -1.0;
  int arg = 0;
  for (int j = 0; j < grid; ++j) {
    double v = std::abs(f(double(j) / grid));
    if (v > best) {
      best = v;
      arg = j;
    }
  }
  auto af = [&](double x) { return std::abs(f(x)); };
  return refine_max(af, double(arg) / grid, 1.5 / grid);
}

// Deterministic RNG utilities. std::mt19937_64 has a fully specified
// sequence; distributions in <random> do not, so draws are built from
// raw 64-bit words directly.
struct Rng {
  std::mt19937_64 gen;
  explicit Rng(std::uint64_t seed) : gen(seed) {}
  double uniform01() {
    return double(gen() >> 11) * 0x1.0p-53;
  }
  double uniform(double a, double b) { return a + (b - a) * uniform01(); }
  // Box-Muller; deterministic across platforms.
  double gauss() {
    double u1 = uniform01(), u2 = uniform01();
    if (u1 < 1e-300) u1 = 1e-300;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
  }
  cplx cgauss() {
    double u1 = uniform01(), u2 = uniform01();
    if (u1 < 1e-300) u1 = 1e-300;
    double r = std::sqrt(-2.0 * std::log(u1));
    return {r * std::cos(kTwoPi * u2), r * std::sin(kTwoPi * u2)};
  }
  long integer(long lo, long hi) {  // inclusive
    return lo + long(gen() % std::uint64_t(hi - lo + 1));
  }
};

inline bool is_pow2(int g) { return g > 0 && (g & (g - 1)) == 0; }

}  // namespace nct
