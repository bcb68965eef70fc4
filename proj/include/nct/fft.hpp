/*
 * fft.hpp — radix-2 FFT and Fourier-coefficient helpers on the unit circle.
 *
 * Conventions: functions on T are 1-periodic in the angle variable x
 * (theta = 2 pi x), sampled at x_j = j/G.  Coefficient index k pairs with
 * e^{2 pi i k x}; coeff(k) = (1/G) sum_j s_j e^{-2 pi i k x_j}.
 */

#pragma once

#include <complex>
#include <vector>

#include "nct/util.hpp"

namespace nct {

inline void fft_inplace(std::vector<cplx>& a, bool inverse = false) {
  const std::size_t n = a.size();
  if (n <= 1) return;
  // bit reversal
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    double ang = kTwoPi / double(len) * (inverse ? 1.0 : -1.0);
    cplx wl(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      cplx w(1.0, 0.0);
      for (std::size_t j = 0; j < len / 2; ++j) {
        cplx u = a[i + j];
        cplx v = a[i + j + len / 2] * w;
        a[i + j] = u + v;
        a[i + j + len / 2] = u - v;
        w *= wl;
      }
    }
  }
  if (inverse) {
    for (auto& z : a) z /= double(n);
  }
}

// Fourier coefficients of complex samples; result indexed by FFT bin.
// Use fft_coeff to address by signed frequency.
inline std::vector<cplx> fourier_coeffs(const std::vector<cplx>& samples) {
  std::vector<cplx> a = samples;
  fft_inplace(a, false);
  const double g = double(samples.size());
  for (auto& z : a) z /= g;
  return a;
}

inline std::vector<cplx> fourier_coeffs(const std::vector<double>& samples) {
  std::vector<cplx> a(samples.begin(), samples.end());
  fft_inplace(a, false);
  const double g = double(samples.size());
  for (auto& z : a) z /= g;
  return a;
}

// signed-frequency access, k in (-G/2, G/2]
inline cplx fft_coeff(const std::vector<cplx>& coeffs, long k) {
  long g = long(coeffs.size());
  long idx = ((k % g) + g) % g;
  return coeffs[std::size_t(idx)];
}

// Evaluate sum_{|k|<=kmax} c_k e^{2 pi i k x} from bin-indexed coefficients.
inline cplx eval_trig(const std::vector<cplx>& coeffs, long kmax, double x) {
  cplx w = unit_phase(x);
  cplx acc = fft_coeff(coeffs, 0);
  cplx zp = w, zm = std::conj(w);
  for (long k = 1; k <= kmax; ++k) {
    acc += fft_coeff(coeffs, k) * zp + fft_coeff(coeffs, -k) * zm;
    zp *= w;
    zm *= std::conj(w);
  }
  return acc;
}

}  // namespace nct
