/*
 * circle.hpp — orientation-preserving circle diffeomorphisms.
 *
 * A diffeomorphism is stored through its lift F(x) = x + c + P(x), where
 * c is the mean translation and P is a truncated trigonometric polynomial
 * of period 1.  This representation is closed under composition (via
 * resampling and discrete Fourier analysis on the evaluation grid),
 * differentiates in closed form, and keeps spectral accuracy for the
 * smooth maps this library manipulates.
 *
 * Derivatives of iterates are always computed by chain-rule products
 * along orbits, never by differentiating a reprojected iterate, so the
 * growth data does not inherit accumulated projection error.
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "nct/fft.hpp"
#include "nct/util.hpp"

namespace nct {

class CircleDiffeo {
 public:
  CircleDiffeo() : grid_(1 << 12) {}

  // lift x -> x + translation + sum_k (a_k cos(2 pi k x) + b_k sin(2 pi k x))
  CircleDiffeo(double translation, std::vector<double> cos_amp,
               std::vector<double> sin_amp, int grid, bool check = true)
      : tr_(frac(translation)),
        ca_(std::move(cos_amp)),
        sa_(std::move(sin_amp)),
        grid_(grid) {
    if (!is_pow2(grid_)) throw std::invalid_argument("grid must be a power of two");
    ca_.resize(std::max(ca_.size(), sa_.size()), 0.0);
    sa_.resize(ca_.size(), 0.0);
    prune();
    if (check) validate_monotone();
  }

  static CircleDiffeo identity(int grid = 1 << 12) {
    return rotation(0.0, grid);
  }

  static CircleDiffeo rotation(double alpha, int grid = 1 << 12) {
    CircleDiffeo f;
    f.tr_ = frac(alpha);
    f.grid_ = grid;
    return f;
  }

  // Build from samples of F(x_j) - x_j on the grid.
  static CircleDiffeo from_periodic_samples(const std::vector<double>& s,
                                            bool check = true) {
    int g = int(s.size());
    if (!is_pow2(g)) throw std::invalid_argument("grid must be a power of two");
    auto c = fourier_coeffs(s);
    std::vector<double> ca(std::size_t(g / 2), 0.0), sb(std::size_t(g / 2), 0.0);
    for (int k = 1; k < g / 2; ++k) {
      cplx ck = c[std::size_t(k)];
      ca[std::size_t(k - 1)] = 2.0 * ck.real();
      sb[std::size_t(k - 1)] = -2.0 * ck.imag();
    }
    return CircleDiffeo(c[0].real(), std::move(ca), std::move(sb), g, check);
  }

  int grid() const { return grid_; }
  double translation() const { return tr_; }
  const std::vector<double>& cos_amplitudes() const { return ca_; }
  const std::vector<double>& sin_amplitudes() const { return sa_; }
  std::size_t term_count() const { return ca_.size(); }

  bool is_rotation(double tol = 0.0) const {
    for (std::size_t k = 0; k < ca_.size(); ++k)
      if (std::abs(ca_[k]) > tol || std::abs(sa_[k]) > tol) return false;
    return true;
  }

  // lift value
  double value(double x) const {
    double xf = frac(x);
    double acc = 0.0;
    iterate_terms(xf, [&](std::size_t k, double c, double s) {
      acc += ca_[k] * c + sa_[k] * s;
    });
    return x + tr_ + acc;
  }

  // lift derivative F'(x) (also |Df| of the circle map)
  double deriv(double x) const {
    double xf = frac(x);
    double acc = 1.0;
    iterate_terms(xf, [&](std::size_t k, double c, double s) {
      double w = kTwoPi * double(k + 1);
      acc += w * (-ca_[k] * s + sa_[k] * c);
    });
    return acc;
  }

  double deriv2(double x) const {
    double xf = frac(x);
    double acc = 0.0;
    iterate_terms(xf, [&](std::size_t k, double c, double s) {
      double w = kTwoPi * double(k + 1);
      acc += -w * w * (ca_[k] * c + sa_[k] * s);
    });
    return acc;
  }

  // sup_x |P(x)| upper bound from coefficient moduli
  double periodic_bound() const {
    double a = 0.0;
    for (std::size_t k = 0; k < ca_.size(); ++k)
      a += std::hypot(ca_[k], sa_[k]);
    return a;
  }

  // lift value and derivative in one coefficient sweep
  std::pair<double, double> value_and_deriv(double x) const {
    double xf = frac(x);
    double v = 0.0, d = 1.0;
    iterate_terms(xf, [&](std::size_t k, double c, double s) {
      double w = kTwoPi * double(k + 1);
      v += ca_[k] * c + sa_[k] * s;
      d += w * (-ca_[k] * s + sa_[k] * c);
    });
    return {x + tr_ + v, d};
  }

  // Monotone-lift inversion: safeguarded Newton with bisection fallback.
  // An optional warm start accelerates orbit sweeps.
  double invert_point(double y, double tol = 1e-13,
                      double hint = std::numeric_limits<double>::quiet_NaN()) const {
    double a = y - tr_ - periodic_bound() - 1e-9;
    double b = y - tr_ + periodic_bound() + 1e-9;
    double x = std::isfinite(hint) ? std::clamp(hint, a, b) : 0.5 * (a + b);
    for (int it = 0; it < 200; ++it) {
      auto [vx, d] = value_and_deriv(x);
      double fx = vx - y;
      if (std::abs(fx) < tol) return x;
      if (fx > 0)
        b = x;
      else
        a = x;
      double xn = (d > 1e-12) ? x - fx / d : 0.5 * (a + b);
      if (xn <= a || xn >= b) xn = 0.5 * (a + b);
      x = xn;
    }
    return x;
  }

  double min_derivative_on_grid() const;

 private:
  double tr_{0.0};
  std::vector<double> ca_, sa_;  // cos/sin amplitudes, index k-1 <-> frequency k
  int grid_;

  template <class Fn>
  void iterate_terms(double xf, Fn&& fn) const {
    if (ca_.empty()) return;
    const double ang = kTwoPi * xf;
    double c = std::cos(ang), s = std::sin(ang);
    double ck = c, sk = s;
    for (std::size_t k = 0; k < ca_.size(); ++k) {
      if (ca_[k] != 0.0 || sa_[k] != 0.0) fn(k, ck, sk);
      // rotate to frequency k+2, resync periodically against drift
      if (((k + 1) & 63) == 0) {
        double a2 = kTwoPi * frac(double(k + 2) * xf);
        ck = std::cos(a2);
        sk = std::sin(a2);
      } else {
        double cn = ck * c - sk * s;
        sk = sk * c + ck * s;
        ck = cn;
      }
    }
  }

  void prune() {
    // zero out reprojection noise, then drop a trailing tail of total
    // weight below 1e-13
    for (std::size_t k = 0; k < ca_.size(); ++k) {
      if (std::abs(ca_[k]) < 1e-15) ca_[k] = 0.0;
      if (std::abs(sa_[k]) < 1e-15) sa_[k] = 0.0;
    }
    double tail = 0.0;
    std::size_t keep = ca_.size();
    for (std::size_t k = ca_.size(); k-- > 0;) {
      tail += std::abs(ca_[k]) + std::abs(sa_[k]);
      if (tail > 1e-13) break;
      keep = k;
    }
    ca_.resize(keep);
    sa_.resize(keep);
  }

  void validate_monotone() const {
    double m = min_derivative_on_grid();
    if (!(m > 0.0))
      throw monotonicity_error("lift derivative is not positive on the grid (min " +
                               std::to_string(m) + "); increase grid or reduce amplitudes");
  }
};

inline double CircleDiffeo::min_derivative_on_grid() const {
  // coefficient-rich maps go through one inverse FFT instead of a
  // term-by-term sweep
  if (term_count() > 256) {
    const int g = grid_;
    std::vector<cplx> pd(std::size_t(g), cplx(0.0, 0.0));
    for (std::size_t i = 0; i < ca_.size(); ++i) {
      long k = long(i) + 1;
      if (2 * k >= g) break;
      cplx c(0.5 * ca_[i], -0.5 * sa_[i]);
      cplx cd = c * cplx(0.0, kTwoPi * double(k));
      pd[std::size_t(k)] += cd;
      pd[std::size_t(g - k)] += std::conj(cd);
    }
    fft_inplace(pd, true);
    double m = 1.0 + pd[0].real() * g;
    for (int j = 1; j < g; ++j) m = std::min(m, 1.0 + pd[std::size_t(j)].real() * g);
    return m;
  }
  double m = deriv(0.0);
  for (int j = 1; j < grid_; ++j) m = std::min(m, deriv(double(j) / grid_));
  return m;
}

// Lift values and derivatives on a refine-times-finer grid in one pass of
// zero-padded inverse FFTs (O(R G log RG) instead of R G * term_count).
struct DenseLiftSamples {
  int grid;                    // refined grid size
  std::vector<double> value;   // lift at x_j = j/grid
  std::vector<double> deriv;   // lift derivative at x_j
};

inline DenseLiftSamples dense_lift_samples(const CircleDiffeo& f, int refine = 4) {
  const int gr = f.grid() * refine;
  std::vector<cplx> pv(std::size_t(gr), cplx(0.0, 0.0));
  std::vector<cplx> pd(std::size_t(gr), cplx(0.0, 0.0));
  const auto& ca = f.cos_amplitudes();
  const auto& sa = f.sin_amplitudes();
  for (std::size_t i = 0; i < ca.size(); ++i) {
    long k = long(i) + 1;
    // a cos + b sin = c e^{2 pi i k x} + conj at coefficient c = (a - i b)/2
    cplx c(0.5 * ca[i], -0.5 * sa[i]);
    pv[std::size_t(k)] += c;
    pv[std::size_t(gr - k)] += std::conj(c);
    cplx cd = c * cplx(0.0, kTwoPi * double(k));
    pd[std::size_t(k)] += cd;
    pd[std::size_t(gr - k)] += std::conj(cd);
  }
  fft_inplace(pv, true);
  fft_inplace(pd, true);
  DenseLiftSamples out;
  out.grid = gr;
  out.value.resize(std::size_t(gr));
  out.deriv.resize(std::size_t(gr));
  for (int j = 0; j < gr; ++j) {
    double x = double(j) / gr;
    out.value[std::size_t(j)] = x + f.translation() + pv[std::size_t(j)].real() * gr;
    out.deriv[std::size_t(j)] = 1.0 + pd[std::size_t(j)].real() * gr;
  }
  return out;
}

// ---------------------------------------------------------------------------
// composition / inversion / iteration

inline CircleDiffeo compose(const CircleDiffeo& f, const CircleDiffeo& g) {
  int gout = std::min(f.grid(), g.grid());
  std::vector<double> s(std::size_t(gout), 0.0);
  for (int j = 0; j < gout; ++j) {
    double x = double(j) / gout;
    s[std::size_t(j)] = f.value(g.value(x)) - x;
  }
  CircleDiffeo out = CircleDiffeo::from_periodic_samples(s, false);
  // reprojection must reproduce the pointwise composite on the grid
  double m = out.min_derivative_on_grid();
  if (!(m > 0.0))
    throw monotonicity_error(
        "composite lost monotonicity after reprojection (min D = " +
        std::to_string(m) + "); grid too coarse for these maps");
  return out;
}

inline CircleDiffeo inverse(const CircleDiffeo& f) {
  int g = f.grid();
  std::vector<double> s(std::size_t(g), 0.0);
  for (int j = 0; j < g; ++j) {
    double y = double(j) / g;
    s[std::size_t(j)] = f.invert_point(y) - y;
  }
  CircleDiffeo inv = CircleDiffeo::from_periodic_samples(s, false);
  // round-trip certificate; lifts are canonicalized so compare mod 1
  double worst = 0.0;
  for (int j = 0; j < g; ++j) {
    double y = double(j) / g;
    double d = f.value(inv.value(y)) - y;
    worst = std::max(worst, std::abs(d - std::round(d)));
  }
  if (worst > 1e-12)
    throw monotonicity_error("inverse round trip exceeded 1e-12: " +
                             std::to_string(worst));
  return inv;
}

inline constexpr long kIterateCap = 1L << 14;

inline CircleDiffeo iterate(const CircleDiffeo& f, long n) {
  if (std::labs(n) > kIterateCap)
    throw overflow_guard_error("iterate: |n| exceeds cap 2^14");
  if (n == 0) return CircleDiffeo::identity(f.grid());
  CircleDiffeo base = (n > 0) ? f : inverse(f);
  unsigned long k = (unsigned long)std::labs(n);
  std::optional<CircleDiffeo> acc;
  CircleDiffeo pw = base;
  while (k > 0) {
    if (k & 1UL) acc = acc ? compose(*acc, pw) : pw;
    k >>= 1;
    if (k > 0) pw = compose(pw, pw);
  }
  return *acc;
}

// d1(f,g) = ||Df - Dg||_inf  v  ||Df^-1 - Dg^-1||_inf  (grid sup)
inline double d1_distance(const CircleDiffeo& f, const CircleDiffeo& g) {
  int gr = std::min(f.grid(), g.grid());
  CircleDiffeo fi = inverse(f), gi = inverse(g);
  double m1 = 0.0, m2 = 0.0;
  for (int j = 0; j < gr; ++j) {
    double x = double(j) / gr;
    m1 = std::max(m1, std::abs(f.deriv(x) - g.deriv(x)));
    m2 = std::max(m2, std::abs(fi.deriv(x) - gi.deriv(x)));
  }
  return std::max(m1, m2);
}

// ---------------------------------------------------------------------------
// rotation number

struct RotationEstimate {
  double value;
  double error_estimate;
};

inline RotationEstimate rotation_number(const CircleDiffeo& f, long iterations = 4096) {
  if (iterations < 100) throw std::invalid_argument("rotation_number: iterations >= 100");
  double x = 0.0;
  for (long i = 0; i < iterations; ++i) x = f.value(x);
  return {frac(x / double(iterations)), 1.0 / double(iterations)};
}

// ---------------------------------------------------------------------------
// growth sequences

struct GrowthTable {
  std::vector<double> values;  // values[n-1] = Gamma_n
  long nmax{0};
  double gamma(long n) const {  // Gamma_n with the Gamma_0 = 1 convention
    if (n == 0) return 1.0;
    return values.at(std::size_t(n - 1));
  }
};

// Chain-rule orbit products: Gamma_n = sup|Df^n| v sup|Df^-n|, sup over a
// grid of starting points with local refinement of the final argmax.
inline GrowthTable growth_sequence(const CircleDiffeo& f, long nmax,
                                   bool refine = true) {
  if (nmax < 1) throw std::invalid_argument("growth_sequence: nmax >= 1");
  const int g = f.grid();
  const auto gu = std::size_t(g);
  std::vector<double> xs(gu), prod(gu, 1.0), xsb(gu), prodb(gu, 1.0);
  for (int j = 0; j < g; ++j) xs[std::size_t(j)] = xsb[std::size_t(j)] = double(j) / g;
  std::vector<double> fwd(std::size_t(nmax), 0.0), bwd(std::size_t(nmax), 0.0);
  std::vector<int> arg_f(std::size_t(nmax), 0), arg_b(std::size_t(nmax), 0);
  for (long n = 1; n <= nmax; ++n) {
    double mf = 0.0, mb = 0.0;
    int af = 0, ab = 0;
    double last_x = std::numeric_limits<double>::quiet_NaN(), last_y = 0.0;
    for (int j = 0; j < g; ++j) {
      auto ju = std::size_t(j);
      auto [vj, dj] = f.value_and_deriv(xs[ju]);
      prod[ju] *= dj;
      xs[ju] = vj;
      double ap = std::abs(prod[ju]);
      if (ap > mf) {
        mf = ap;
        af = j;
      }
      // backward orbit step by pointwise inversion, warm-started along j
      double y = xsb[ju];
      double hint = std::isfinite(last_x) ? last_x + (y - last_y) : y - f.translation();
      double x = f.invert_point(y, 1e-13, hint);
      last_x = x;
      last_y = y;
      prodb[ju] /= f.deriv(x);
      xsb[ju] = x;
      double bp = std::abs(prodb[ju]);
      if (bp > mb) {
        mb = bp;
        ab = j;
      }
      if (ap > 1e300 || bp > 1e300)
        throw overflow_guard_error("growth_sequence: derivative product beyond 1e300");
    }
    fwd[std::size_t(n - 1)] = mf;
    bwd[std::size_t(n - 1)] = mb;
    arg_f[std::size_t(n - 1)] = af;
    arg_b[std::size_t(n - 1)] = ab;
  }
  GrowthTable t;
  t.nmax = nmax;
  t.values.resize(std::size_t(nmax));
  auto dfn_at = [&](long n, double x0) {
    double p = 1.0, x = x0;
    for (long i = 0; i < n; ++i) {
      p *= f.deriv(x);
      x = f.value(x);
    }
    return std::abs(p);
  };
  auto dbn_at = [&](long n, double y0) {
    double p = 1.0, y = y0;
    for (long i = 0; i < n; ++i) {
      double x = f.invert_point(y, 1e-13, y - f.translation());
      p /= f.deriv(x);
      y = x;
    }
    return std::abs(p);
  };
  for (long n = 1; n <= nmax; ++n) {
    double mf = fwd[std::size_t(n - 1)], mb = bwd[std::size_t(n - 1)];
    if (refine) {
      mf = std::max(mf, refine_max([&](double x) { return dfn_at(n, x); },
                                   double(arg_f[std::size_t(n - 1)]) / g, 1.5 / g));
      mb = std::max(mb, refine_max([&](double y) { return dbn_at(n, y); },
                                   double(arg_b[std::size_t(n - 1)]) / g, 1.5 / g));
    }
    t.values[std::size_t(n - 1)] = std::max(mf, mb);
  }
  return t;
}

// ---------------------------------------------------------------------------
// Radon-Nikodym data: in angle coordinates, the density of Lebesgue measure
// pushed through f^n against Lebesgue is the derivative of the lift of f^{-n};
// equivalently the reciprocal of Df^n along the pulled-back orbit.

inline std::vector<double> rn_derivative(const CircleDiffeo& f, long n, int grid = 0) {
  const int g = grid > 0 ? grid : f.grid();
  std::vector<double> out(std::size_t(g), 1.0);
  if (n == 0) return out;
  const long steps = std::labs(n);
  for (int j = 0; j < g; ++j) {
    double p = 1.0;
    if (n < 0) {
      // density of m  f^{-n} = m  f^{|n|}: derivative of lift of f^{|n|}
      double x = double(j) / g;
      for (long i = 0; i < steps; ++i) {
        p *= f.deriv(x);
        x = f.value(x);
      }
    } else {
      // derivative of the lift of f^{-n} via inverse orbit
      double y = double(j) / g;
      for (long i = 0; i < steps; ++i) {
        double x = f.invert_point(y, 1e-13, y - f.translation());
        p /= f.deriv(x);
        y = x;
      }
    }
    out[std::size_t(j)] = p;
  }
  return out;
}

// square root of h R_alpha h^{-1} through the same conjugation
inline CircleDiffeo square_root_conjugated(const CircleDiffeo& h, double alpha) {
  CircleDiffeo r = CircleDiffeo::rotation(frac(alpha / 2.0), h.grid());
  return compose(compose(h, r), inverse(h));
}

// ---------------------------------------------------------------------------
// ratio-set style diagnostic: cocycle values at orbit near-returns.
// Report-only; no classification claim is made.

struct CocycleSamples {
  std::vector<long> times;
  std::vector<double> values;  // Df^n at the base point when orbit returns
  bool empty_warning{false};
};

inline CocycleSamples cocycle_samples(const CircleDiffeo& f, long orbit_length,
                                      double return_radius, double x0 = 0.0) {
  if (orbit_length < 1000)
    throw std::invalid_argument("cocycle_samples: orbit_length >= 1000");
  if (!(return_radius > 0.0 && return_radius < 0.1))
    throw std::invalid_argument("cocycle_samples: return_radius in (0, 0.1)");
  CocycleSamples out;
  double x = x0, p = 1.0;
  for (long nstep = 1; nstep <= orbit_length; ++nstep) {
    p *= f.deriv(x);
    x = frac(f.value(x));
    if (circle_dist(x, x0) < return_radius) {
      out.times.push_back(nstep);
      out.values.push_back(p);
    }
    if (std::abs(p) > 1e300)
      throw overflow_guard_error("cocycle_samples: product beyond 1e300");
  }
  out.empty_warning = out.values.empty();
  return out;
}

}  // namespace nct
