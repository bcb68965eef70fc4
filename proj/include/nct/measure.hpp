/*
 * measure.hpp — probability measures on the circle and the states they
 * induce on the twisted convolution algebra.
 *
 * A CircleMeasure is either normalized Lebesgue measure or the pushforward
 * of Lebesgue under a diffeomorphism g (mu(E) = m(g^{-1}E)), so that
 *
 *     mu_hat(m) = integral e^{2 pi i m g(x)} dx,
 *
 * evaluated by the rectangle rule on the grid (spectrally accurate for the
 * smooth maps used here).  The induced state is
 *
 *     omega_mu(f) = sum_m mu_hat(m) f(m, 0),
 *
 * and omega_mu(f* f) has the equivalent integral form
 *
 *     sum_n integral |fcheck^(n)(g(x) + n alpha)|^2 dx,
 *
 * which the test suite uses as the central cross-check of the module.
 */

#pragma once

#include <Eigen/Dense>

#include <map>
#include <optional>
#include <vector>

#include "nct/circle.hpp"
#include "nct/weyl.hpp"

namespace nct {

class CircleMeasure {
 public:
  // Two equivalent quadrature routes for integral u dmu with mu = g_* m:
  //   Samples: mean of u(g(x_j))           (integrate in the source variable)
  //   Density: mean of u(x_j) / Dg(g^-1 x_j)  (integrate in the target variable)
  // The density route stays accurate when g compresses mass below the grid
  // scale, since the density 1/Dg(g^-1 theta) is bounded by 1/min Dg.
  enum class Route { Samples, Density };

  // Lebesgue
  CircleMeasure() : lebesgue_(true), grid_(1 << 12) {}

  explicit CircleMeasure(CircleDiffeo g, Route route = Route::Samples)
      : lebesgue_(false), map_(std::move(g)), route_(route) {
    grid_ = map_.grid();
  }

  static CircleMeasure lebesgue() { return CircleMeasure(); }
  static CircleMeasure pushforward(CircleDiffeo g, Route route = Route::Samples) {
    return CircleMeasure(std::move(g), route);
  }

  bool is_lebesgue() const { return lebesgue_; }
  int grid() const { return grid_; }
  const CircleDiffeo& map() const { return map_; }

  // pushforward samples g(x_j), evaluated once
  const std::vector<double>& samples() const {
    if (gx_.empty()) {
      gx_.resize(std::size_t(grid_));
      for (int j = 0; j < grid_; ++j) {
        double x = double(j) / grid_;
        gx_[std::size_t(j)] = lebesgue_ ? x : frac(map_.value(x));
      }
    }
    return gx_;
  }

  // Density of mu against Lebesgue at the grid points (target variable),
  // rho(theta_j) = 1/Dg(g^-1 theta_j).  g^-1 is located by a monotone
  // march over refined FFT samples of the lift, then polished by cubic
  // Hermite interpolation within the bracketing cell.
  const std::vector<double>& density() const {
    if (rho_.empty()) {
      rho_.resize(std::size_t(grid_), 1.0);
      if (!lebesgue_) {
        auto dls = dense_lift_samples(map_, 4);
        const int gr = dls.grid;
        const double h = 1.0 / gr;
        double c0 = dls.value[0];  // g(0)
        auto solve_cell = [&](int i, double target) {
          // Hermite cubic on [x_i, x_{i+1}] matching value/deriv samples
          double v0 = dls.value[std::size_t(i)],
                 v1 = (i + 1 < gr) ? dls.value[std::size_t(i + 1)]
                                   : dls.value[0] + 1.0;
          double d0 = dls.deriv[std::size_t(i)],
                 d1 = dls.deriv[std::size_t((i + 1) % gr)];
          double t = (target - v0) / std::max(v1 - v0, 1e-300);
          auto cubic_slope = [&](double tt) {
            double dh00 = 6 * tt * (tt - 1), dh10 = (1 - tt) * (1 - 3 * tt);
            double dh01 = -dh00, dh11 = tt * (3 * tt - 2);
            return dh00 * v0 + dh10 * h * d0 + dh01 * v1 + dh11 * h * d1;
          };
          for (int it = 0; it < 8; ++it) {
            double h00 = (1 + 2 * t) * (1 - t) * (1 - t);
            double h10 = t * (1 - t) * (1 - t);
            double h01 = t * t * (3 - 2 * t);
            double h11 = t * t * (t - 1);
            double val = h00 * v0 + h10 * h * d0 + h01 * v1 + h11 * h * d1;
            double der = cubic_slope(t);
            if (std::abs(der) < 1e-300) break;
            double step = (val - target) / der;
            t -= step;
            t = std::clamp(t, 0.0, 1.0);
            if (std::abs(step) < 1e-14) break;
          }
          // Dg at the solution from the same cubic, consistent to O(h^3)
          return cubic_slope(t) / h;
        };
        int i = 0;
        for (int j = 0; j < grid_; ++j) {
          double theta = double(j) / grid_;
          // lift target in [c0, c0 + 1)
          double target = theta + std::ceil(c0 - theta);
          if (target < c0) target += 1.0;
          if (target >= c0 + 1.0) target -= 1.0;
          // monotone march (restart when the target wraps backwards)
          if (j == 0 || target < dls.value[std::size_t(i)]) i = 0;
          while (i + 1 < gr && dls.value[std::size_t(i + 1)] < target) ++i;
          rho_[std::size_t(j)] = 1.0 / solve_cell(i, target);
        }
      }
    }
    return rho_;
  }

  // characteristic sequence mu_hat(m) = integral z^m dmu
  cplx chi(long m) const {
    if (lebesgue_) return m == 0 ? cplx(1.0, 0.0) : cplx(0.0, 0.0);
    if (m == 0) return cplx(1.0, 0.0);
    if (auto it = cache_.find(m); it != cache_.end()) return it->second;
    cplx acc(0.0, 0.0);
    if (route_ == Route::Samples) {
      const auto& gx = samples();
      for (int j = 0; j < grid_; ++j) acc += unit_phase(double(m) * gx[std::size_t(j)]);
    } else {
      const auto& rho = density();
      for (int j = 0; j < grid_; ++j)
        acc += rho[std::size_t(j)] * unit_phase(double(m) * double(j) / grid_);
    }
    acc /= double(grid_);
    cache_[m] = acc;
    cache_[-m] = std::conj(acc);
    return acc;
  }

  // integral of a sampled observable against mu
  template <class F>
  cplx integrate(F&& u) const {
    cplx acc(0.0, 0.0);
    if (route_ == Route::Samples || lebesgue_) {
      const auto& gx = samples();
      for (int j = 0; j < grid_; ++j) acc += u(gx[std::size_t(j)]);
    } else {
      const auto& rho = density();
      for (int j = 0; j < grid_; ++j)
        acc += rho[std::size_t(j)] * u(double(j) / grid_);
    }
    return acc / double(grid_);
  }

  // mu-mass of the arc (center - halfwidth, center + halfwidth) via the
  // monotone lift: mu(A) = |g^{-1}(A)|
  double arc_mass(double center, double halfwidth) const {
    if (halfwidth <= 0.0) return 0.0;
    if (halfwidth >= 0.5) return 1.0;
    if (lebesgue_) return 2.0 * halfwidth;
    double lo = center - halfwidth, hi = center + halfwidth;
    return frac(map_.invert_point(hi) - map_.invert_point(lo));
  }

 private:
  bool lebesgue_;
  CircleDiffeo map_;
  int grid_;
  Route route_{Route::Samples};
  mutable std::map<long, cplx> cache_;
  mutable std::vector<double> gx_;
  mutable std::vector<double> rho_;
};

// omega_mu(W(f)) = sum_m mu_hat(m) f(m, 0)
inline cplx state_omega_mu(const WeylElement& f, const CircleMeasure& mu) {
  cplx acc(0.0, 0.0);
  for (const auto& [k, v] : f.terms())
    if (k.second == 0) acc += mu.chi(k.first) * v;
  return acc;
}

// the integral form of omega_mu(f* f): sum_n int |fcheck^(n)(g(x)+n alpha)|^2 dx
inline double omega_mu_integral_form(const WeylElement& f, const CircleMeasure& mu) {
  double alpha = rational_to_double(f.alpha());
  double acc = 0.0;
  const int g = mu.grid();
  const auto& gx = mu.samples();
  for (long n : f.slice_indices()) {
    for (int j = 0; j < g; ++j) {
      cplx val = f.slice_eval(n, frac(gx[std::size_t(j)] + double(n) * alpha));
      acc += std::norm(val);
    }
  }
  return acc / double(g);
}

// Gram matrix G_ij = omega_mu(f_i* f_j); returns the minimum eigenvalue
struct GramReport {
  Eigen::MatrixXcd gram;
  double min_eigenvalue{0.0};
  double hermiticity_defect{0.0};
};

inline GramReport gram_positivity_check(const std::vector<WeylElement>& basis,
                                        const CircleMeasure& mu) {
  const auto n = long(basis.size());
  GramReport rep;
  rep.gram.resize(n, n);
  for (long i = 0; i < n; ++i)
    for (long j = 0; j < n; ++j)
      rep.gram(i, j) =
          state_omega_mu(twisted_convolution(star(basis[std::size_t(i)]),
                                             basis[std::size_t(j)]),
                         mu);
  rep.hermiticity_defect = (rep.gram - rep.gram.adjoint()).norm();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(
      0.5 * (rep.gram + rep.gram.adjoint()));
  rep.min_eigenvalue = es.eigenvalues().minCoeff();
  return rep;
}

// Faithfulness probe.  A diffeomorphism pushforward has full topological
// support, so "gap" means effective support: build a Fourier-truncated bump
// on the arc and return it as a witness exactly when omega(g* g) comes out
// below the 1e-6 truncation-scale threshold.
struct FaithfulnessWitness {
  WeylElement witness;
  double omega_value{0.0};
  double arc_mass{0.0};
};

inline std::optional<FaithfulnessWitness> faithfulness_probe(
    const CircleMeasure& mu, const Rational& alpha, double arc_center,
    double arc_halfwidth, long mode_cap = 4096) {
  if (arc_halfwidth <= 0.0) return std::nullopt;
  // Gaussian-tailed bump exp(s(cos 2 pi (x-c) - 1)) scaled so the value at
  // the arc edge is e^-2; its spectrum dies like exp(-k^2/2s), so the
  // truncation leaks nothing onto the bulk of the measure.
  double s = 4.0 / std::pow(kTwoPi * arc_halfwidth, 2);
  long modes = std::min(mode_cap, long(std::ceil(std::sqrt(80.0 * s))));
  const int g = std::max(mu.grid(), 1 << 12);
  if (2 * modes >= g / 2) return std::nullopt;  // bump unresolvable here
  std::vector<cplx> samples(std::size_t(g), cplx(0.0, 0.0));
  for (int j = 0; j < g; ++j) {
    double x = double(j) / g;
    samples[std::size_t(j)] =
        std::exp(s * (std::cos(kTwoPi * (x - arc_center)) - 1.0));
  }
  auto coeffs = fourier_coeffs(samples);
  FaithfulnessWitness out;
  out.arc_mass = mu.arc_mass(arc_center, arc_halfwidth);
  out.witness = WeylElement(alpha);
  for (long m = -modes; m <= modes; ++m)
    out.witness.set(m, 0, fft_coeff(coeffs, m));
  cplx v = state_omega_mu(twisted_convolution(star(out.witness), out.witness), mu);
  out.omega_value = v.real();
  if (out.omega_value >= 1e-6) return std::nullopt;
  return out;
}

// Diffeomorphism whose lift derivative is floor + (1 - floor) * normalized
// von Mises kernel exp(s(cos 2 pi x - 1)) centered at 1/2.  Its pushforward
// of Lebesgue measure piles up near angle 0 and leaves mass ~ 1/sqrt(s) per
// unit arc near angle 1/2.  s must be small enough that the kernel spectrum
// (Gaussian of width ~sqrt(s)) dies before the grid Nyquist frequency.
inline CircleDiffeo concentrating_diffeo(double s, double floor_frac, int grid) {
  if (!(floor_frac > 0.0 && floor_frac < 1.0))
    throw std::invalid_argument("concentrating_diffeo: floor in (0,1)");
  double spectral_width = std::sqrt(s);
  if (8.5 * spectral_width > double(grid) / 2)
    throw std::invalid_argument("concentrating_diffeo: kernel too sharp for grid");
  std::vector<double> kern(std::size_t(grid), 0.0);
  double mean = 0.0;
  for (int j = 0; j < grid; ++j) {
    double x = double(j) / grid - 0.5;
    kern[std::size_t(j)] = std::exp(s * (std::cos(kTwoPi * x) - 1.0));
    mean += kern[std::size_t(j)];
  }
  mean /= double(grid);
  // derivative samples, then spectral integration to the lift
  std::vector<cplx> dsamp(std::size_t(grid), cplx(0.0, 0.0));
  for (int j = 0; j < grid; ++j)
    dsamp[std::size_t(j)] =
        floor_frac + (1.0 - floor_frac) * kern[std::size_t(j)] / mean - 1.0;
  auto dcoef = fourier_coeffs(dsamp);
  long kcut = std::min<long>(grid / 2 - 1, long(std::ceil(9.0 * spectral_width)));
  std::vector<double> ca(std::size_t(kcut), 0.0), sa(std::size_t(kcut), 0.0);
  double p_at_0 = 0.0;
  for (long k = 1; k <= kcut; ++k) {
    cplx ck = fft_coeff(dcoef, k) / cplx(0.0, kTwoPi * double(k));
    ca[std::size_t(k - 1)] = 2.0 * ck.real();
    sa[std::size_t(k - 1)] = -2.0 * ck.imag();
    p_at_0 += ca[std::size_t(k - 1)];
  }
  // translation chosen so the lift fixes 0: concentration lands at angle 0
  return CircleDiffeo(-p_at_0, std::move(ca), std::move(sa), grid);
}

// transverse-circle state: omega(W(f)) = sum_m e^{2 pi i alpha m^2} nu_hat(m) f(m, -m)
inline cplx state_transverse(const WeylElement& f,
                             const std::map<long, cplx>& nu_hat) {
  cplx acc(0.0, 0.0);
  for (const auto& [k, v] : f.terms()) {
    if (k.first + k.second != 0) continue;
    auto it = nu_hat.find(k.first);
    if (it == nu_hat.end()) continue;
    acc += alpha_phase(f.alpha(), k.first * k.first) * it->second * v;
  }
  return acc;
}

// Gram of the transverse state over a basis (positivity probe)
inline double transverse_gram_min_eig(const std::vector<WeylElement>& basis,
                                      const std::map<long, cplx>& nu_hat) {
  const auto n = long(basis.size());
  Eigen::MatrixXcd G(n, n);
  for (long i = 0; i < n; ++i)
    for (long j = 0; j < n; ++j)
      G(i, j) = state_transverse(
          twisted_convolution(star(basis[std::size_t(i)]), basis[std::size_t(j)]),
          nu_hat);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (G + G.adjoint()));
  return es.eigenvalues().minCoeff();
}

}  // namespace nct
