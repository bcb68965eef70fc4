/*
 * modular.hpp — the block representation on l^2(Z; L^2(T, m)) and its
 * modular structure, at finite truncation.
 *
 * Everything lives in the Lebesgue picture: blocks act on Fourier
 * truncations of L^2(T, m), and the defining data is a circle
 * diffeomorphism T (with rational rotation number alpha here) together
 * with the conjugator h, T = h R_alpha h^{-1}.  The operator data:
 *
 *   (pi(W(f)) g)_n = M_{fcheck^(l) o h^-1 o T^{2n-l}} g_{n-l}   (band l)
 *   (lambda g)_n   = g_{n-1}
 *   (Delta x)_n    = delta_n x_n,   delta_n = D(T^{2n}) in angle form
 *   (J x)_n(z)     = delta_n(z)^{1/2} conj(x_{-n}(T^{2n} z))
 *
 * delta_n is computed by chain-rule products along grid orbits of T (never
 * from reprojected iterates); ModularData caches those orbit tables up to
 * a configured depth.
 */

#pragma once

#include <optional>
#include <vector>

#include "nct/blockop.hpp"
#include "nct/circle.hpp"
#include "nct/weyl.hpp"

namespace nct {

class ModularData {
 public:
  ModularData(CircleDiffeo T, CircleDiffeo h, Rational alpha, int depth)
      : T_(std::move(T)), h_(std::move(h)), alpha_(std::move(alpha)), depth_(depth) {
    grid_ = T_.grid();
    build_tables();
  }

  static ModularData from_rotation(const Rational& alpha, int depth,
                                   int grid = 1 << 12) {
    CircleDiffeo T = CircleDiffeo::rotation(rational_to_double(alpha), grid);
    return ModularData(T, CircleDiffeo::identity(grid), alpha, depth);
  }

  const CircleDiffeo& T() const { return T_; }
  const CircleDiffeo& conjugator() const { return h_; }
  const Rational& alpha() const { return alpha_; }
  int grid() const { return grid_; }
  int depth() const { return depth_; }

  // lift position and derivative of T^k at grid point j, |k| <= depth
  double pos(int k, int j) const { return pos_[idx(k)][std::size_t(j)]; }
  double der(int k, int j) const { return der_[idx(k)][std::size_t(j)]; }

  // delta_n = D(T^{2n}) sampled on the grid (the modular density)
  std::vector<double> delta_samples(int n) const {
    require_depth(2 * std::abs(n));
    return der_[idx(2 * n)];
  }

  // refined extrema of delta_n
  std::pair<double, double> delta_range(int n) const {
    require_depth(2 * std::abs(n));
    const auto& d = der_[idx(2 * n)];
    int amin = 0, amax = 0;
    for (int j = 1; j < grid_; ++j) {
      if (d[std::size_t(j)] < d[std::size_t(amin)]) amin = j;
      if (d[std::size_t(j)] > d[std::size_t(amax)]) amax = j;
    }
    auto dTn_at = [&](int k, double x) {
      double p = 1.0, y = x;
      int steps = std::abs(k);
      for (int i = 0; i < steps; ++i) {
        if (k > 0) {
          p *= T_.deriv(y);
          y = T_.value(y);
        } else {
          double xx = T_.invert_point(y, 1e-13, y - T_.translation());
          p /= T_.deriv(xx);
          y = xx;
        }
      }
      return p;
    };
    double lo = -refine_max([&](double x) { return -dTn_at(2 * n, x); },
                            double(amin) / grid_, 1.5 / grid_);
    double hi = refine_max([&](double x) { return dTn_at(2 * n, x); },
                           double(amax) / grid_, 1.5 / grid_);
    return {lo, hi};
  }

  // h^{-1} at an arbitrary point (monotone Newton, optional warm start)
  double hinv(double y, double hint = std::numeric_limits<double>::quiet_NaN()) const {
    return h_.invert_point(y, 1e-13, hint);
  }

  bool h_is_identity() const { return h_.is_rotation(0.0) && h_.translation() == 0.0; }

 private:
  CircleDiffeo T_, h_;
  Rational alpha_;
  int grid_, depth_;
  std::vector<std::vector<double>> pos_, der_;  // index k + depth

  std::size_t idx(int k) const { return std::size_t(k + depth_); }

  void require_depth(int k) const {
    if (k > depth_)
      throw std::out_of_range("ModularData: requested power " + std::to_string(k) +
                              " beyond cached depth " + std::to_string(depth_));
  }

  void build_tables() {
    const auto gu = std::size_t(grid_);
    pos_.assign(std::size_t(2 * depth_ + 1), std::vector<double>(gu, 0.0));
    der_.assign(std::size_t(2 * depth_ + 1), std::vector<double>(gu, 1.0));
    for (int j = 0; j < grid_; ++j) pos_[idx(0)][std::size_t(j)] = double(j) / grid_;
    for (int k = 1; k <= depth_; ++k) {
      const auto& pp = pos_[idx(k - 1)];
      const auto& pd = der_[idx(k - 1)];
      auto& cp = pos_[idx(k)];
      auto& cd = der_[idx(k)];
      for (int j = 0; j < grid_; ++j) {
        auto ju = std::size_t(j);
        auto [v, d] = T_.value_and_deriv(pp[ju]);
        cp[ju] = frac(v);
        cd[ju] = pd[ju] * d;
        if (!(cd[ju] > 0.0))
          throw positivity_error("ModularData: nonpositive orbit derivative");
      }
    }
    for (int k = 1; k <= depth_; ++k) {
      const auto& pp = pos_[idx(-(k - 1))];
      const auto& pd = der_[idx(-(k - 1))];
      auto& cp = pos_[idx(-k)];
      auto& cd = der_[idx(-k)];
      double last_x = std::numeric_limits<double>::quiet_NaN(), last_y = 0.0;
      for (int j = 0; j < grid_; ++j) {
        auto ju = std::size_t(j);
        double y = pp[ju];
        double hint =
            std::isfinite(last_x) ? last_x + (y - last_y) : y - T_.translation();
        double x = T_.invert_point(y, 1e-13, hint);
        last_x = x;
        last_y = y;
        cp[ju] = frac(x);
        cd[ju] = pd[ju] / T_.deriv(x);
        if (!(cd[ju] > 0.0))
          throw positivity_error("ModularData: nonpositive orbit derivative");
      }
    }
  }
};

// ---------------------------------------------------------------------------
// representation blocks

struct RepresentOptions {
  bool warn_on_leak = true;
};

struct Represented {
  BlockOperator op;
  bool truncation_leak{false};  // some band fell outside [-2N, 2N]
};

// samples of fcheck^(l) o h^-1 o T^k on the grid
inline std::vector<cplx> composed_slice_samples(const WeylElement& f, long l, int k,
                                                const ModularData& md) {
  const int g = md.grid();
  std::vector<cplx> s(std::size_t(g), cplx(0.0, 0.0));
  if (md.h_is_identity()) {
    for (int j = 0; j < g; ++j)
      s[std::size_t(j)] = f.slice_eval(l, md.pos(k, j));
  } else {
    double last = std::numeric_limits<double>::quiet_NaN(), last_y = 0.0;
    for (int j = 0; j < g; ++j) {
      double y = md.pos(k, j);
      double hint = std::isfinite(last) ? last + (y - last_y) : y;
      double u = md.hinv(y, hint);
      last = u;
      last_y = y;
      s[std::size_t(j)] = f.slice_eval(l, frac(u));
    }
  }
  return s;
}

inline Represented represent(const WeylElement& f, const ModularData& md,
                             const Truncation& tr) {
  if (f.alpha() != md.alpha())
    throw alpha_mismatch_error("represent: element alpha differs from the data alpha");
  Represented out;
  out.op = BlockOperator(tr.N, tr.M);
  for (long l : f.slice_indices()) {
    if (std::labs(l) > 2 * tr.N) {
      out.truncation_leak = true;
      continue;
    }
    int li = int(l);
    for (int n = out.op.row_lo(li); n <= out.op.row_hi(li); ++n) {
      auto s = composed_slice_samples(f, l, 2 * n - li, md);
      out.op.block(li, n) = toeplitz_compression(s, tr.M);
    }
  }
  return out;
}

// Multiplicativity residual ||pi(f * g) - pi(f) pi(g)|| measured over
// interior block rows and interior Fourier modes; the excluded edges lose
// product paths to the compression by construction.
inline double multiplicativity_residual(const WeylElement& f, const WeylElement& g,
                                        const ModularData& md, const Truncation& tr) {
  auto rf = represent(f, md, tr);
  auto rg = represent(g, md, tr);
  auto rfg = represent(twisted_convolution(f, g), md, tr);
  auto diff = rf.op.multiply(rg.op).subtract(rfg.op);
  long lmax = f.max_abs_n() + g.max_abs_n();
  int mcut = int(f.max_abs_m() + g.max_abs_m());
  if (2 * mcut >= 2 * tr.M)
    throw std::invalid_argument("multiplicativity_residual: M too small for supports");
  double worst = 0.0;
  for (int l : diff.band_indices()) {
    for (int n = diff.row_lo(l); n <= diff.row_hi(l); ++n) {
      if (std::abs(n) > tr.N - lmax || std::abs(n - l) > tr.N - lmax) continue;
      Matrix D = diff.block(l, n);
      int lo = mcut, hi = 2 * tr.M - mcut;
      worst = std::max(worst,
                       matrix_norm(D.block(lo, lo, hi - lo + 1, hi - lo + 1)));
    }
  }
  return worst;
}

// adjoint compatibility ||pi(f)* - pi(star f)||
inline double star_compatibility_residual(const WeylElement& f, const ModularData& md,
                                          const Truncation& tr) {
  auto rf = represent(f, md, tr);
  auto rs = represent(star(f), md, tr);
  auto diff = rf.op.adjoint().subtract(rs.op);
  double worst = 0.0;
  for (int l : diff.band_indices())
    for (int n = diff.row_lo(l); n <= diff.row_hi(l); ++n)
      worst = std::max(worst, matrix_norm(diff.block(l, n)));
  return worst;
}

// the k-step shift
inline BlockOperator shift_lambda(int k, const Truncation& tr) {
  if (std::abs(k) > 2 * tr.N)
    throw std::invalid_argument("shift_lambda: |k| <= 2N required");
  BlockOperator out(tr.N, tr.M);
  for (int n = out.row_lo(k); n <= out.row_hi(k); ++n)
    out.block(k, n) = Matrix::Identity(tr.dim(), tr.dim());
  return out;
}

// ---------------------------------------------------------------------------
// modular operator data per block

struct ModularDeltaReport {
  std::vector<double> delta;      // samples
  std::vector<double> delta_inv;
  double condition{1.0};          // sup delta * sup delta^{-1}
};

inline ModularDeltaReport modular_delta(const ModularData& md, int n,
                                        const Truncation& tr) {
  (void)tr;
  ModularDeltaReport rep;
  rep.delta = md.delta_samples(n);
  rep.delta_inv.resize(rep.delta.size());
  double mx = 0.0, mxi = 0.0;
  for (std::size_t j = 0; j < rep.delta.size(); ++j) {
    if (!(rep.delta[j] > 0.0))
      throw positivity_error("modular_delta: nonpositive density sample");
    rep.delta_inv[j] = 1.0 / rep.delta[j];
    mx = std::max(mx, rep.delta[j]);
    mxi = std::max(mxi, rep.delta_inv[j]);
  }
  rep.condition = mx * mxi;
  return rep;
}

// ---------------------------------------------------------------------------
// Tomita relation residual

// || J Delta^{1/2} pi(f) xi - pi(f*) xi || / || pi(f) xi ||, all three
// vectors taken in the truncated space.
inline double tomita_check(const WeylElement& f, const ModularData& md,
                           const Truncation& tr) {
  const int g = md.grid();
  // x = pi(f) xi, block n sampled then truncated to |m| <= M
  std::vector<std::vector<cplx>> xhat(std::size_t(2 * tr.N + 1));
  for (int n = -tr.N; n <= tr.N; ++n) {
    auto s = composed_slice_samples(f, n, n, md);
    auto c = fourier_coeffs(s);
    auto& row = xhat[std::size_t(n + tr.N)];
    row.assign(std::size_t(2 * tr.M + 1), cplx(0.0, 0.0));
    for (int m = -tr.M; m <= tr.M; ++m)
      row[std::size_t(m + tr.M)] = fft_coeff(c, m);
  }
  double x_norm2 = 0.0;
  for (const auto& row : xhat)
    for (const auto& v : row) x_norm2 += std::norm(v);
  if (x_norm2 == 0.0) return 0.0;

  auto eval_row = [&](int n, double x) {
    const auto& row = xhat[std::size_t(n + tr.N)];
    cplx acc(0.0, 0.0);
    for (int m = -tr.M; m <= tr.M; ++m)
      acc += row[std::size_t(m + tr.M)] * unit_phase(double(m) * x);
    return acc;
  };

  const WeylElement fs = star(f);
  double diff2 = 0.0;
  for (int n = -tr.N; n <= tr.N; ++n) {
    // (J Delta^{1/2} x)_n(z) = conj(x_{-n}(T^{2n} z)): the density factors
    // delta_n(z)^{1/2} and delta_{-n}(T^{2n} z)^{1/2} cancel along the
    // orbit by the chain rule
    std::vector<cplx> sx(std::size_t(g), cplx(0.0, 0.0));
    for (int j = 0; j < g; ++j)
      sx[std::size_t(j)] = std::conj(eval_row(-n, md.pos(2 * n, j)));
    auto cs = fourier_coeffs(sx);
    auto ts = composed_slice_samples(fs, n, n, md);
    auto ct = fourier_coeffs(ts);
    for (int m = -tr.M; m <= tr.M; ++m)
      diff2 += std::norm(fft_coeff(cs, m) - fft_coeff(ct, m));
  }
  return std::sqrt(diff2 / x_norm2);
}

// the same residual with Delta and J expanded as separate grid operations
// (diagnostic; the density factors are applied and divided out explicitly)
inline double tomita_check_explicit(const WeylElement& f, const ModularData& md,
                                    const Truncation& tr) {
  const int g = md.grid();
  std::vector<std::vector<cplx>> xhat(std::size_t(2 * tr.N + 1));
  for (int n = -tr.N; n <= tr.N; ++n) {
    auto s = composed_slice_samples(f, n, n, md);
    auto c = fourier_coeffs(s);
    auto& row = xhat[std::size_t(n + tr.N)];
    row.assign(std::size_t(2 * tr.M + 1), cplx(0.0, 0.0));
    for (int m = -tr.M; m <= tr.M; ++m)
      row[std::size_t(m + tr.M)] = fft_coeff(c, m);
  }
  double x_norm2 = 0.0;
  for (const auto& row : xhat)
    for (const auto& v : row) x_norm2 += std::norm(v);
  if (x_norm2 == 0.0) return 0.0;
  auto eval_row = [&](int n, double x) {
    const auto& row = xhat[std::size_t(n + tr.N)];
    cplx acc(0.0, 0.0);
    for (int m = -tr.M; m <= tr.M; ++m)
      acc += row[std::size_t(m + tr.M)] * unit_phase(double(m) * x);
    return acc;
  };
  const WeylElement fs = star(f);
  double diff2 = 0.0;
  for (int n = -tr.N; n <= tr.N; ++n) {
    std::vector<cplx> sx(std::size_t(g), cplx(0.0, 0.0));
    const auto dn = md.delta_samples(n);
    for (int j = 0; j < g; ++j) {
      // (Delta^{1/2} x)_{-n} evaluated at w = T^{2n}(x_j): the modular
      // density there is 1/delta_n(x_j) by the chain rule along the orbit
      double w = md.pos(2 * n, j);
      cplx y = std::sqrt(1.0 / dn[std::size_t(j)]) * eval_row(-n, w);
      sx[std::size_t(j)] = std::sqrt(dn[std::size_t(j)]) * std::conj(y);
    }
    auto cs = fourier_coeffs(sx);
    auto ts = composed_slice_samples(fs, n, n, md);
    auto ct = fourier_coeffs(ts);
    for (int m = -tr.M; m <= tr.M; ++m)
      diff2 += std::norm(fft_coeff(cs, m) - fft_coeff(ct, m));
  }
  return std::sqrt(diff2 / x_norm2);
}

// ---------------------------------------------------------------------------
// crossed-product identity: lambda pi(H) lambda* = pi(H o R^{-2})

// H given by Fourier coefficients indexed -deg..deg
inline double crossed_product_check(const std::vector<cplx>& Hcoef, long deg,
                                    const ModularData& md, const Truncation& tr) {
  if (deg > tr.M / 2)
    throw std::invalid_argument("crossed_product_check: H band limit above M/2");
  const int g = md.grid();
  double alpha = rational_to_double(md.alpha());
  auto line_samples = [&](int power, double shift) {
    std::vector<cplx> s(std::size_t(g), cplx(0.0, 0.0));
    double last = std::numeric_limits<double>::quiet_NaN(), last_y = 0.0;
    for (int j = 0; j < g; ++j) {
      double y = md.pos(power, j);
      double u;
      if (md.h_is_identity()) {
        u = y;
      } else {
        double hint = std::isfinite(last) ? last + (y - last_y) : y;
        u = md.hinv(y, hint);
        last = u;
        last_y = y;
      }
      double arg = frac(u + shift);
      cplx acc(0.0, 0.0);
      for (long m = -deg; m <= deg; ++m)
        acc += Hcoef[std::size_t(m + deg)] * unit_phase(double(m) * arg);
      s[std::size_t(j)] = acc;
    }
    return s;
  };
  double worst = 0.0;
  for (int n = -tr.N + 1; n <= tr.N; ++n) {
    Matrix lhs = toeplitz_compression(line_samples(2 * (n - 1), 0.0), tr.M);
    Matrix rhs = toeplitz_compression(line_samples(2 * n, -2.0 * alpha), tr.M);
    worst = std::max(worst, matrix_norm(lhs - rhs));
  }
  return worst;
}

// ---------------------------------------------------------------------------
// spectrum report for the modular operator

struct IntervalUnion {
  std::vector<std::pair<double, double>> intervals;  // merged, sorted
};

inline IntervalUnion delta_spectrum_report(const ModularData& md, const Truncation& tr) {
  std::vector<std::pair<double, double>> raw;
  for (int n = 0; n <= tr.N; ++n) {
    auto [lo, hi] = md.delta_range(n);
    raw.emplace_back(lo, hi);
    raw.emplace_back(1.0 / hi, 1.0 / lo);
  }
  std::sort(raw.begin(), raw.end());
  IntervalUnion out;
  for (auto& iv : raw) {
    if (!out.intervals.empty() && iv.first <= out.intervals.back().second + 1e-12)
      out.intervals.back().second = std::max(out.intervals.back().second, iv.second);
    else
      out.intervals.push_back(iv);
  }
  return out;
}

// ---------------------------------------------------------------------------
// GNS vector state and a cyclicity proxy

inline cplx gns_vector_state(const WeylElement& f, const ModularData& md) {
  auto s = composed_slice_samples(f, 0, 0, md);
  cplx acc(0.0, 0.0);
  for (const auto& v : s) acc += v;
  return acc / double(s.size());
}

// rank proxy: the span of pi(delta_{m,l}) xi over the index box must fill
// the truncated space; returns the smallest singular value over bands
inline double cyclicity_min_singular(const ModularData& md, const Truncation& tr) {
  double worst = 1e300;
  for (int l = -tr.N; l <= tr.N; ++l) {
    Matrix C(2 * tr.M + 1, 2 * tr.M + 1);
    // column m: Fourier truncation of z^m o h^-1 o T^l
    const int g = md.grid();
    for (int m = -tr.M; m <= tr.M; ++m) {
      std::vector<cplx> s(std::size_t(g), cplx(0.0, 0.0));
      double last = std::numeric_limits<double>::quiet_NaN(), last_y = 0.0;
      for (int j = 0; j < g; ++j) {
        double y = md.pos(l, j);
        double u;
        if (md.h_is_identity()) {
          u = y;
        } else {
          double hint = std::isfinite(last) ? last + (y - last_y) : y;
          u = md.hinv(y, hint);
          last = u;
          last_y = y;
        }
        s[std::size_t(j)] = unit_phase(double(m) * u);
      }
      auto c = fourier_coeffs(s);
      for (int k = -tr.M; k <= tr.M; ++k)
        C(k + tr.M, m + tr.M) = fft_coeff(c, k);
    }
    auto sv = C.jacobiSvd().singularValues();
    worst = std::min(worst, sv(sv.size() - 1));
  }
  return worst;
}

// J is an isometric involution on the truncated space: residuals of
// ||Jx|| = ||x|| and J^2 x = x for a supplied vector
struct JInvolutionReport {
  double isometry_defect{0.0};
  double involution_defect{0.0};
};

inline JInvolutionReport j_involution_check(const BlockVector& x, const ModularData& md,
                                            const Truncation& tr) {
  const int g = md.grid();
  auto eval = [&](const Vector& row, double t) {
    cplx acc(0.0, 0.0);
    for (int m = -tr.M; m <= tr.M; ++m)
      acc += row(m + tr.M) * unit_phase(double(m) * t);
    return acc;
  };
  // apply J on the grid: (Jx)_n(z) = delta_n(z)^{1/2} conj(x_{-n}(T^{2n} z))
  auto applyJ = [&](const std::vector<std::vector<cplx>>& rows) {
    std::vector<std::vector<cplx>> out(rows.size(),
                                       std::vector<cplx>(std::size_t(g), cplx(0.0, 0.0)));
    for (int n = -tr.N; n <= tr.N; ++n) {
      auto dn = md.delta_samples(n);
      const auto& src = rows[std::size_t(-n + tr.N)];
      auto& dst = out[std::size_t(n + tr.N)];
      // x_{-n} must be evaluated at T^{2n}(x_j); src holds grid samples, so
      // interpolate through its Fourier series
      auto c = fourier_coeffs(src);
      for (int j = 0; j < g; ++j) {
        double w = md.pos(2 * n, j);
        cplx acc(0.0, 0.0);
        for (int m = -tr.M; m <= tr.M; ++m)
          acc += fft_coeff(c, m) * unit_phase(double(m) * w);
        dst[std::size_t(j)] = std::sqrt(dn[std::size_t(j)]) * std::conj(acc);
      }
    }
    return out;
  };
  // initial samples from the coefficient vector
  std::vector<std::vector<cplx>> rows(std::size_t(2 * tr.N + 1),
                                      std::vector<cplx>(std::size_t(g), cplx(0.0, 0.0)));
  for (int n = -tr.N; n <= tr.N; ++n)
    for (int j = 0; j < g; ++j)
      rows[std::size_t(n + tr.N)][std::size_t(j)] =
          eval(x.at(n), double(j) / g);
  auto l2 = [&](const std::vector<std::vector<cplx>>& rs) {
    double s = 0.0;
    for (const auto& r : rs)
      for (const auto& v : r) s += std::norm(v);
    return std::sqrt(s / double(g));
  };
  auto jx = applyJ(rows);
  auto jjx = applyJ(jx);
  double nx = l2(rows), njx = l2(jx);
  JInvolutionReport rep;
  rep.isometry_defect = std::abs(njx - nx) / std::max(nx, 1e-300);
  double d2 = 0.0;
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      d2 += std::norm(jjx[i][j] - rows[i][j]);
  rep.involution_defect = std::sqrt(d2 / double(g)) / std::max(nx, 1e-300);
  return rep;
}

}  // namespace nct
