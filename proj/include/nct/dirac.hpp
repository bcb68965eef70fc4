/*
 * dirac.hpp — block Dirac operators, their modular deformations, inverses
 * and deformed commutators at finite truncation.
 *
 * Conventions.  On block n the one-dimensional part is
 *
 *     L_n = i z d/dz - a_n I,   L_n z^m = (i m - a_n) z^m,
 *
 * with a_n = n for the standard operator and
 *
 *     a_n = sign(n) sum_{l=1}^{|n|} 1 / Gamma_{l - (1 - sign n)/2}(T^2)
 *
 * for the modified one (Gamma_0 = 1), so that |a_{n-1} - a_n| *
 * Gamma_{|n|}(T^2) = 1 identically.  The block Dirac operator is
 * [[0, L_n], [L_n*, 0]] with spectrum {+-sqrt(m^2 + a_n^2)}; the deformed
 * version replaces L_n by M_{1/delta_n} L_n.  Deformed blocks factor as
 * e^{K_n} D_n e^{K_n} with K_n = diag(M_{-ln delta_n}, 0), and their
 * inverses are [[0, M_delta (L_n*)^{-1}], [L_n^{-1} M_delta, 0]] with the
 * kernel convention of a pseudo-inverse at m = 0 when a_n = 0.
 */

#pragma once

#include <optional>
#include <vector>

#include "nct/blockop.hpp"
#include "nct/circle.hpp"
#include "nct/modular.hpp"

namespace nct {

inline double a_coefficient(long n, const GrowthTable* gamma) {
  if (!gamma) return double(n);
  double s = 0.0;
  long an = std::labs(n);
  long off = (n >= 0) ? 0 : 1;
  for (long l = 1; l <= an; ++l) s += 1.0 / gamma->gamma(l - off);
  return (n >= 0) ? s : -s;
}

struct DiracBlock {
  int n{0};
  double a_n{0.0};
  bool deformed{false};
  Matrix upper;  // block mapping the second component into the first
  Matrix lower;  // independent assembly of the adjoint route

  Matrix full() const {
    const auto d = upper.rows();
    Matrix F = Matrix::Zero(2 * d, 2 * d);
    F.block(0, d, d, d) = upper;
    F.block(d, 0, d, d) = lower;
    return F;
  }
  double symmetrization_residual() const {
    double nf = std::max(matrix_norm(upper), 1e-300);
    return (lower - upper.adjoint()).norm() / nf;
  }
};

inline Matrix l_matrix(int M, double a_n, bool adjoint = false) {
  Matrix D = Matrix::Zero(2 * M + 1, 2 * M + 1);
  for (int m = -M; m <= M; ++m) {
    cplx v = adjoint ? cplx(-a_n, -double(m)) : cplx(-a_n, double(m));
    D(m + M, m + M) = v;
  }
  return D;
}

// untwisted blocks (standard a_n = n, or the modified a-sequence)
inline std::vector<DiracBlock> dirac_untwisted(const Truncation& tr, bool modified,
                                               const GrowthTable* gamma = nullptr) {
  if (modified && (!gamma || gamma->nmax < tr.N))
    throw std::invalid_argument("dirac_untwisted: growth table shorter than N");
  std::vector<DiracBlock> out;
  for (int n = -tr.N; n <= tr.N; ++n) {
    DiracBlock b;
    b.n = n;
    b.a_n = a_coefficient(n, modified ? gamma : nullptr);
    b.upper = l_matrix(tr.M, b.a_n, false);
    b.lower = l_matrix(tr.M, b.a_n, true);
    out.push_back(std::move(b));
  }
  return out;
}

// deformed blocks M_{1/delta_n} L_n
inline std::vector<DiracBlock> dirac_deformed(const Truncation& tr,
                                              const ModularData& md, bool modified,
                                              const GrowthTable* gamma = nullptr) {
  if (modified && (!gamma || gamma->nmax < tr.N))
    throw std::invalid_argument("dirac_deformed: growth table shorter than N");
  std::vector<DiracBlock> out;
  for (int n = -tr.N; n <= tr.N; ++n) {
    DiracBlock b;
    b.n = n;
    b.a_n = a_coefficient(n, modified ? gamma : nullptr);
    b.deformed = true;
    auto delta = md.delta_samples(n);
    std::vector<double> dinv(delta.size());
    for (std::size_t j = 0; j < delta.size(); ++j) {
      if (!(delta[j] > 0.0)) throw positivity_error("dirac_deformed: delta <= 0");
      dinv[j] = 1.0 / delta[j];
    }
    Matrix W = toeplitz_compression(dinv, tr.M);
    b.upper = W * l_matrix(tr.M, b.a_n, false);
    b.lower = l_matrix(tr.M, b.a_n, true) * W;
    out.push_back(std::move(b));
  }
  return out;
}

// e^{K} D e^{K} factorization residual for a deformed block
inline double ek_factorization_residual(const DiracBlock& b, const Truncation& tr,
                                        const ModularData& md) {
  auto delta = md.delta_samples(b.n);
  std::vector<double> dinv(delta.size());
  for (std::size_t j = 0; j < delta.size(); ++j) dinv[j] = 1.0 / delta[j];
  Matrix W = toeplitz_compression(dinv, tr.M);
  Matrix U = l_matrix(tr.M, b.a_n, false);
  Matrix Lw = l_matrix(tr.M, b.a_n, true);
  double scale = std::max(matrix_norm(b.upper), 1e-300);
  return std::max((b.upper - W * U).norm(), (b.lower - Lw * W).norm()) / scale;
}

// ---------------------------------------------------------------------------
// block inverses

struct BlockInverse {
  Matrix lower_of_inverse;  // L_n^{-1} M_delta (the lower-left of D^{-1})
  double norm{0.0};
  bool kernel_projected{false};
};

inline BlockInverse block_inverse(const DiracBlock& b, const ModularData& md,
                                  const Truncation& tr) {
  auto delta = md.delta_samples(b.n);
  Matrix Md = b.deformed ? toeplitz_compression(delta, tr.M)
                         : Matrix::Identity(tr.dim(), tr.dim());
  Matrix Linv = Matrix::Zero(tr.dim(), tr.dim());
  BlockInverse out;
  for (int m = -tr.M; m <= tr.M; ++m) {
    cplx lv(-b.a_n, double(m));
    if (std::abs(lv) < 1e-12) {
      out.kernel_projected = true;
      continue;  // pseudo-inverse on the kernel mode
    }
    Linv(m + tr.M, m + tr.M) = 1.0 / lv;
  }
  out.lower_of_inverse = Linv * Md;
  out.norm = matrix_norm(out.lower_of_inverse);
  return out;
}

// dense pseudo-inverse of the assembled block, for cross-checking
inline std::pair<Matrix, double> block_pseudo_inverse(const DiracBlock& b) {
  Matrix F = b.full();
  Eigen::JacobiSVD<Matrix> svd(F, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  double thresh = 1e-12 * sv(0);
  Eigen::VectorXd inv = sv;
  for (int i = 0; i < sv.size(); ++i) inv(i) = sv(i) > thresh ? 1.0 / sv(i) : 0.0;
  Matrix P = svd.matrixV() * inv.asDiagonal() * svd.matrixU().adjoint();
  return {P, inv.maxCoeff()};
}

// Closed form against the dense pseudo-inverse.  The matrix comparison is
// taken over interior Fourier modes: at the mode edges the compression of
// the inverse and the inverse of the compression differ by construction.
struct InverseCrossCheck {
  double interior_residual{0.0};
  double norm_residual{0.0};
};

inline InverseCrossCheck block_inverse_crosscheck(const DiracBlock& b,
                                                  const ModularData& md,
                                                  const Truncation& tr,
                                                  int edge_cut = 16) {
  auto inv = block_inverse(b, md, tr);
  auto [pinvF, pnorm] = block_pseudo_inverse(b);
  const int d = tr.dim();
  Matrix lower = pinvF.block(d, 0, d, d);
  Matrix D = lower - inv.lower_of_inverse;
  int cut = std::min(edge_cut, tr.M / 2);
  InverseCrossCheck out;
  out.interior_residual = D.block(cut, cut, d - 2 * cut, d - 2 * cut).norm();
  out.norm_residual = std::abs(pnorm - inv.norm);
  return out;
}

// ---------------------------------------------------------------------------
// resolvent report

struct ResolventRow {
  int n;
  double a_n;
  double norm;    // ||(D_n^sigma)^{-1}||
  double bound;   // Gamma_{|n|}(T^2)/|n| or Gamma_{|n|}(T^2)/|a_n|
  bool bound_applies;
};

struct ResolventReport {
  std::vector<ResolventRow> rows;
  bool decay_pass{false};  // last dyadic window max < first window max
  double max_norm{0.0};
};

inline ResolventReport resolvent_report(const std::vector<DiracBlock>& blocks,
                                        const ModularData& md, const GrowthTable& gamma,
                                        const Truncation& tr, bool modified,
                                        bool enforce = true) {
  ResolventReport rep;
  for (const auto& b : blocks) {
    BlockInverse inv = block_inverse(b, md, tr);
    ResolventRow row;
    row.n = b.n;
    row.a_n = b.a_n;
    row.norm = inv.norm;
    row.bound_applies = b.n != 0;
    row.bound = 0.0;
    if (b.n != 0) {
      double g = gamma.gamma(std::labs(b.n));
      row.bound = modified ? g / std::abs(b.a_n) : g / double(std::labs(b.n));
      if (enforce && row.norm > row.bound + 1e-8)
        throw bound_violation_error(
            "resolvent_report: block " + std::to_string(b.n) + " norm " +
            std::to_string(row.norm) + " exceeds bound " + std::to_string(row.bound));
    }
    rep.max_norm = std::max(rep.max_norm, row.norm);
    rep.rows.push_back(row);
  }
  // dyadic-window decay of norms over |n|
  std::vector<double> wmax;
  for (int lo = 1; lo <= tr.N; lo *= 2) {
    int hi = std::min(tr.N, 2 * lo - 1);
    double w = 0.0;
    for (const auto& r : rep.rows)
      if (std::abs(r.n) >= lo && std::abs(r.n) <= hi) w = std::max(w, r.norm);
    wmax.push_back(w);
    if (hi == tr.N) break;
  }
  rep.decay_pass = wmax.size() >= 2 && wmax.back() < wmax.front();
  return rep;
}

// ---------------------------------------------------------------------------
// deformed commutators

struct DeformedCommutator {
  BlockOperator upper;  // Delta^{-1} [L, A]
  BlockOperator lower;  // [L*, A] Delta^{-1}
  double norm{0.0};     // max of the two (odd block structure)
};

inline DeformedCommutator deformed_commutator(const BlockOperator& A,
                                              const ModularData& md,
                                              const Truncation& tr, bool modified,
                                              const GrowthTable* gamma = nullptr) {
  DeformedCommutator out;
  out.upper = BlockOperator(tr.N, tr.M);
  out.lower = BlockOperator(tr.N, tr.M);
  // per-block weights and L-diagonals
  std::vector<Matrix> W(std::size_t(2 * tr.N + 1));
  std::vector<double> a(std::size_t(2 * tr.N + 1));
  for (int n = -tr.N; n <= tr.N; ++n) {
    auto delta = md.delta_samples(n);
    std::vector<double> dinv(delta.size());
    for (std::size_t j = 0; j < delta.size(); ++j) dinv[j] = 1.0 / delta[j];
    W[std::size_t(n + tr.N)] = toeplitz_compression(dinv, tr.M);
    a[std::size_t(n + tr.N)] = a_coefficient(n, modified ? gamma : nullptr);
  }
  for (int l : A.band_indices()) {
    for (int n = A.row_lo(l); n <= A.row_hi(l); ++n) {
      const Matrix& Al = A.block(l, n);
      Matrix Ln = l_matrix(tr.M, a[std::size_t(n + tr.N)], false);
      Matrix Lc = l_matrix(tr.M, a[std::size_t(n - l + tr.N)], false);
      Matrix LnS = l_matrix(tr.M, a[std::size_t(n + tr.N)], true);
      Matrix LcS = l_matrix(tr.M, a[std::size_t(n - l + tr.N)], true);
      out.upper.block(l, n) = W[std::size_t(n + tr.N)] * (Ln * Al - Al * Lc);
      out.lower.block(l, n) = (LnS * Al - Al * LcS) * W[std::size_t(n - l + tr.N)];
    }
  }
  double nu = out.upper.single_band() ? out.upper.max_block_norm() : out.upper.op_norm();
  double nl = out.lower.single_band() ? out.lower.max_block_norm() : out.lower.op_norm();
  out.norm = std::max(nu, nl);
  return out;
}

// ---------------------------------------------------------------------------
// multiplication part of the commutator for n = 0 slice elements built from
// F o h: (Delta^{-1}[L, A])_n is multiplication by (1/2pi) F'(T^{2n} x)

struct MultiplicationPart {
  std::vector<std::vector<double>> values;  // per block n, samples
  std::vector<double> sup_per_block;
  double sup{0.0};
};

// Fprime: samples of dF/dx on the grid (angle-x units; the d/dtheta
// normalization 1/(2 pi) is applied internally)
inline MultiplicationPart commutator_multiplication_part(
    const std::vector<double>& Fprime, const ModularData& md, const Truncation& tr) {
  const int g = md.grid();
  if (int(Fprime.size()) != g)
    throw std::invalid_argument("commutator_multiplication_part: sample size");
  auto fp = fourier_coeffs(Fprime);
  long kmax = 0;
  for (long k = 1; k <= g / 2 - 1; ++k)
    if (std::abs(fp[std::size_t(k)]) > 1e-15 ||
        std::abs(fp[std::size_t(g - k)]) > 1e-15)
      kmax = k;
  auto evalFp = [&](double x) {
    cplx acc = fft_coeff(fp, 0);
    for (long k = 1; k <= kmax; ++k) {
      acc += fft_coeff(fp, k) * unit_phase(double(k) * x) +
             fft_coeff(fp, -k) * unit_phase(-double(k) * x);
    }
    return acc.real();
  };
  MultiplicationPart out;
  for (int n = -tr.N; n <= tr.N; ++n) {
    std::vector<double> row(std::size_t(g), 0.0);
    int amax = 0;
    for (int j = 0; j < g; ++j) {
      double w = md.pos(2 * n, j);
      row[std::size_t(j)] = evalFp(w) / kTwoPi;
      if (std::abs(row[std::size_t(j)]) > std::abs(row[std::size_t(amax)])) amax = j;
    }
    double sup = refine_max(
        [&](double x) {
          // pull back through the orbit pointwise
          double w = x, p = 1.0;
          (void)p;
          for (int i = 0; i < 2 * std::abs(n); ++i)
            w = (n >= 0) ? md.T().value(w)
                         : md.T().invert_point(w, 1e-13, w - md.T().translation());
          return std::abs(evalFp(frac(w))) / kTwoPi;
        },
        double(amax) / g, 1.5 / g);
    out.sup_per_block.push_back(sup);
    out.sup = std::max(out.sup, sup);
    out.values.push_back(std::move(row));
  }
  return out;
}

}  // namespace nct
