/*
 * blockop.hpp — banded operators on the truncated block Hilbert space.
 *
 * The truncated space keeps blocks n in [-N, N], each a (2M+1)-dimensional
 * Fourier slice of L^2(T, m) spanned by z^m, |m| <= M.  Operators are
 * stored band-wise: band l holds, for each row block n, the (2M+1)^2
 * matrix mapping block n-l into block n.  Multiplication operators are
 * Fourier-truncated Toeplitz compressions P M_phi P built from grid
 * samples, so every assembled matrix is exactly a compression of the
 * corresponding infinite operator (up to DFT aliasing of the samples).
 */

#pragma once

#include <Eigen/Dense>

#include <map>
#include <vector>

#include "nct/fft.hpp"
#include "nct/util.hpp"

namespace nct {

using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

struct Truncation {
  int N{4};   // block cutoff, n in [-N, N]
  int M{8};   // Fourier cutoff per block, |m| <= M
  int G{1 << 12};

  Truncation() = default;
  Truncation(int n, int m, int g) : N(n), M(m), G(g) { validate(); }
  void validate() const {
    if (N < 1) throw std::invalid_argument("Truncation: N >= 1");
    if (M < 4) throw std::invalid_argument("Truncation: M >= 4");
    if (G < 8 * M) throw std::invalid_argument("Truncation: G >= 8M");
    if (!is_pow2(G)) throw std::invalid_argument("Truncation: G must be a power of two");
  }
  int dim() const { return 2 * M + 1; }
  int blocks() const { return 2 * N + 1; }
};

// P M_phi P from samples of phi on the G-grid: T(i,j) = phi_hat(m_i - m_j)
inline Matrix toeplitz_compression(const std::vector<cplx>& samples, int M) {
  auto c = fourier_coeffs(samples);
  const int d = 2 * M + 1;
  Matrix T(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) T(i, j) = fft_coeff(c, long(i - j));
  return T;
}

inline Matrix toeplitz_compression(const std::vector<double>& samples, int M) {
  std::vector<cplx> cs(samples.begin(), samples.end());
  return toeplitz_compression(cs, M);
}

// block vector in the truncated space
struct BlockVector {
  int N{0}, M{0};
  std::vector<Vector> comp;  // index n + N

  BlockVector() = default;
  BlockVector(int n, int m) : N(n), M(m) {
    comp.assign(std::size_t(2 * n + 1), Vector::Zero(2 * m + 1));
  }
  Vector& at(int n) { return comp[std::size_t(n + N)]; }
  const Vector& at(int n) const { return comp[std::size_t(n + N)]; }
  double norm() const {
    double s = 0.0;
    for (const auto& v : comp) s += v.squaredNorm();
    return std::sqrt(s);
  }
  cplx dot(const BlockVector& o) const {
    cplx s(0.0, 0.0);
    for (std::size_t i = 0; i < comp.size(); ++i) s += o.comp[i].dot(comp[i]);
    return s;
  }
};

// banded block operator
class BlockOperator {
 public:
  BlockOperator() = default;
  BlockOperator(int N, int M) : N_(N), M_(M) {}

  int N() const { return N_; }
  int M() const { return M_; }
  int dim() const { return 2 * M_ + 1; }

  bool has_band(int l) const { return bands_.count(l) > 0; }
  std::vector<int> band_indices() const {
    std::vector<int> out;
    for (const auto& [l, b] : bands_) out.push_back(l);
    return out;
  }

  // valid row range of band l: both n and n-l must lie in [-N, N]
  int row_lo(int l) const { return std::max(-N_, -N_ + l); }
  int row_hi(int l) const { return std::min(N_, N_ + l); }

  // access block (n, n-l); creates the band on demand
  Matrix& block(int l, int n) {
    auto& band = bands_[l];
    if (band.empty())
      band.assign(std::size_t(row_hi(l) - row_lo(l) + 1), Matrix::Zero(dim(), dim()));
    return band[std::size_t(n - row_lo(l))];
  }
  const Matrix& block(int l, int n) const {
    static const Matrix zero = Matrix();
    auto it = bands_.find(l);
    if (it == bands_.end()) throw std::out_of_range("BlockOperator: no such band");
    return it->second[std::size_t(n - row_lo(l))];
  }

  BlockVector apply(const BlockVector& v) const {
    BlockVector out(N_, M_);
    for (const auto& [l, band] : bands_) {
      for (int n = row_lo(l); n <= row_hi(l); ++n)
        out.at(n) += band[std::size_t(n - row_lo(l))] * v.at(n - l);
    }
    return out;
  }

  BlockOperator adjoint() const {
    BlockOperator out(N_, M_);
    for (const auto& [l, band] : bands_) {
      for (int n = row_lo(l); n <= row_hi(l); ++n) {
        // block (n, n-l) contributes to the adjoint's block (n-l, n)
        out.block(-l, n - l) = band[std::size_t(n - row_lo(l))].adjoint();
      }
    }
    return out;
  }

  // truncated product (P A P)(P B P): paths through blocks outside [-N, N]
  // are dropped, matching compression semantics
  BlockOperator multiply(const BlockOperator& rhs) const {
    BlockOperator out(N_, M_);
    for (const auto& [l1, b1] : bands_) {
      for (const auto& [l2, b2] : rhs.bands_) {
        int l = l1 + l2;
        int lo = std::max(row_lo(l1), rhs.row_lo(l2) + l1);
        int hi = std::min(row_hi(l1), rhs.row_hi(l2) + l1);
        for (int n = lo; n <= hi; ++n) {
          int mid = n - l1;
          out.block(l, n) += b1[std::size_t(n - row_lo(l1))] *
                             b2[std::size_t(mid - rhs.row_lo(l2))];
        }
      }
    }
    return out;
  }

  BlockOperator subtract(const BlockOperator& rhs) const {
    BlockOperator out = *this;
    for (const auto& [l, band] : rhs.bands_) {
      for (int n = rhs.row_lo(l); n <= rhs.row_hi(l); ++n)
        out.block(l, n) -= band[std::size_t(n - rhs.row_lo(l))];
    }
    return out;
  }

  Matrix to_dense() const {
    const int d = dim(), B = 2 * N_ + 1;
    Matrix D = Matrix::Zero(d * B, d * B);
    for (const auto& [l, band] : bands_) {
      for (int n = row_lo(l); n <= row_hi(l); ++n) {
        D.block(d * (n + N_), d * (n - l + N_), d, d) =
            band[std::size_t(n - row_lo(l))];
      }
    }
    return D;
  }

  // operator norm via power iteration on A*A (deterministic start)
  double op_norm(int iters = 300, double tol = 1e-13) const {
    BlockOperator adj = adjoint();
    Rng rng(0x5eedULL);
    BlockVector v(N_, M_);
    for (auto& c : v.comp)
      for (int i = 0; i < c.size(); ++i) c(i) = cplx(rng.gauss(), rng.gauss());
    double nv = v.norm();
    if (nv == 0.0) return 0.0;
    for (auto& c : v.comp) c /= nv;
    double lam = 0.0;
    for (int it = 0; it < iters; ++it) {
      BlockVector w = adj.apply(apply(v));
      double nw = w.norm();
      if (nw < 1e-300) return 0.0;
      for (auto& c : w.comp) c /= nw;
      double change = std::abs(nw - lam);
      lam = nw;
      v = std::move(w);
      if (it > 8 && change < tol * std::max(1.0, lam)) break;
    }
    return std::sqrt(lam);
  }

  // max over blocks of the individual block norms (exact operator norm for
  // single-band operators, since domains and ranges are then orthogonal)
  double max_block_norm() const {
    double m = 0.0;
    for (const auto& [l, band] : bands_)
      for (const auto& b : band)
        m = std::max(m, b.jacobiSvd().singularValues()(0));
    return m;
  }

  bool single_band() const { return bands_.size() == 1; }

 private:
  int N_{0}, M_{0};
  std::map<int, std::vector<Matrix>> bands_;
};

// identity on the truncated space
inline BlockOperator block_identity(const Truncation& tr) {
  BlockOperator out(tr.N, tr.M);
  for (int n = -tr.N; n <= tr.N; ++n)
    out.block(0, n) = Matrix::Identity(tr.dim(), tr.dim());
  return out;
}

// norm of a matrix (largest singular value)
inline double matrix_norm(const Matrix& A) {
  return A.jacobiSvd().singularValues()(0);
}

}  // namespace nct
