/*
 * weyl.hpp — finitely supported elements of the twisted convolution
 * algebra on Z^2.
 *
 * An element is a finite map (m, n) -> complex amplitude together with the
 * deformation parameter alpha (kept as an exact rational so that phases
 * e^{2 pi i alpha k} stay coherent for large k).  The product is
 *
 *   (f * g)(a) = sum_A f(A) g(a - A) e^{-2 pi i alpha sigma(a, A)},
 *   sigma((m,n), (M,N)) = m N - M n,
 *
 * the involution is f*(a) = conj(f(-a)) and the canonical trace reads off
 * the amplitude at the origin.
 */

#pragma once

#include <map>
#include <utility>
#include <vector>

#include "nct/exact.hpp"
#include "nct/util.hpp"

namespace nct {

struct alpha_mismatch_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

class WeylElement {
 public:
  using Index = std::pair<long, long>;  // (m, n)

  WeylElement() = default;
  explicit WeylElement(Rational alpha) : alpha_(std::move(alpha)) {}

  static WeylElement delta(const Rational& alpha, long m, long n,
                           cplx amp = cplx(1.0, 0.0)) {
    WeylElement f(alpha);
    f.set(m, n, amp);
    return f;
  }
  static WeylElement identity(const Rational& alpha) { return delta(alpha, 0, 0); }

  const Rational& alpha() const { return alpha_; }
  const std::map<Index, cplx>& terms() const { return terms_; }
  bool empty() const { return terms_.empty(); }
  std::size_t support_size() const { return terms_.size(); }

  cplx at(long m, long n) const {
    auto it = terms_.find({m, n});
    return it == terms_.end() ? cplx(0.0, 0.0) : it->second;
  }

  void set(long m, long n, cplx v) {
    if (v == cplx(0.0, 0.0))
      terms_.erase({m, n});
    else
      terms_[{m, n}] = v;
  }

  void add(long m, long n, cplx v) { set(m, n, at(m, n) + v); }

  double norm1() const {
    double s = 0.0;
    for (const auto& [k, v] : terms_) s += std::abs(v);
    return s;
  }

  // largest |m| and |n| in the support
  long max_abs_m() const {
    long mm = 0;
    for (const auto& [k, v] : terms_) mm = std::max(mm, std::labs(k.first));
    return mm;
  }
  long max_abs_n() const {
    long nn = 0;
    for (const auto& [k, v] : terms_) nn = std::max(nn, std::labs(k.second));
    return nn;
  }

  // the n-th row as a coefficient list: f^(n)(m)
  std::map<long, cplx> slice(long n) const {
    std::map<long, cplx> row;
    for (const auto& [k, v] : terms_)
      if (k.second == n) row[k.first] = v;
    return row;
  }

  std::vector<long> slice_indices() const {
    std::map<long, bool> seen;
    for (const auto& [k, v] : terms_) seen[k.second] = true;
    std::vector<long> out;
    for (const auto& [n, b] : seen) out.push_back(n);
    return out;
  }

  // evaluate the anti-transform of slice n at angle x: sum_m f(m,n) e^{2 pi i m x}
  cplx slice_eval(long n, double x) const {
    cplx acc(0.0, 0.0);
    for (const auto& [k, v] : terms_)
      if (k.second == n) acc += v * unit_phase(double(k.first) * x);
    return acc;
  }

 private:
  Rational alpha_{0};
  std::map<Index, cplx> terms_;
};

// phase e^{2 pi i alpha s} with the angle reduced exactly mod 1 first
inline cplx alpha_phase(const Rational& alpha, long s) {
  Rational t = alpha * s;
  t -= Rational(boost::multiprecision::numerator(t) /
                boost::multiprecision::denominator(t));
  if (t < 0) t += 1;
  return unit_phase(rational_to_double(t));
}

inline WeylElement twisted_convolution(const WeylElement& f, const WeylElement& g) {
  if (f.alpha() != g.alpha())
    throw alpha_mismatch_error("twisted_convolution: deformation parameters differ");
  WeylElement out(f.alpha());
  for (const auto& [A, fA] : f.terms()) {
    const long M = A.first, N = A.second;
    for (const auto& [B, gB] : g.terms()) {
      const long m = M + B.first, n = N + B.second;
      // sigma(a, A) with a = (m, n)
      const long sig = m * N - M * n;
      out.add(m, n, fA * gB * alpha_phase(f.alpha(), -sig));
    }
  }
  return out;
}

inline WeylElement star(const WeylElement& f) {
  WeylElement out(f.alpha());
  for (const auto& [k, v] : f.terms()) out.set(-k.first, -k.second, std::conj(v));
  return out;
}

inline cplx trace(const WeylElement& f) { return f.at(0, 0); }

inline WeylElement scale(const WeylElement& f, cplx c) {
  WeylElement out(f.alpha());
  for (const auto& [k, v] : f.terms()) out.set(k.first, k.second, c * v);
  return out;
}

inline WeylElement add(const WeylElement& f, const WeylElement& g) {
  if (f.alpha() != g.alpha())
    throw alpha_mismatch_error("add: deformation parameters differ");
  WeylElement out = f;
  for (const auto& [k, v] : g.terms()) out.add(k.first, k.second, v);
  return out;
}

inline WeylElement sub(const WeylElement& f, const WeylElement& g) {
  return add(f, scale(g, cplx(-1.0, 0.0)));
}

}  // namespace nct
