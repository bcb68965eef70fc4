/*
 * liouville.hpp — fast-approximation arithmetic for irrational rotation
 * numbers.
 *
 * A LiouvilleApprox holds a sequence of rational approximants p_k/q_k to a
 * number alpha together with a certified enclosure of |alpha - p_k/q_k|
 * per approximant.  Two constructions are provided:
 *
 *   - tower(K): alpha = sum 1/q_n with q_1 = 2, q_n = (2^n)^(2^(q_{n-1})).
 *     q_2 = 256; q_3 = 2^(3*2^256) is kept as a base-2 exponent record (the
 *     fraction itself has ~10^77 digits and is never materialized).
 *   - from_convergents(list): consecutive continued-fraction convergents
 *     supplied by the caller; the alternating p'q - pq' = +-1 identity is
 *     verified and the error enclosures follow from the convergent
 *     sandwich plus the standard 1/(q(q+q')) lower bound.
 *
 * All rate checks (check_L, check_UL) are decided in exact or outward-
 * rounded arithmetic.  A comparison that cannot be decided is reported as
 * indeterminate, never silently coerced to a boolean.
 */

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "nct/exact.hpp"
#include "nct/util.hpp"

namespace nct {

struct insufficient_approximants : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Exact nonnegative value: a rational or a dyadic with big exponent.
class XVal {
 public:
  XVal() : is_rat_(true), r_(0) {}
  static XVal rat(Rational r) {
    XVal v;
    v.is_rat_ = true;
    v.r_ = std::move(r);
    return v;
  }
  static XVal dyadic(DFloat d) {
    XVal v;
    v.is_rat_ = false;
    v.d_ = std::move(d);
    return v;
  }

  bool is_rational() const { return is_rat_; }
  const Rational& rational() const { return r_; }
  const DFloat& dfloat() const { return d_; }

  bool is_zero() const { return is_rat_ ? r_ == 0 : d_.is_zero(); }

  DFloat to_dfloat(Round dir, long prec) const {
    if (is_rat_) return DFloat::from_rational(r_, dir, prec);
    return d_;  // dyadics are exact
  }

  // exact three-way comparison
  static int cmp(const XVal& a, const XVal& b) {
    if (a.is_rat_ && b.is_rat_) return a.r_ < b.r_ ? -1 : (a.r_ > b.r_ ? 1 : 0);
    if (!a.is_rat_ && !b.is_rat_) return DFloat::cmp(a.d_, b.d_);
    const XVal& rv = a.is_rat_ ? a : b;
    const XVal& dv = a.is_rat_ ? b : a;
    int sign = a.is_rat_ ? 1 : -1;  // sign of cmp(rational, dyadic)
    int c = cmp_rat_dyadic(rv.r_, dv.d_);
    return sign * c;
  }

  std::string str() const {
    if (is_rat_) return r_.str();
    return d_.to_string();
  }

 private:
  bool is_rat_;
  Rational r_{0};
  DFloat d_{};

  static int cmp_rat_dyadic(const Rational& r, const DFloat& d) {
    if (r == 0 && d.is_zero()) return 0;
    if (r == 0) return -1;
    if (d.is_zero()) return 1;
    const Int& e = d.exponent();
    if (e >= -(1 << 20) && e <= (1 << 20)) {
      // materialize exactly
      Rational dr(d.mantissa());
      long el = long(e);
      if (el >= 0)
        dr *= Rational(Int(1) << unsigned(el));
      else
        dr /= Rational(Int(1) << unsigned(-el));
      return r < dr ? -1 : (r > dr ? 1 : 0);
    }
    // exponent far out of rational range: decide by log2 windows
    Int log2r_lo = Int(bit_length(boost::multiprecision::numerator(r)) -
                       bit_length(boost::multiprecision::denominator(r))) - 1;
    Int log2r_hi = log2r_lo + 2;
    Int log2d_lo = d.msb_pos() - 1, log2d_hi = d.msb_pos();
    if (log2r_hi < log2d_lo) return -1;
    if (log2d_hi < log2r_lo) return 1;
    throw precision_exhausted("cmp_rat_dyadic: overlapping log ranges at huge exponent");
  }
};

// Certified enclosure of |alpha - p/q|.
struct ErrEnclosure {
  XVal lo;  // valid only when lo_known
  XVal hi;
  bool lo_known{false};
};

struct ApproxEntry {
  bool materialized{true};
  Rational frac{0};   // p_k/q_k when materialized
  Int q{0};           // denominator when materialized
  Int log2_q{0};      // q = 2^log2_q when symbolic
  bool q_symbolic{false};
  ErrEnclosure err;
};

class LiouvilleApprox {
 public:
  static LiouvilleApprox tower(int K, long precision_bits = 256) {
    if (K < 1 || K > 3)
      throw overflow_guard_error(
          "tower: K must be in [1,3]; beyond K=3 even the exponent record "
          "of q_K is not materializable");
    LiouvilleApprox out;
    out.precision_bits_ = precision_bits;
    out.source_ = "tower:" + std::to_string(K);
    // q_1 = 2, q_2 = (2^2)^(2^2) = 256, q_3 = (2^3)^(2^256)
    Rational s1(1, 2);
    Rational s2 = s1 + Rational(1, 256);  // 129/256
    Int log2_q3 = Int(3) * (Int(1) << 256);
    {
      ApproxEntry e1;
      e1.frac = s1;
      e1.q = 2;
      // alpha - s_1 = sum_{j>=2} 1/q_j in (1/q_2, 2/q_2)
      e1.err.lo = XVal::rat(Rational(1, 256));
      e1.err.hi = XVal::rat(Rational(2, 256));
      e1.err.lo_known = true;
      out.entries_.push_back(e1);
    }
    if (K >= 2) {
      ApproxEntry e2;
      e2.frac = s2;
      e2.q = 256;
      // alpha - s_2 in (1/q_3, 2/q_3) = (2^-log2_q3, 2^(1-log2_q3))
      e2.err.lo = XVal::dyadic(DFloat::pow2(-log2_q3));
      e2.err.hi = XVal::dyadic(DFloat::pow2(Int(1) - log2_q3));
      e2.err.lo_known = true;
      out.entries_.push_back(e2);
    }
    if (K == 3) {
      ApproxEntry e3;
      e3.materialized = false;
      e3.q_symbolic = true;
      e3.log2_q = log2_q3;
      // true bound is 2/q_4 = 2^(1 - 4*2^(q_3)); the exponent of that
      // exponent is not materializable, so a weaker certified bound is
      // stored: 4*2^(q_3) >= 2^4096 since q_3 >= 4096.
      e3.err.hi = XVal::dyadic(DFloat::pow2(-(Int(1) << 4096)));
      e3.err.lo_known = false;
      out.entries_.push_back(e3);
    }
    // alpha itself: s_2 + tail, tail < 2^(1-log2_q3); flat to any feasible
    // precision, so the enclosure is [s_2, s_2 + 2^(1-log2_q3)]
    out.value_lo_ = DFloat::from_rational(s2, Round::Down, precision_bits);
    out.value_hi_ = DFloat::add(out.value_lo_, DFloat::pow2(Int(1) - log2_q3),
                                Round::Up, precision_bits);
    return out;
  }

  static LiouvilleApprox from_convergents(const std::vector<std::pair<Int, Int>>& pq,
                                          long precision_bits = 256) {
    if (pq.size() < 2)
      throw insufficient_approximants("from_convergents: need at least two convergents");
    LiouvilleApprox out;
    out.precision_bits_ = precision_bits;
    out.source_ = "convergents";
    std::vector<Rational> fr;
    for (std::size_t k = 0; k < pq.size(); ++k) {
      const auto& [p, q] = pq[k];
      if (q <= 0) throw std::invalid_argument("convergent with q <= 0");
      Rational r(p, q);
      if (boost::multiprecision::denominator(r) != q)
        throw std::invalid_argument("convergent not in lowest terms: " + p.str() +
                                    "/" + q.str());
      if (k > 0 && q <= pq[k - 1].second)
        throw std::invalid_argument("denominators must increase");
      if (k > 0) {
        Int cross = pq[k].first * pq[k - 1].second - pq[k - 1].first * pq[k].second;
        if (cross != 1 && cross != -1)
          throw std::invalid_argument(
              "consecutive entries are not neighboring convergents (p'q - pq' != +-1)");
      }
      fr.push_back(r);
    }
    const std::size_t K = fr.size();
    // alpha lies strictly between the last two convergents
    Rational lo_end = std::min(fr[K - 2], fr[K - 1]);
    Rational hi_end = std::max(fr[K - 2], fr[K - 1]);
    for (std::size_t k = 0; k < K; ++k) {
      ApproxEntry e;
      e.frac = fr[k];
      e.q = pq[k].second;
      Rational hi, lo(0);
      bool lo_known = false;
      if (k + 1 < K) {
        // classical sandwich: 1/(q(q+q')) < |alpha - p/q| < 1/(q q')
        hi = Rational(1, pq[k].second * pq[k + 1].second);
        lo = Rational(1, pq[k].second * (pq[k + 1].second + pq[k].second));
        lo_known = true;
      } else {
        // last convergent: |alpha - p/q| < gap to the previous one
        hi = boost::multiprecision::abs(fr[K - 1] - fr[K - 2]);
      }
      if (k + 2 < K) {
        // sharpen with the enclosure endpoints
        Rational dlo = boost::multiprecision::abs(lo_end - fr[k]);
        Rational dhi = boost::multiprecision::abs(hi_end - fr[k]);
        if (dhi < dlo) std::swap(dlo, dhi);
        if (dhi < hi) hi = dhi;
        if (dlo > lo) {
          lo = dlo;
          lo_known = true;
        }
      }
      e.err.hi = XVal::rat(hi);
      e.err.lo = XVal::rat(lo);
      e.err.lo_known = lo_known;
      out.entries_.push_back(e);
    }
    out.value_lo_ = DFloat::from_rational(lo_end, Round::Down, precision_bits);
    out.value_hi_ = DFloat::from_rational(hi_end, Round::Up, precision_bits);
    return out;
  }

  const std::vector<ApproxEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  long precision_bits() const { return precision_bits_; }
  const std::string& source() const { return source_; }
  const DFloat& value_lo() const { return value_lo_; }
  const DFloat& value_hi() const { return value_hi_; }
  double value_approx() const { return value_lo_.to_double(); }

  std::optional<std::size_t> find_by_denominator(const Int& q) const {
    for (std::size_t k = 0; k < entries_.size(); ++k)
      if (entries_[k].materialized && entries_[k].q == q) return k;
    return std::nullopt;
  }

 private:
  std::vector<ApproxEntry> entries_;
  DFloat value_lo_{}, value_hi_{};
  long precision_bits_{256};
  std::string source_;
};

// ---------------------------------------------------------------------------
// rate checks

struct CheckOutcome {
  bool satisfied{false};
  std::vector<std::size_t> witnesses;       // approximant indices (0-based)
  std::optional<std::size_t> first_failing;
  std::vector<std::size_t> indeterminate;
};

namespace detail {

// enclosure of 1/q^N as XVal bounds (exact)
inline std::pair<XVal, XVal> rhs_L(const ApproxEntry& e, long N) {
  if (e.q_symbolic) {
    DFloat v = DFloat::pow2(-Int(N) * e.log2_q);
    return {XVal::dyadic(v), XVal::dyadic(v)};
  }
  Rational r = Rational(1) / Rational(boost::multiprecision::pow(e.q, unsigned(N)));
  return {XVal::rat(r), XVal::rat(r)};
}

// certified enclosure of eps / (q^N e^{(C q^N)^2}); nullopt when the
// intermediate exponent is not materializable (symbolic q)
inline std::optional<std::pair<DFloat, DFloat>> rhs_UL(const ApproxEntry& e, long N,
                                                       const Rational& C,
                                                       const Rational& eps,
                                                       long prec) {
  if (e.q_symbolic) return std::nullopt;
  Rational qN(boost::multiprecision::pow(e.q, unsigned(N)));
  Rational t = C * qN;
  Rational t2 = t * t;
  DFloat t2_lo = DFloat::from_rational(t2, Round::Down, prec);
  DFloat t2_hi = DFloat::from_rational(t2, Round::Up, prec);
  DFloat e_lo = exp_dir(t2_lo, Round::Down, prec);
  DFloat e_hi = exp_dir(t2_hi, Round::Up, prec);
  DFloat num_lo = DFloat::from_rational(eps, Round::Down, prec);
  DFloat num_hi = DFloat::from_rational(eps, Round::Up, prec);
  DFloat den_lo = DFloat::mul(DFloat::from_rational(qN, Round::Down, prec), e_lo,
                              Round::Down, prec);
  DFloat den_hi = DFloat::mul(DFloat::from_rational(qN, Round::Up, prec), e_hi,
                              Round::Up, prec);
  return std::make_pair(DFloat::div(num_lo, den_hi, Round::Down, prec),
                        DFloat::div(num_hi, den_lo, Round::Up, prec));
}

}  // namespace detail

// (L): |alpha - p/q| < 1/q^N for `count` stored approximants.
inline CheckOutcome check_L(const LiouvilleApprox& x, long N, long count) {
  if (N < 1 || count < 1) throw std::invalid_argument("check_L: N >= 1, count >= 1");
  if (std::size_t(count) > x.size())
    throw insufficient_approximants("check_L: stored sequence shorter than count");
  CheckOutcome out;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const auto& e = x.entries()[k];
    auto [rlo, rhi] = detail::rhs_L(e, N);
    if (XVal::cmp(e.err.hi, rlo) < 0) {
      out.witnesses.push_back(k);
      if (long(out.witnesses.size()) >= count) {
        out.satisfied = true;
        return out;
      }
      continue;
    }
    if (e.err.lo_known && XVal::cmp(rhi, e.err.lo) <= 0) {
      if (!out.first_failing) out.first_failing = k;
      continue;
    }
    out.indeterminate.push_back(k);
    if (!out.first_failing) out.first_failing = k;
  }
  out.satisfied = false;
  return out;
}

// (UL)-style rate of Eq-form |alpha - p/q| < eps/(q^N e^{(C q^N)^2}).
inline CheckOutcome check_UL(const LiouvilleApprox& x, long N, const Rational& C,
                             const Rational& eps, long count) {
  if (N < 1 || count < 1) throw std::invalid_argument("check_UL: N >= 1, count >= 1");
  if (!(C > 1)) throw std::invalid_argument("check_UL: C > 1 required");
  if (!(eps > 0 && eps <= 1)) throw std::invalid_argument("check_UL: 0 < eps <= 1");
  if (std::size_t(count) > x.size())
    throw insufficient_approximants("check_UL: stored sequence shorter than count");
  CheckOutcome out;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const auto& e = x.entries()[k];
    bool decided = false;
    for (long prec = 96; prec <= 4096 && !decided; prec *= 2) {
      auto rhs = detail::rhs_UL(e, N, C, eps, prec);
      if (!rhs) break;  // symbolic q: not decidable here, fall through
      DFloat err_hi = e.err.hi.to_dfloat(Round::Up, prec);
      if (DFloat::cmp(err_hi, rhs->first) < 0) {
        out.witnesses.push_back(k);
        decided = true;
        break;
      }
      if (e.err.lo_known) {
        DFloat err_lo = e.err.lo.to_dfloat(Round::Down, prec);
        if (DFloat::cmp(rhs->second, err_lo) <= 0) {
          if (!out.first_failing) out.first_failing = k;
          decided = true;
          break;
        }
      }
    }
    if (!decided) {
      out.indeterminate.push_back(k);
      if (!out.first_failing) out.first_failing = k;
    }
    if (long(out.witnesses.size()) >= count) {
      out.satisfied = true;
      return out;
    }
  }
  out.satisfied = false;
  return out;
}

// convenience: the first ten golden-ratio convergents of (sqrt(5)-1)/2
inline LiouvilleApprox golden_ratio_convergents(std::size_t n = 10,
                                                long precision_bits = 256) {
  std::vector<std::pair<Int, Int>> pq;
  Int a = 1, b = 2;  // F_k / F_{k+1} starting at 1/2
  for (std::size_t k = 0; k < n; ++k) {
    pq.emplace_back(a, b);
    Int c = a + b;
    a = b;
    b = c;
  }
  return LiouvilleApprox::from_convergents(pq, precision_bits);
}

}  // namespace nct
