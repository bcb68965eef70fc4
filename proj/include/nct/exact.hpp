/*
 * exact.hpp — certified arithmetic for the number-theoretic checks.
 *
 * Two layers:
 *   - Rational: exact rational arithmetic (boost cpp_rational).
 *   - DFloat: nonnegative dyadic float m * 2^e with a big-integer exponent
 *     and directed rounding (Down = result <= true value, Up = result >=
 *     true value).  Exponents like -3*2^256 occur when certifying the
 *     approximation quality of tower-power reciprocal sums, so e is a
 *     cpp_int, not a machine integer.
 *
 * Every inequality decided through this header is decided from a certified
 * upper bound on one side and a certified lower bound on the other; if the
 * enclosures overlap the comparison is indeterminate and callers retry at
 * doubled precision.
 */

#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

namespace nct {

using Int = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

inline long bit_length(const Int& v) {
  if (v == 0) return 0;
  return long(boost::multiprecision::msb(v)) + 1;
}

enum class Round { Down, Up };

struct precision_exhausted : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Nonnegative dyadic float with big exponent.
class DFloat {
 public:
  DFloat() = default;
  DFloat(Int mant, Int exp2) : m_(std::move(mant)), e_(std::move(exp2)) {
    if (m_ < 0) throw std::invalid_argument("DFloat: negative mantissa");
    if (m_ == 0) e_ = 0;
  }

  static DFloat zero() { return DFloat(); }
  static DFloat one() { return DFloat(Int(1), Int(0)); }
  static DFloat pow2(Int e) { return DFloat(Int(1), std::move(e)); }

  static DFloat from_int(const Int& v) {
    if (v < 0) throw std::invalid_argument("DFloat: negative");
    return DFloat(v, Int(0));
  }

  // doubles are dyadic rationals; conversion is exact
  static DFloat from_double(double d) {
    if (d < 0 || !std::isfinite(d)) throw std::invalid_argument("DFloat: bad double");
    if (d == 0.0) return zero();
    int e = 0;
    double m = std::frexp(d, &e);  // d = m * 2^e, m in [0.5,1)
    Int mi = Int(std::ldexp(m, 53));
    return DFloat(mi, Int(e - 53));
  }

  static DFloat from_rational(const Rational& r, Round dir, long prec) {
    if (r < 0) throw std::invalid_argument("DFloat: negative rational");
    if (r == 0) return zero();
    Int num = boost::multiprecision::numerator(r);
    Int den = boost::multiprecision::denominator(r);
    long shift = prec + 2 + bit_length(den) - bit_length(num);
    if (shift < 0) shift = 0;
    Int scaled = num << unsigned(shift);
    Int q = scaled / den;
    Int rem = scaled - q * den;
    if (dir == Round::Up && rem != 0) ++q;
    DFloat out(q, Int(-shift));
    out.normalize(dir, prec);
    return out;
  }

  bool is_zero() const { return m_ == 0; }
  const Int& mantissa() const { return m_; }
  const Int& exponent() const { return e_; }

  // value lies in [2^(msb_pos-1), 2^msb_pos)
  Int msb_pos() const { return Int(bit_length(m_)) + e_; }

  void normalize(Round dir, long prec) {
    if (m_ == 0) {
      e_ = 0;
      return;
    }
    long bits = bit_length(m_);
    if (bits > prec) {
      long s = bits - prec;
      Int dropped_mask = (Int(1) << unsigned(s)) - 1;
      bool inexact = (m_ & dropped_mask) != 0;
      m_ >>= unsigned(s);
      e_ += s;
      if (dir == Round::Up && inexact) {
        ++m_;
        if (bit_length(m_) > prec) {  // carry ripple; mantissa now even
          m_ >>= 1;
          e_ += 1;
        }
      }
    }
  }

  static int cmp(const DFloat& a, const DFloat& b) {
    if (a.is_zero() && b.is_zero()) return 0;
    if (a.is_zero()) return -1;
    if (b.is_zero()) return 1;
    Int pa = a.msb_pos(), pb = b.msb_pos();
    if (pa < pb) return -1;
    if (pa > pb) return 1;
    // equal msb position: the alignment shift is bounded by mantissa widths
    Int d = a.e_ - b.e_;
    long sd = long(d);
    Int am = a.m_, bm = b.m_;
    if (sd > 0)
      am <<= unsigned(sd);
    else if (sd < 0)
      bm <<= unsigned(-sd);
    if (am < bm) return -1;
    if (am > bm) return 1;
    return 0;
  }

  bool operator<(const DFloat& o) const { return cmp(*this, o) < 0; }
  bool operator<=(const DFloat& o) const { return cmp(*this, o) <= 0; }

  static DFloat mul(const DFloat& a, const DFloat& b, Round dir, long prec) {
    if (a.is_zero() || b.is_zero()) return zero();
    DFloat out(a.m_ * b.m_, a.e_ + b.e_);
    out.normalize(dir, prec);
    return out;
  }

  static DFloat add(const DFloat& a0, const DFloat& b0, Round dir, long prec) {
    if (a0.is_zero()) {
      DFloat b = b0;
      b.normalize(dir, prec);
      return b;
    }
    if (b0.is_zero()) {
      DFloat a = a0;
      a.normalize(dir, prec);
      return a;
    }
    DFloat a = a0, b = b0;
    a.normalize(dir, prec + 16);
    b.normalize(dir, prec + 16);
    if (cmp(a, b) < 0) std::swap(a, b);  // a is the larger value
    Int gap = a.msb_pos() - b.msb_pos();
    if (gap > prec + 32) {
      // b is below the last representable bit of the result
      DFloat out = a;
      if (dir == Round::Up) out = DFloat(out.mantissa() + 1, out.exponent());
      out.normalize(dir, prec);
      return out;
    }
    Int e0 = (a.e_ < b.e_) ? a.e_ : b.e_;
    long sa = long(a.e_ - e0), sb = long(b.e_ - e0);
    DFloat out((a.m_ << unsigned(sa)) + (b.m_ << unsigned(sb)), e0);
    out.normalize(dir, prec);
    return out;
  }

  static DFloat div(const DFloat& a, const DFloat& b, Round dir, long prec) {
    if (b.is_zero()) throw std::domain_error("DFloat: division by zero");
    if (a.is_zero()) return zero();
    long shift = prec + 2 + bit_length(b.m_) - bit_length(a.m_);
    if (shift < 0) shift = 0;
    Int scaled = a.m_ << unsigned(shift);
    Int q = scaled / b.m_;
    Int rem = scaled - q * b.m_;
    if (dir == Round::Up && rem != 0) ++q;
    DFloat out(q, a.e_ - b.e_ - shift);
    out.normalize(dir, prec);
    return out;
  }

  static DFloat pow_int(const DFloat& a, Int n, Round dir, long prec) {
    if (n < 0) throw std::invalid_argument("DFloat::pow_int: negative power");
    DFloat acc = one();
    DFloat base = a;
    while (n > 0) {
      if ((n & 1) != 0) acc = mul(acc, base, dir, prec);
      n >>= 1;
      if (n > 0) base = mul(base, base, dir, prec);
    }
    return acc;
  }

  double to_double() const {
    if (is_zero()) return 0.0;
    Int p = msb_pos();
    if (p > 1024) return HUGE_VAL;
    if (p < -1070) return 0.0;
    long bits = bit_length(m_);
    long keep = std::min<long>(bits, 64);
    Int top = m_ >> unsigned(bits - keep);
    double m = top.convert_to<double>();
    return std::ldexp(m, int(long(e_) + (bits - keep)));
  }

  std::string to_string() const {
    if (is_zero()) return "0";
    return m_.str() + "*2^(" + e_.str() + ")";
  }

 private:
  Int m_{0};
  Int e_{0};
};

// ln 2 enclosure via 2*atanh(1/3) = 2 * sum_{k>=0} (1/3)^(2k+1)/(2k+1)
inline std::pair<DFloat, DFloat> ln2_enclosure(long prec) {
  Rational nine_inv(1, 9);
  Rational sum = 0;
  long terms = prec / 3 + 8;
  Rational t(1, 3);
  for (long k = 0; k < terms; ++k) {
    sum += t / (2 * k + 1);
    t *= nine_inv;
  }
  Rational lo = 2 * sum;
  Rational hi = lo + t * Rational(9, 4);  // geometric tail bound
  return {DFloat::from_rational(lo, Round::Down, prec),
          DFloat::from_rational(hi, Round::Up, prec)};
}

// exp enclosure with directed rounding.  Arguments up to ~2^60 are
// supported by peeling off integer multiples of ln2; the result exponent
// is a big Int, so e^(10^11) is representable.
inline DFloat exp_dir(const DFloat& x, Round dir, long prec) {
  if (x.is_zero()) return DFloat::one();
  if (x.msb_pos() > 62)
    throw std::overflow_error("exp_dir: argument too large to certify");
  const long wp = prec + 16;  // working precision
  auto [ln2_lo, ln2_hi] = ln2_enclosure(wp + 16);
  // n <= floor(x / ln2)
  DFloat q = DFloat::div(x, ln2_hi, Round::Down, wp);
  Int n = 0;
  if (!q.is_zero()) {
    const Int& e = q.exponent();
    if (e >= 0)
      n = q.mantissa() << unsigned(long(e));
    else if (Int(-e) < bit_length(q.mantissa()))
      n = q.mantissa() >> unsigned(long(-e));
  }
  // r bound of x - n*ln2 in direction dir; true r in [0, 2*ln2)
  DFloat a = x;
  a.normalize(dir, wp);
  DFloat b = DFloat::mul(DFloat::from_int(n),
                         (dir == Round::Up) ? ln2_lo : ln2_hi,
                         (dir == Round::Up) ? Round::Down : Round::Up, wp);
  DFloat r = DFloat::zero();
  if (DFloat::cmp(a, b) > 0) {
    Int e0 = (a.exponent() < b.exponent()) ? a.exponent() : b.exponent();
    long sa = long(a.exponent() - e0), sb = long(b.exponent() - e0);
    Int mm = (a.mantissa() << unsigned(sa)) - (b.mantissa() << unsigned(sb));
    r = DFloat(mm, e0);
    r.normalize(dir, wp);
  }
  // series for e^r, r < 1.4
  DFloat acc = DFloat::one();
  DFloat term = DFloat::one();
  for (long j = 1; j <= wp; ++j) {
    term = DFloat::mul(term, r, dir, wp);
    term = DFloat::div(term, DFloat::from_int(Int(j)), dir, wp);
    acc = DFloat::add(acc, term, dir, wp);
    if (term.is_zero() || term.msb_pos() < acc.msb_pos() - (prec + 8)) break;
  }
  if (dir == Round::Up) {
    // remaining tail < term * (r/2)/(1-r/2) < 4*term for r < 1.4
    DFloat tail = DFloat::mul(term, DFloat::from_int(Int(4)), Round::Up, wp);
    acc = DFloat::add(acc, tail, Round::Up, wp);
  }
  DFloat out(acc.mantissa(), acc.exponent() + n);
  out.normalize(dir, prec);
  return out;
}

// Certified enclosure of a nonnegative quantity.
struct PosInterval {
  DFloat lo{};  // valid only when lo_known
  DFloat hi{};
  bool lo_known{false};
};

enum class Cert { True, False, Indeterminate };

// certified decision of "a < b"
inline Cert cert_less(const PosInterval& a, const PosInterval& b) {
  if (b.lo_known && DFloat::cmp(a.hi, b.lo) < 0) return Cert::True;
  if (a.lo_known && DFloat::cmp(b.hi, a.lo) <= 0) return Cert::False;
  return Cert::Indeterminate;
}

inline Rational rational_from_double(double d) {
  if (!std::isfinite(d)) throw std::invalid_argument("rational_from_double");
  if (d == 0.0) return Rational(0);
  bool neg = d < 0;
  if (neg) d = -d;
  int e = 0;
  double m = std::frexp(d, &e);
  long long mi = (long long)std::ldexp(m, 53);
  Rational r(mi);
  int sh = e - 53;
  if (sh >= 0)
    r *= Rational(Int(1) << unsigned(sh));
  else
    r /= Rational(Int(1) << unsigned(-sh));
  return neg ? -r : r;
}

inline double rational_to_double(const Rational& r) {
  return r.convert_to<double>();
}

}  // namespace nct
