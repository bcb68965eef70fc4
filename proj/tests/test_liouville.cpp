#include <catch2/catch_amalgamated.hpp>

#include "nct/liouville.hpp"

using namespace nct;

TEST_CASE("tower partial sums are exact") {
  auto t1 = LiouvilleApprox::tower(1);
  REQUIRE(t1.size() == 1);
  REQUIRE(t1.entries()[0].frac == Rational(1, 2));

  auto t2 = LiouvilleApprox::tower(2);
  REQUIRE(t2.size() == 2);
  REQUIRE(t2.entries()[1].frac == Rational(129, 256));
  REQUIRE(t2.entries()[1].q == 256);
  REQUIRE(t2.value_approx() == Catch::Approx(129.0 / 256.0).margin(1e-15));

  auto t3 = LiouvilleApprox::tower(3);
  REQUIRE(t3.size() == 3);
  REQUIRE(t3.entries()[2].q_symbolic);
  REQUIRE(t3.entries()[2].log2_q == Int(3) * (Int(1) << 256));

  REQUIRE_THROWS_AS(LiouvilleApprox::tower(4), overflow_guard_error);
}

TEST_CASE("tower tail bounds match the stated rate for n = 1, 2") {
  // |alpha - s_n| < 1/(2^n)^(2^(q_n)) checked in exact exponent arithmetic
  auto t = LiouvilleApprox::tower(2);
  // n = 1: bound 2^(-4); stored hi is 2/256 = 2^(-7)
  XVal bound1 = XVal::dyadic(DFloat::pow2(Int(-4)));
  REQUIRE(XVal::cmp(t.entries()[0].err.hi, bound1) < 0);
  // n = 2: bound 2^(-2*2^256); stored hi is 2^(1 - 3*2^256)
  XVal bound2 = XVal::dyadic(DFloat::pow2(-(Int(1) << 257)));
  REQUIRE(XVal::cmp(t.entries()[1].err.hi, bound2) < 0);
}

TEST_CASE("check_L on the tower number") {
  auto t = LiouvilleApprox::tower(2);
  auto r = check_L(t, 5, 2);
  REQUIRE(r.satisfied);
  REQUIRE(r.witnesses == std::vector<std::size_t>{0, 1});

  // N = 1 accepts every stored convergent-like approximant
  auto r1 = check_L(t, 1, 2);
  REQUIRE(r1.satisfied);

  REQUIRE_THROWS_AS(check_L(t, 5, 3), insufficient_approximants);
}

TEST_CASE("check_L rejects the golden ratio at N = 3") {
  auto g = golden_ratio_convergents(10);
  auto r = check_L(g, 3, 5);
  REQUIRE_FALSE(r.satisfied);
  REQUIRE(r.first_failing.has_value());
  // the only accidental witness is 1/2 (|phi^-1 - 1/2| = 0.118 < 1/8)
  REQUIRE(r.witnesses.size() <= 1);
  // only the final convergent (which has no successor to certify a lower
  // error bound) may be undecided
  REQUIRE(r.indeterminate.size() <= 1);
  if (!r.indeterminate.empty()) REQUIRE(r.indeterminate[0] == g.size() - 1);

  // every convergent satisfies the N = 1 rate
  auto r1 = check_L(g, 1, 5);
  REQUIRE(r1.satisfied);
  REQUIRE(r1.witnesses.size() == 5);
}

TEST_CASE("check_UL accepts the tower number via s_2 and rejects the golden ratio") {
  auto t = LiouvilleApprox::tower(2);
  auto r = check_UL(t, 1, Rational(2), Rational(1, 8), 1);
  REQUIRE(r.satisfied);
  REQUIRE(r.witnesses == std::vector<std::size_t>{1});  // s_2, not s_1

  auto g = golden_ratio_convergents(10);
  auto rg = check_UL(g, 1, Rational(2), Rational(1, 8), 1);
  REQUIRE_FALSE(rg.satisfied);
  REQUIRE(rg.witnesses.empty());
  REQUIRE(rg.indeterminate.size() <= 1);
  if (!rg.indeterminate.empty()) REQUIRE(rg.indeterminate[0] == g.size() - 1);
}

TEST_CASE("monotone right-hand side: large q makes any approximant a witness") {
  // eps = 1, any N: once the stored error bound is below the RHS the
  // witness is accepted; s_2's bound 2^(1-3*2^256) beats everything here
  auto t = LiouvilleApprox::tower(2);
  auto r = check_UL(t, 2, Rational(3, 2), Rational(1), 1);
  REQUIRE(r.satisfied);
}

TEST_CASE("UL implies L on the same witnesses (q >= 2, eps <= 1)") {
  auto t = LiouvilleApprox::tower(2);
  for (long N : {1L, 2L, 3L}) {
    auto ul = check_UL(t, N, Rational(2), Rational(1), 1);
    if (!ul.satisfied) continue;
    auto l = check_L(t, N, 1);
    REQUIRE(l.satisfied);
    // every UL witness satisfies the (L) inequality pointwise
    for (auto w : ul.witnesses) {
      const auto& e = t.entries()[w];
      auto [rlo, rhi] = nct::detail::rhs_L(e, N);
      (void)rhi;
      REQUIRE(XVal::cmp(e.err.hi, rlo) < 0);
    }
  }
}

TEST_CASE("convergent-list validation") {
  // non-neighboring fractions are rejected
  std::vector<std::pair<Int, Int>> bad = {{1, 2}, {3, 8}};
  REQUIRE_THROWS_AS(LiouvilleApprox::from_convergents(bad), std::invalid_argument);
  std::vector<std::pair<Int, Int>> notreduced = {{2, 4}, {2, 3}};
  REQUIRE_THROWS_AS(LiouvilleApprox::from_convergents(notreduced), std::invalid_argument);
}
