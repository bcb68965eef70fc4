#include <catch2/catch_amalgamated.hpp>

#include "nct/afk.hpp"

using namespace nct;

namespace {

std::vector<AfkStageParams> mini_stages() {
  return {{Int(2), 0.12, 1}, {Int(256), 0.05, 1}, {Int(256), 0.04, 2}};
}

AfkOptions mini_opts() {
  AfkOptions o;
  o.mode = "o_n";
  o.C1 = 1.0;
  o.grid = 1 << 13;
  return o;
}

const AfkBuild& mini_build() {
  static AfkBuild b = afk_build(LiouvilleApprox::tower(2), mini_stages(), mini_opts());
  return b;
}

}  // namespace

TEST_CASE("make_commuting_h") {
  SECTION("zero amplitude is the identity") {
    auto h = make_commuting_h(Int(4), 0.0, 3);
    REQUIRE(h.is_rotation(0.0));
    REQUIRE(h.translation() == 0.0);
  }
  SECTION("structural commutation with R_{p/q}") {
    auto h = make_commuting_h(Int(8), 0.3, 2, 1 << 12);
    double a = 5.0 / 8.0;
    double worst = 0.0;
    for (int j = 0; j < h.grid(); ++j) {
      double x = double(j) / h.grid();
      double d = h.value(x + a) - (h.value(x) + a);
      worst = std::max(worst, std::abs(d - std::round(d)));
    }
    REQUIRE(worst < 1e-12);
  }
  SECTION("sup|Dh - 1| equals the amplitude") {
    auto h = make_commuting_h(Int(8), 0.3, 2, 1 << 12);
    double sup = refined_grid_sup([&](double x) { return h.deriv(x) - 1.0; }, h.grid());
    REQUIRE(sup == Catch::Approx(0.3).margin(1e-10));
  }
  SECTION("amplitude >= 1 is rejected") {
    REQUIRE_THROWS_AS(make_commuting_h(Int(2), 1.0, 1), monotonicity_error);
  }
}

TEST_CASE("afk_build on the tower number, o_n mode") {
  const auto& b = mini_build();
  REQUIRE(b.stages.size() == 3);
  REQUIRE(b.final_rotation == Rational(129, 256));
  REQUIRE(b.f_cache.size() == 4);

  SECTION("reconstruction identity f_k = H_k R H_k^{-1}") {
    REQUIRE(reconstruction_residual(b) < 1e-9);
  }

  SECTION("contraction chain d1(f_k^n, f_{k-1}^n) <= |n|/2^k") {
    auto rows = verify_contraction_chain(b, 16);
    for (const auto& r : rows) REQUIRE(r.d1 <= r.bound + 1e-9);
  }

  SECTION("telescoping bound") {
    auto rows = verify_telescoping(b, 8);
    for (const auto& r : rows) REQUIRE(r.lhs <= r.rhs + 1e-8);
  }
}

TEST_CASE("afk_build with zero amplitudes gives the pure rotation") {
  auto alpha = LiouvilleApprox::tower(2);
  std::vector<AfkStageParams> st = {{Int(2), 0.0, 1}, {Int(256), 0.0, 1}};
  auto b = afk_build(alpha, st, mini_opts());
  REQUIRE(b.f.is_rotation(1e-13));
  REQUIRE(b.f.translation() == Catch::Approx(129.0 / 256.0).margin(1e-13));
}

TEST_CASE("contraction gate rejects an over-aggressive stage") {
  auto alpha = LiouvilleApprox::tower(2);
  // amplitude 0.9 at q=2 makes |||H_1|||^2 huge; with |alpha - 1/2| ~ 2^-7
  // the stage-1 budget is blown
  std::vector<AfkStageParams> st = {{Int(2), 0.9, 1}};
  REQUIRE_THROWS_AS(afk_build(alpha, st, mini_opts()), contraction_error);
}

TEST_CASE("afk_build o_log_n mode with surrogate m-sequence") {
  auto alpha = LiouvilleApprox::tower(2);
  std::vector<AfkStageParams> st = {{Int(2), 0.05, 1}, {Int(256), 2e-4, 1}};
  AfkOptions o;
  o.mode = "o_log_n";
  o.C1 = 1.0;
  o.grid = 1 << 13;
  o.mk = {{1.30, 0.0}, {1.40, 0.0}};
  auto b = afk_build(alpha, st, o);
  REQUIRE(b.m_sequence.size() == 2);
  double m2 = b.m_sequence[1];
  REQUIRE(m2 <= 256.0);

  // ||Df^n|| <= sqrt(ln n) + 1 for m_2 <= n <= 64
  auto t = growth_sequence(b.f, 64);
  for (long n = long(std::ceil(m2)); n <= 64; ++n) {
    REQUIRE(t.gamma(n) <= std::sqrt(std::log(double(n))) + 1.0 + 1e-9);
  }
}

TEST_CASE("growth_asymptotics_fit") {
  SECTION("rotation: ratios are 1/n, strictly decaying") {
    auto t = growth_sequence(CircleDiffeo::rotation(0.377), 64);
    auto fit = growth_asymptotics_fit(t, "o_n");
    REQUIRE(fit.pass);
    REQUIRE(fit.max_ratio == Catch::Approx(1.0).margin(1e-9));
  }
  SECTION("AFK build in o_n mode passes at nmax = 128") {
    auto t = growth_sequence(mini_build().f, 128);
    auto fit = growth_asymptotics_fit(t, "o_n");
    REQUIRE(fit.pass);
  }
}
