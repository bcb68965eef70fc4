#include <catch2/catch_amalgamated.hpp>

#include "nct/measure.hpp"
#include "nct/weyl.hpp"

using namespace nct;

namespace {

const Rational kAlpha(129, 512);  // deformation used throughout

WeylElement random_element(Rng& rng, long mmax, long nmax, int terms) {
  WeylElement f(kAlpha);
  for (int t = 0; t < terms; ++t)
    f.add(rng.integer(-mmax, mmax), rng.integer(-nmax, nmax), rng.cgauss());
  return f;
}

}  // namespace

TEST_CASE("twisted convolution: identity, single phases, commutation form") {
  auto f = WeylElement::delta(kAlpha, 3, -2, {0.5, 1.25});
  auto id = WeylElement::identity(kAlpha);
  SECTION("delta_00 is the unit") {
    auto c = twisted_convolution(f, id);
    auto c2 = twisted_convolution(id, f);
    REQUIRE(c.at(3, -2) == f.at(3, -2));
    REQUIRE(c2.at(3, -2) == f.at(3, -2));
    REQUIRE(c.support_size() == 1);
  }
  SECTION("delta_(1,0) * delta_(0,1) = e^{2 pi i alpha} delta_(1,1)") {
    auto a = WeylElement::delta(kAlpha, 1, 0);
    auto b = WeylElement::delta(kAlpha, 0, 1);
    auto c = twisted_convolution(a, b);
    REQUIRE(c.support_size() == 1);
    cplx expect = unit_phase(rational_to_double(kAlpha));
    REQUIRE(std::abs(c.at(1, 1) - expect) < 1e-15);
  }
  SECTION("generator relation on deltas") {
    // W(a) W(A) = W(a + A) e^{2 pi i alpha sigma(a, A)}
    long m = 2, n = -1, M = -3, N = 2;
    auto a = WeylElement::delta(kAlpha, m, n);
    auto A = WeylElement::delta(kAlpha, M, N);
    auto c = twisted_convolution(a, A);
    long sig = m * N - M * n;
    cplx expect = alpha_phase(kAlpha, sig);
    REQUIRE(std::abs(c.at(m + M, n + N) - expect) < 1e-15);
  }
}

TEST_CASE("star is an involution and an anti-homomorphism") {
  Rng rng(7);
  auto f = random_element(rng, 3, 2, 6);
  auto g = random_element(rng, 3, 2, 6);
  SECTION("star(star(f)) = f exactly") {
    auto ff = star(star(f));
    REQUIRE(ff.terms() == f.terms());
  }
  SECTION("star(delta_00) = delta_00") {
    auto s = star(WeylElement::identity(kAlpha));
    REQUIRE(s.at(0, 0) == cplx(1.0, 0.0));
  }
  SECTION("star(f g) = star(g) star(f)") {
    auto lhs = star(twisted_convolution(f, g));
    auto rhs = twisted_convolution(star(g), star(f));
    auto diff = sub(lhs, rhs);
    REQUIRE(diff.norm1() < 1e-13 * (1.0 + f.norm1() * g.norm1()));
  }
}

TEST_CASE("associativity on random triples") {
  Rng rng(11);
  for (int rep = 0; rep < 5; ++rep) {
    auto f = random_element(rng, 2, 2, 5);
    auto g = random_element(rng, 2, 2, 5);
    auto h = random_element(rng, 2, 2, 5);
    auto lhs = twisted_convolution(twisted_convolution(f, g), h);
    auto rhs = twisted_convolution(f, twisted_convolution(g, h));
    REQUIRE(sub(lhs, rhs).norm1() <
            1e-12 * (1.0 + f.norm1() * g.norm1() * h.norm1()));
  }
}

TEST_CASE("trace reads the origin and is tracial") {
  REQUIRE(trace(WeylElement::identity(kAlpha)) == cplx(1.0, 0.0));
  REQUIRE(trace(WeylElement::delta(kAlpha, 1, 0)) == cplx(0.0, 0.0));
  Rng rng(13);
  for (int rep = 0; rep < 5; ++rep) {
    auto f = random_element(rng, 3, 2, 6);
    auto g = random_element(rng, 3, 2, 6);
    cplx a = trace(twisted_convolution(f, g));
    cplx b = trace(twisted_convolution(g, f));
    REQUIRE(std::abs(a - b) < 1e-12 * (1.0 + f.norm1() * g.norm1()));
  }
}

TEST_CASE("mismatched deformation parameters are rejected") {
  auto f = WeylElement::identity(kAlpha);
  auto g = WeylElement::identity(Rational(1, 3));
  REQUIRE_THROWS_AS(twisted_convolution(f, g), alpha_mismatch_error);
}

TEST_CASE("characteristic sequence of measures") {
  SECTION("Lebesgue") {
    auto mu = CircleMeasure::lebesgue();
    REQUIRE(mu.chi(0) == cplx(1.0, 0.0));
    REQUIRE(mu.chi(5) == cplx(0.0, 0.0));
  }
  SECTION("pushforward: normalization, modulus and Hermitian symmetry") {
    CircleDiffeo g(0.21, {0.05, -0.02}, {0.01, 0.03}, 1 << 12);
    auto mu = CircleMeasure::pushforward(g);
    REQUIRE(mu.chi(0) == cplx(1.0, 0.0));
    for (long m : {1L, 2L, 7L}) {
      REQUIRE(std::abs(mu.chi(m)) <= 1.0 + 1e-12);
      REQUIRE(std::abs(mu.chi(-m) - std::conj(mu.chi(m))) < 1e-15);
    }
  }
}

TEST_CASE("state omega_mu") {
  SECTION("Lebesgue gives the trace") {
    Rng rng(17);
    auto mu = CircleMeasure::lebesgue();
    for (int rep = 0; rep < 5; ++rep) {
      auto f = random_element(rng, 3, 2, 6);
      REQUIRE(std::abs(state_omega_mu(f, mu) - trace(f)) < 1e-14);
    }
  }
  SECTION("omega(delta_(m,0)) = mu_hat(m), omega(1) = 1") {
    CircleDiffeo g(0.37, {0.04}, {0.02, -0.01}, 1 << 12);
    auto mu = CircleMeasure::pushforward(g);
    REQUIRE(std::abs(state_omega_mu(WeylElement::identity(kAlpha), mu) -
                     cplx(1.0, 0.0)) < 1e-14);
    auto d3 = WeylElement::delta(kAlpha, 3, 0);
    REQUIRE(std::abs(state_omega_mu(d3, mu) - mu.chi(3)) < 1e-15);
  }
  SECTION("quadratic form matches the integral form") {
    CircleDiffeo g(0.37, {0.04}, {0.02, -0.01}, 1 << 12);
    auto mu = CircleMeasure::pushforward(g);
    Rng rng(19);
    for (int rep = 0; rep < 8; ++rep) {
      auto f = random_element(rng, 4, 3, 7);
      cplx lhs = state_omega_mu(twisted_convolution(star(f), f), mu);
      double rhs = omega_mu_integral_form(f, mu);
      REQUIRE(std::abs(lhs.imag()) < 1e-10 * (1.0 + f.norm1() * f.norm1()));
      REQUIRE(std::abs(lhs.real() - rhs) < 1e-8 * (1.0 + f.norm1() * f.norm1()));
    }
  }
}

TEST_CASE("Gram positivity") {
  SECTION("delta basis under Lebesgue is the identity matrix") {
    std::vector<WeylElement> basis;
    for (long m = 0; m < 3; ++m)
      for (long n = 0; n < 2; ++n) basis.push_back(WeylElement::delta(kAlpha, m, n));
    auto rep = gram_positivity_check(basis, CircleMeasure::lebesgue());
    REQUIRE(rep.hermiticity_defect < 1e-13);
    REQUIRE((rep.gram - Eigen::MatrixXcd::Identity(6, 6)).norm() < 1e-12);
    REQUIRE(rep.min_eigenvalue == Catch::Approx(1.0).margin(1e-12));
  }
  SECTION("random basis, pushforward measure: min eigenvalue >= -1e-8") {
    CircleDiffeo g(0.11, {0.06, 0.01}, {-0.03, 0.02}, 1 << 12);
    auto mu = CircleMeasure::pushforward(g);
    Rng rng(23);
    std::vector<WeylElement> basis;
    for (int i = 0; i < 6; ++i) basis.push_back(random_element(rng, 3, 2, 4));
    auto rep = gram_positivity_check(basis, mu);
    REQUIRE(rep.min_eigenvalue >= -1e-8 * (1.0 + rep.gram.norm()));
  }
  SECTION("repeated element makes the Gram singular") {
    auto f = WeylElement::delta(kAlpha, 1, 1);
    std::vector<WeylElement> basis = {f, f};
    auto rep = gram_positivity_check(basis, CircleMeasure::lebesgue());
    REQUIRE(std::abs(rep.min_eigenvalue) < 1e-12);
  }
}

TEST_CASE("faithfulness probe") {
  SECTION("Lebesgue: no witness") {
    auto w = faithfulness_probe(CircleMeasure::lebesgue(), kAlpha, 0.5, 0.1);
    REQUIRE_FALSE(w.has_value());
  }
  SECTION("zero-length gap: no witness") {
    CircleDiffeo g(0.0, {0.05}, {0.0}, 1 << 12);
    auto w = faithfulness_probe(CircleMeasure::pushforward(g), kAlpha, 0.5, 0.0);
    REQUIRE_FALSE(w.has_value());
  }
  SECTION("steep concentration yields a small-omega witness") {
    // pushforward piles up near angle 0; the arc at 1/2 is effectively
    // unsupported (mass ~ width / sqrt(s))
    auto steep = concentrating_diffeo(8.0e6, 0.2, 1 << 16);
    auto mu = CircleMeasure::pushforward(steep, CircleMeasure::Route::Density);
    auto w = faithfulness_probe(mu, kAlpha, 0.5, 0.004);
    REQUIRE(w.has_value());
    REQUIRE(w->omega_value < 1e-6);
    REQUIRE(w->omega_value > -1e-10);
  }
}

TEST_CASE("transverse state") {
  std::map<long, cplx> nu;  // characteristic sequence of some measure
  CircleDiffeo g(0.0, {0.07}, {0.02}, 1 << 12);
  auto numeas = CircleMeasure::pushforward(g);
  for (long m = -8; m <= 8; ++m) nu[m] = numeas.chi(m);

  SECTION("normalization and the Kronecker factor") {
    REQUIRE(std::abs(state_transverse(WeylElement::identity(kAlpha), nu) -
                     cplx(1.0, 0.0)) < 1e-14);
    REQUIRE(std::abs(state_transverse(WeylElement::delta(kAlpha, 2, 1), nu)) <
            1e-15);
    auto d = WeylElement::delta(kAlpha, 2, -2);
    cplx expect = alpha_phase(kAlpha, 4) * nu[2];
    REQUIRE(std::abs(state_transverse(d, nu) - expect) < 1e-14);
  }
  SECTION("Gram positivity over a random basis") {
    Rng rng(29);
    std::vector<WeylElement> basis;
    for (int i = 0; i < 5; ++i) basis.push_back(random_element(rng, 3, 3, 4));
    double mineig = transverse_gram_min_eig(basis, nu);
    REQUIRE(mineig >= -1e-8);
  }
}
