#include <catch2/catch_amalgamated.hpp>

#include "nct/afk.hpp"
#include "nct/dirac.hpp"
#include "nct/measure.hpp"
#include "nct/modular.hpp"

using namespace nct;

namespace {

// the low-frequency staged build used for the operator checks: all stages
// consume the approximant 1/2 (their perturbations then commute with
// R_{1/2}), while the final rotation is the much better 129/256
const AfkBuild& gns_build() {
  static AfkBuild b = [] {
    auto alpha = LiouvilleApprox::tower(2);
    std::vector<AfkStageParams> st = {
        {Int(2), 0.040, 1}, {Int(2), 0.015, 2}, {Int(2), 0.008, 3}, {Int(2), 0.005, 4}};
    AfkOptions o;
    o.mode = "o_n";
    o.C1 = 1.0;
    o.grid = 1 << 12;
    o.final_q = Int(256);
    return afk_build(alpha, st, o);
  }();
  return b;
}

const ModularData& gns_md() {
  static ModularData md = [] {
    const auto& b = gns_build();
    CircleDiffeo T = square_root_conjugated(b.H, rational_to_double(b.final_rotation));
    Rational alpha = b.final_rotation / 2;
    return ModularData(T, b.H, alpha, 40);
  }();
  return md;
}

WeylElement random_band_limited(Rng& rng, const Rational& alpha, long mmax, long nmax,
                                int terms) {
  WeylElement f(alpha);
  for (int t = 0; t < terms; ++t)
    f.add(rng.integer(-mmax, mmax), rng.integer(-nmax, nmax), rng.cgauss());
  return f;
}

}  // namespace

TEST_CASE("represent: identity and diagonal multiplication structure") {
  const auto& md = gns_md();
  Truncation tr(4, 16, 1 << 12);
  SECTION("delta_00 represents as the identity") {
    auto r = represent(WeylElement::identity(md.alpha()), md, tr);
    auto diff = r.op.subtract(block_identity(tr));
    REQUIRE(diff.op_norm() < 1e-12);
  }
  SECTION("one-step shift matches the represented generator") {
    auto h1 = WeylElement::delta(md.alpha(), 0, 1);
    auto r = represent(h1, md, tr);
    auto diff = r.op.subtract(shift_lambda(1, tr));
    REQUIRE(diff.op_norm() < 1e-12);
  }
  SECTION("n = 0 slice gives block-diagonal multiplication operators") {
    WeylElement f(md.alpha());
    f.set(1, 0, cplx(0.4, 0.1));
    f.set(-2, 0, cplx(0.0, -0.3));
    auto r = represent(f, md, tr);
    REQUIRE(r.op.band_indices() == std::vector<int>{0});
    // block n equals the Toeplitz compression of fcheck o h^-1 o T^{2n}
    auto s = composed_slice_samples(f, 0, 4, md);
    Matrix expect = toeplitz_compression(s, tr.M);
    REQUIRE((r.op.block(0, 2) - expect).norm() < 1e-13);
  }
}

TEST_CASE("represent is multiplicative and star-compatible up to truncation") {
  const auto& md = gns_md();
  Truncation tr(5, 64, 1 << 12);
  Rng rng(101);
  auto f = random_band_limited(rng, md.alpha(), 6, 2, 6);
  auto g = random_band_limited(rng, md.alpha(), 6, 2, 6);
  double scale = std::max(1.0, f.norm1() * g.norm1());
  REQUIRE(multiplicativity_residual(f, g, md, tr) < 1e-6 * scale);
  REQUIRE(star_compatibility_residual(f, md, tr) < 1e-8 * std::max(1.0, f.norm1()));
}

TEST_CASE("GNS vector state matches omega_mu") {
  const auto& md = gns_md();
  // mu is the pushforward of Lebesgue under h^{-1}
  auto mu = CircleMeasure::pushforward(inverse(md.conjugator()));
  Rng rng(103);
  for (int rep = 0; rep < 6; ++rep) {
    auto f = random_band_limited(rng, md.alpha(), 5, 3, 6);
    cplx lhs = gns_vector_state(f, md);
    cplx rhs = state_omega_mu(f, mu);
    REQUIRE(std::abs(lhs - rhs) < 1e-8 * (1.0 + f.norm1()));
  }
}

TEST_CASE("shift unitarity on interior blocks") {
  Truncation tr(4, 8, 1 << 12);
  auto lam = shift_lambda(1, tr);
  auto prod = lam.multiply(lam.adjoint());
  for (int n = -tr.N + 1; n <= tr.N; ++n)
    REQUIRE((prod.block(0, n) - Matrix::Identity(tr.dim(), tr.dim())).norm() < 1e-14);
  REQUIRE_FALSE(shift_lambda(0, tr).subtract(block_identity(tr)).op_norm() > 1e-14);
}

TEST_CASE("modular delta") {
  SECTION("rotation: trivial density for every block") {
    auto md = ModularData::from_rotation(Rational(1, 4), 16);
    Truncation tr(4, 8, 1 << 12);
    for (int n : {-3, 0, 2}) {
      auto rep = modular_delta(md, n, tr);
      for (double v : rep.delta) REQUIRE(v == Catch::Approx(1.0).margin(1e-12));
      REQUIRE(rep.condition == Catch::Approx(1.0).margin(1e-10));
    }
  }
  SECTION("delta_0 is identically one") {
    auto rep = modular_delta(gns_md(), 0, Truncation(4, 8, 1 << 12));
    for (double v : rep.delta) REQUIRE(v == 1.0);
  }
  SECTION("range bounded by the growth sequence of T") {
    const auto& md = gns_md();
    auto gt = growth_sequence(md.T(), 12);
    for (int n : {1, 3, 6}) {
      auto [lo, hi] = md.delta_range(n);
      REQUIRE(hi <= gt.gamma(2 * n) * (1.0 + 1e-9));
      REQUIRE(lo >= 1.0 / gt.gamma(2 * n) * (1.0 - 1e-9));
    }
  }
}

TEST_CASE("Tomita relation residual") {
  Truncation tr(4, 48, 1 << 12);
  SECTION("tracial case: rotation T, residual at rounding level") {
    auto md = ModularData::from_rotation(Rational(129, 512), 24);
    Rng rng(107);
    auto f = random_band_limited(rng, md.alpha(), 6, 3, 8);
    REQUIRE(tomita_check(f, md, tr) < 1e-8);
    REQUIRE(tomita_check_explicit(f, md, tr) < 1e-8);
  }
  SECTION("f = delta_00 has residual 0") {
    REQUIRE(tomita_check(WeylElement::identity(gns_md().alpha()), gns_md(), tr) <
            1e-14);
  }
  SECTION("staged-build T at M = 48") {
    const auto& md = gns_md();
    Rng rng(109);
    double worst = 0.0;
    for (int rep = 0; rep < 3; ++rep) {
      auto f = random_band_limited(rng, md.alpha(), 5, 3, 7);
      worst = std::max(worst, tomita_check(f, md, tr));
      worst = std::max(worst, tomita_check_explicit(f, md, tr));
    }
    REQUIRE(worst < 1e-5);
  }
  SECTION("residual decreases as M grows") {
    const auto& md = gns_md();
    Rng rng(109);
    auto f = random_band_limited(rng, md.alpha(), 5, 3, 7);
    double r16 = tomita_check(f, md, Truncation(4, 16, 1 << 12));
    double r64 = tomita_check(f, md, Truncation(4, 64, 1 << 12));
    REQUIRE(r64 < r16 + 1e-12);
  }
}

TEST_CASE("crossed-product identity") {
  Truncation tr(4, 16, 1 << 12);
  SECTION("constant H: residual 0") {
    std::vector<cplx> H = {cplx(2.0, 0.5)};
    REQUIRE(crossed_product_check(H, 0, gns_md(), tr) < 1e-14);
  }
  SECTION("H(z) = z with rotation T") {
    auto md = ModularData::from_rotation(Rational(129, 512), 24);
    std::vector<cplx> H = {cplx(0, 0), cplx(0, 0), cplx(1.0, 0.0)};  // z^1
    REQUIRE(crossed_product_check(H, 1, md, tr) < 1e-10);
  }
  SECTION("random band-limited H with staged T") {
    Rng rng(113);
    long deg = 4;
    std::vector<cplx> H(std::size_t(2 * deg + 1));
    for (auto& c : H) c = rng.cgauss();
    REQUIRE(crossed_product_check(H, deg, gns_md(), tr) < 1e-8);
  }
}

TEST_CASE("modular spectrum report") {
  Truncation tr(4, 8, 1 << 12);
  SECTION("rotation: the single point 1") {
    auto md = ModularData::from_rotation(Rational(1, 3), 16);
    auto rep = delta_spectrum_report(md, tr);
    REQUIRE(rep.intervals.size() == 1);
    REQUIRE(rep.intervals[0].first == Catch::Approx(1.0).margin(1e-10));
    REQUIRE(rep.intervals[0].second == Catch::Approx(1.0).margin(1e-10));
  }
  SECTION("symmetry under x -> 1/x") {
    auto rep = delta_spectrum_report(gns_md(), tr);
    for (const auto& [lo, hi] : rep.intervals) {
      // the reflected interval [1/hi, 1/lo] must be covered by the union
      bool covered = false;
      for (const auto& [l2, h2] : rep.intervals)
        covered |= (l2 <= 1.0 / hi + 1e-9 && 1.0 / lo <= h2 + 1e-9);
      REQUIRE(covered);
    }
  }
}

TEST_CASE("J is an isometric involution on the truncated space") {
  const auto& md = gns_md();
  Truncation tr(3, 32, 1 << 12);
  Rng rng(127);
  BlockVector x(tr.N, tr.M);
  for (auto& c : x.comp)
    for (int i = 0; i < c.size(); ++i) {
      // keep the test vector band-limited well inside M so that the
      // composition with T^{2n} stays resolvable after one application
      int m = i - tr.M;
      c(i) = (std::abs(m) <= tr.M / 4)
                 ? cplx(rng.gauss(), rng.gauss()) / (1.0 + m * m)
                 : cplx(0.0, 0.0);
    }
  auto rep = j_involution_check(x, md, tr);
  REQUIRE(rep.isometry_defect < 1e-8);
  REQUIRE(rep.involution_defect < 1e-6);
}

TEST_CASE("cyclicity proxy: representation vectors span the truncation") {
  auto md = ModularData::from_rotation(Rational(129, 512), 16);
  Truncation tr(3, 8, 1 << 12);
  REQUIRE(cyclicity_min_singular(md, tr) > 0.9);
  REQUIRE(cyclicity_min_singular(gns_md(), tr) > 1e-3);
}

TEST_CASE("rotated-picture equivalence through the diagonal phase") {
  // two block formulas differing by composition with rotations are
  // conjugate via V = diag_n C_{R^n}; checked as matrices
  auto md = ModularData::from_rotation(Rational(129, 512), 16);
  double alpha = rational_to_double(md.alpha());
  Truncation tr(3, 10, 1 << 12);
  Rng rng(131);
  auto f = random_band_limited(rng, md.alpha(), 4, 2, 5);
  const int d = tr.dim();
  auto rot_phase = [&](double a) {
    Matrix C = Matrix::Zero(d, d);
    for (int m = -tr.M; m <= tr.M; ++m) C(m + tr.M, m + tr.M) = unit_phase(m * a);
    return C;
  };
  auto toep_of_slice = [&](long l, double shift) {
    const int g = 1 << 12;
    std::vector<cplx> s(std::size_t(g), cplx(0.0, 0.0));
    for (int j = 0; j < g; ++j)
      s[std::size_t(j)] = f.slice_eval(l, frac(double(j) / g + shift));
    return toeplitz_compression(s, tr.M);
  };
  double worst = 0.0;
  for (long l : f.slice_indices()) {
    int li = int(l);
    if (std::labs(l) > 2 * tr.N) continue;
    for (int n = std::max(-tr.N, -tr.N + li); n <= std::min(tr.N, tr.N + li); ++n) {
      // picture A: Toep(f^(l) o R^{n-l}) C_{R^{-l}}
      Matrix A = toep_of_slice(l, double(n - li) * alpha) * rot_phase(-double(l) * alpha);
      // picture B: Toep(f^(l) o R^{2n-l})
      Matrix B = toep_of_slice(l, double(2 * n - li) * alpha);
      Matrix lhs = rot_phase(double(n) * alpha) * A *
                   rot_phase(-double(n - li) * alpha);
      worst = std::max(worst, (lhs - B).norm());
    }
  }
  REQUIRE(worst < 1e-8);
}
