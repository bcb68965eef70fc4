/*
 * afk.hpp — staged construction of circle diffeomorphisms with prescribed
 * rotation number via commuting perturbations.
 *
 * The scheme: given rational approximants alpha_k = p_k/q_k of the target
 * alpha and perturbations h_k commuting with R_{alpha_k} (their periodic
 * part only uses frequencies that are multiples of q_k), form
 *
 *     H_k = h_1 o ... o h_k,       f_k = H_k o R_{alpha_{k+1}} o H_k^{-1}.
 *
 * Stage admission is gated in certified arithmetic against the quality of
 * |alpha - alpha_k|:
 *
 *   o_n mode:      2 * C1 * |||H_k|||_2^2 * |alpha - alpha_k| <= 2^-k
 *   o_log_n mode:  |alpha - alpha_k| < eps_k / (q^N' e^{(C' q^N')^2})
 *                  with eps_k = 1/(2^{k+1} C1 C(k,2)^2), N' = 2 N(k,2),
 *                  C' = C(k,2)^2, i.e. the same shape of inequality that
 *                  check_UL decides, with m_k = e^{(C(k,2)^2 q^{2N(k,2)})^2}.
 *
 * The norm |||H|||_2 is the surrogate max_j<=2 (||D^j H|| v ||D^j H^-1||);
 * the constants C1, C(k,2), N(k,2) are configuration, not derived values.
 * In o_log_n mode the builder additionally requires |||H_k|||_2^2 + 2^-k
 * <= C(k,2)^2 q^{2N(k,2)}, which is the link that makes the final
 * sqrt(log) derivative bound provable from the gates.
 */

#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "nct/circle.hpp"
#include "nct/liouville.hpp"

namespace nct {

struct AfkStageParams {
  Int q{1};              // denominator of the approximant this stage consumes
  double amplitude{0};   // sup |Dh - 1| of the commuting perturbation
  long freq_mult{1};     // h uses frequency freq_mult * q
};

struct MkConstants {
  double C_k2{1.0};
  double N_k2{0.0};
};

struct AfkOptions {
  std::string mode{"o_n"};  // "o_n" or "o_log_n"
  double C1{1.0};
  std::vector<MkConstants> mk;     // per stage, o_log_n only
  std::optional<Int> final_q;      // rotation consumed after the last stage
  int grid{1 << 12};
};

struct AfkStage {
  Rational alpha_k;
  std::size_t approx_index{0};
  CircleDiffeo h_k;
  long freq{0};                    // q * freq_mult (0 for the identity)
  double norm2_Hk{1.0};            // |||H_k|||_2
  double commutation_defect{0.0};
  std::string gate_lhs, gate_rhs;  // the certified inequality, stringified
  double m_k{0.0};                 // o_log_n only
};

struct AfkBuild {
  std::vector<AfkStage> stages;
  std::vector<CircleDiffeo> f_cache;  // f_0 .. f_K
  CircleDiffeo H;                     // H_K
  CircleDiffeo f;                     // f_K, the built diffeomorphism
  Rational final_rotation;            // alpha_{K+1}
  std::string mode;
  double C1{1.0};
  double sup_H_step{0.0};             // sup |H_K - H_{K-1}|, convergence proxy
  std::vector<double> m_sequence;     // o_log_n thresholds (m_1..m_K)
};

// Perturbation commuting with R_{p/q}: lift x + (a / (2 pi f q)) sin(2 pi f q x).
inline CircleDiffeo make_commuting_h(const Int& q, double amplitude, long freq_mult,
                                     int grid = 1 << 12) {
  if (q < 1 || freq_mult < 1) throw std::invalid_argument("make_commuting_h: q, f >= 1");
  if (!(std::abs(amplitude) < 1.0))
    throw monotonicity_error("make_commuting_h: |amplitude| must be < 1");
  long freq = long(q) * freq_mult;
  if (freq > grid / 4)
    throw std::invalid_argument(
        "make_commuting_h: frequency " + std::to_string(freq) +
        " too close to the grid Nyquist limit; raise the grid size");
  if (amplitude == 0.0) return CircleDiffeo::identity(grid);
  std::vector<double> ca(std::size_t(freq), 0.0), sa(std::size_t(freq), 0.0);
  sa[std::size_t(freq - 1)] = amplitude / (kTwoPi * double(freq));
  return CircleDiffeo(0.0, std::move(ca), std::move(sa), grid);
}

// |||H|||_2 surrogate: first and second derivatives of H and H^{-1}
inline double norm2_surrogate(const CircleDiffeo& H) {
  CircleDiffeo Hi = inverse(H);
  double s = 0.0;
  s = std::max(s, refined_grid_sup([&](double x) { return H.deriv(x); }, H.grid()));
  s = std::max(s, refined_grid_sup([&](double x) { return H.deriv2(x); }, H.grid()));
  s = std::max(s, refined_grid_sup([&](double x) { return Hi.deriv(x); }, Hi.grid()));
  s = std::max(s, refined_grid_sup([&](double x) { return Hi.deriv2(x); }, Hi.grid()));
  return s;
}

namespace detail {

inline double commutation_defect(const CircleDiffeo& h, const Rational& alpha_k) {
  double a = rational_to_double(alpha_k);
  double worst = 0.0;
  for (int j = 0; j < h.grid(); ++j) {
    double x = double(j) / h.grid();
    double d = h.value(x + a) - (h.value(x) + a);
    worst = std::max(worst, std::abs(d - std::round(d)));
  }
  return worst;
}

}  // namespace detail

inline AfkBuild afk_build(const LiouvilleApprox& alpha,
                          const std::vector<AfkStageParams>& params,
                          const AfkOptions& opt = {}) {
  if (params.empty()) throw std::invalid_argument("afk_build: no stages");
  if (opt.mode != "o_n" && opt.mode != "o_log_n")
    throw std::invalid_argument("afk_build: mode must be o_n or o_log_n");
  const bool logmode = opt.mode == "o_log_n";
  if (logmode && opt.mk.size() < params.size())
    throw std::invalid_argument("afk_build: o_log_n needs per-stage constants");

  AfkBuild out;
  out.mode = opt.mode;
  out.C1 = opt.C1;
  const Rational c1_rat = rational_from_double(opt.C1);

  CircleDiffeo H = CircleDiffeo::identity(opt.grid);
  CircleDiffeo H_prev = H;
  std::vector<Rational> alphas;  // alpha_1 .. alpha_{K+1}

  for (std::size_t k = 1; k <= params.size(); ++k) {
    const auto& sp = params[k - 1];
    auto idx = alpha.find_by_denominator(sp.q);
    if (!idx)
      throw std::invalid_argument("afk_build: no stored approximant with q = " +
                                  sp.q.str());
    const ApproxEntry& entry = alpha.entries()[*idx];

    AfkStage st;
    st.alpha_k = entry.frac;
    st.approx_index = *idx;
    st.h_k = make_commuting_h(sp.q, sp.amplitude, sp.freq_mult, opt.grid);
    st.freq = (sp.amplitude == 0.0) ? 0 : long(sp.q) * sp.freq_mult;
    st.commutation_defect = detail::commutation_defect(st.h_k, st.alpha_k);
    if (st.commutation_defect > 1e-10)
      throw contraction_error("afk_build: stage " + std::to_string(k) +
                              " perturbation fails to commute with its rotation");
    H_prev = H;
    H = compose(H, st.h_k);
    st.norm2_Hk = norm2_surrogate(H);

    // admission gate, certified against the stored error enclosure
    const Rational n2sq = rational_from_double(st.norm2_Hk) *
                          rational_from_double(st.norm2_Hk);
    if (!logmode) {
      // 2 C1 |||H_k|||^2 |alpha - alpha_k| <= 2^-k
      Rational coeff = 2 * c1_rat * n2sq;
      XVal lhs_budget = XVal::rat(Rational(1, Int(1) << unsigned(k)) / coeff);
      // require err.hi <= 2^-k / coeff exactly
      if (!(XVal::cmp(entry.err.hi, lhs_budget) <= 0)) {
        throw contraction_error(
            "afk_build: contraction gate failed at stage " + std::to_string(k) +
            ": need |alpha - alpha_k| <= " + lhs_budget.str() +
            ", certified bound is " + entry.err.hi.str());
      }
      st.gate_lhs = entry.err.hi.str();
      st.gate_rhs = lhs_budget.str();
    } else {
      const MkConstants& mc = opt.mk[k - 1];
      double q_d = sp.q.convert_to<double>();
      double c_k = mc.C_k2 * mc.C_k2 * std::pow(q_d, 2.0 * mc.N_k2);
      double mk = std::exp(c_k * c_k);
      if (!std::isfinite(mk) || mk > 1e300)
        throw overflow_guard_error("afk_build: m_k overflows; shrink C(k,2)/N(k,2)");
      st.m_k = mk;
      out.m_sequence.push_back(mk);
      // structural link making the final bound provable from the gates
      double budget = c_k - std::ldexp(1.0, -int(k));
      if (st.norm2_Hk * st.norm2_Hk > budget)
        throw contraction_error(
            "afk_build: stage " + std::to_string(k) + " norm |||H_k|||^2 = " +
            std::to_string(st.norm2_Hk * st.norm2_Hk) +
            " exceeds C(k,2)^2 q^{2N(k,2)} - 2^-k = " + std::to_string(budget));
      // UL-shaped gate: err < eps_k / (q^{N'} e^{(C' q^{N'})^2})
      Rational Cprime = rational_from_double(mc.C_k2) * rational_from_double(mc.C_k2);
      long Nprime = std::lround(2.0 * mc.N_k2);
      Rational eps_k = Rational(1, Int(1) << unsigned(k + 1)) / (c1_rat * Cprime);
      if (eps_k > 1) eps_k = 1;
      bool decided = false, ok = false;
      for (long prec = 96; prec <= 4096 && !decided; prec *= 2) {
        std::optional<std::pair<DFloat, DFloat>> rhs;
        if (Nprime >= 1) {
          rhs = detail::rhs_UL(entry, Nprime, Cprime, eps_k, prec);
        } else {
          // q^0 = 1: rhs = eps_k / e^{C'^2}
          DFloat c2_lo = DFloat::from_rational(Cprime * Cprime, Round::Down, prec);
          DFloat c2_hi = DFloat::from_rational(Cprime * Cprime, Round::Up, prec);
          DFloat den_hi = exp_dir(c2_hi, Round::Up, prec);
          DFloat den_lo = exp_dir(c2_lo, Round::Down, prec);
          rhs = std::make_pair(
              DFloat::div(DFloat::from_rational(eps_k, Round::Down, prec), den_hi,
                          Round::Down, prec),
              DFloat::div(DFloat::from_rational(eps_k, Round::Up, prec), den_lo,
                          Round::Up, prec));
        }
        DFloat err_hi = entry.err.hi.to_dfloat(Round::Up, prec);
        if (DFloat::cmp(err_hi, rhs->first) < 0) {
          decided = ok = true;
        } else if (entry.err.lo_known &&
                   DFloat::cmp(rhs->second,
                               entry.err.lo.to_dfloat(Round::Down, prec)) <= 0) {
          decided = true;
        }
      }
      if (!decided)
        throw precision_exhausted("afk_build: stage gate undecidable at 4096 bits");
      if (!ok)
        throw contraction_error("afk_build: fast-approximation gate failed at stage " +
                                std::to_string(k));
      st.gate_lhs = entry.err.hi.str();
      st.gate_rhs = "eps_k/(q^N' e^{(C' q^N')^2}), m_k = " + std::to_string(mk);
    }
    alphas.push_back(st.alpha_k);
    out.stages.push_back(std::move(st));
  }

  // final rotation alpha_{K+1}
  Int fq = opt.final_q.value_or(params.back().q);
  auto fidx = alpha.find_by_denominator(fq);
  if (!fidx)
    throw std::invalid_argument("afk_build: no stored approximant with final q = " +
                                fq.str());
  out.final_rotation = alpha.entries()[*fidx].frac;
  alphas.push_back(out.final_rotation);

  // second pass: f_k = H_k o R_{alpha_{k+1}} o H_k^{-1}.  A suffix of
  // perturbations whose frequencies are divisible by the rotation
  // denominator commutes with R_{alpha_{k+1}} and cancels exactly between
  // H_k and H_k^{-1}; peeling it keeps the composite series clean.
  out.f_cache.push_back(CircleDiffeo::rotation(rational_to_double(alphas[0]), opt.grid));
  CircleDiffeo Hk = CircleDiffeo::identity(opt.grid);
  for (std::size_t k = 1; k <= out.stages.size(); ++k) {
    Hk = compose(Hk, out.stages[k - 1].h_k);
    Int qrot = boost::multiprecision::denominator(alphas[k]);
    std::size_t keep = k;
    while (keep > 0) {
      long fr = out.stages[keep - 1].freq;
      if (fr == 0 || Int(fr) % qrot == 0)
        --keep;
      else
        break;
    }
    CircleDiffeo Heff = CircleDiffeo::identity(opt.grid);
    for (std::size_t i = 1; i <= keep; ++i) Heff = compose(Heff, out.stages[i - 1].h_k);
    CircleDiffeo rot =
        CircleDiffeo::rotation(rational_to_double(alphas[k]), opt.grid);
    out.f_cache.push_back(compose(compose(Heff, rot), inverse(Heff)));
  }
  out.H = Hk;
  out.f = out.f_cache.back();

  // uniform-convergence proxy sup|H_K - H_{K-1}|
  double sup_step = 0.0;
  for (int j = 0; j < opt.grid; ++j) {
    double x = double(j) / opt.grid;
    double d = out.H.value(x) - H_prev.value(x);
    sup_step = std::max(sup_step, std::abs(d - std::round(d)));
  }
  out.sup_H_step = sup_step;
  return out;
}

// ---------------------------------------------------------------------------
// verification sweeps

struct ContractionChainRow {
  std::size_t stage;
  long n;
  double d1;      // d1(f_k^n, f_{k-1}^n)
  double bound;   // |n| / 2^k
};

// Derivative tables of f^n on the grid for n = 1..nmax, both directions,
// by chain-rule products (no reprojected iterates).
struct OrbitDerivTables {
  // [n-1][j]: D f^{+-n} at x_j
  std::vector<std::vector<double>> fwd, bwd;
};

inline OrbitDerivTables orbit_deriv_tables(const CircleDiffeo& f, long nmax) {
  const int g = f.grid();
  OrbitDerivTables t;
  t.fwd.assign(std::size_t(nmax), std::vector<double>(std::size_t(g), 1.0));
  t.bwd.assign(std::size_t(nmax), std::vector<double>(std::size_t(g), 1.0));
  const auto gu = std::size_t(g);
  std::vector<double> xs(gu), prod(gu, 1.0), ys(gu), prodb(gu, 1.0);
  for (int j = 0; j < g; ++j) xs[std::size_t(j)] = ys[std::size_t(j)] = double(j) / g;
  for (long n = 1; n <= nmax; ++n) {
    double last_x = std::numeric_limits<double>::quiet_NaN(), last_y = 0.0;
    for (int j = 0; j < g; ++j) {
      auto ju = std::size_t(j);
      auto [v, d] = f.value_and_deriv(xs[ju]);
      prod[ju] *= d;
      xs[ju] = v;
      t.fwd[std::size_t(n - 1)][ju] = prod[ju];
      double y = ys[ju];
      double hint = std::isfinite(last_x) ? last_x + (y - last_y) : y - f.translation();
      double x = f.invert_point(y, 1e-13, hint);
      last_x = x;
      last_y = y;
      prodb[ju] /= f.deriv(x);
      ys[ju] = x;
      t.bwd[std::size_t(n - 1)][ju] = prodb[ju];
    }
  }
  return t;
}

// d1(f_k^n, f_{k-1}^n) <= |n|/2^k table for all stages and |n| <= nmax
inline std::vector<ContractionChainRow> verify_contraction_chain(const AfkBuild& b,
                                                                 long nmax) {
  std::vector<ContractionChainRow> rows;
  std::vector<OrbitDerivTables> tables;
  for (const auto& fk : b.f_cache) tables.push_back(orbit_deriv_tables(fk, nmax));
  for (std::size_t k = 1; k < b.f_cache.size(); ++k) {
    for (long n = 1; n <= nmax; ++n) {
      double worst = 0.0;
      const auto& cf = tables[k].fwd[std::size_t(n - 1)];
      const auto& pf = tables[k - 1].fwd[std::size_t(n - 1)];
      const auto& cb = tables[k].bwd[std::size_t(n - 1)];
      const auto& pb = tables[k - 1].bwd[std::size_t(n - 1)];
      for (std::size_t j = 0; j < cf.size(); ++j) {
        worst = std::max(worst, std::abs(cf[j] - pf[j]));
        worst = std::max(worst, std::abs(cb[j] - pb[j]));
      }
      rows.push_back({k, n, worst, double(n) / std::ldexp(1.0, int(k))});
    }
  }
  return rows;
}

// telescoping check: ||Df^n - Df_k^n|| <= sum_{l>k} d1(f_l^n, f_{l-1}^n)
struct TelescopingRow {
  std::size_t k;
  long n;
  double lhs, rhs;
};

inline std::vector<TelescopingRow> verify_telescoping(const AfkBuild& b, long nmax) {
  std::vector<TelescopingRow> rows;
  std::vector<OrbitDerivTables> tables;
  for (const auto& fk : b.f_cache) tables.push_back(orbit_deriv_tables(fk, nmax));
  const std::size_t K = b.f_cache.size() - 1;
  for (std::size_t k = 0; k < K; ++k) {
    for (long n = 1; n <= nmax; ++n) {
      double lhs = 0.0;
      const auto& fN = tables[K].fwd[std::size_t(n - 1)];
      const auto& fk = tables[k].fwd[std::size_t(n - 1)];
      const auto& bN = tables[K].bwd[std::size_t(n - 1)];
      const auto& bk = tables[k].bwd[std::size_t(n - 1)];
      for (std::size_t j = 0; j < fN.size(); ++j) {
        lhs = std::max(lhs, std::abs(fN[j] - fk[j]));
        lhs = std::max(lhs, std::abs(bN[j] - bk[j]));
      }
      double rhs = 0.0;
      for (std::size_t l = k + 1; l <= K; ++l) {
        double dl = 0.0;
        const auto& cf = tables[l].fwd[std::size_t(n - 1)];
        const auto& pf = tables[l - 1].fwd[std::size_t(n - 1)];
        const auto& cb = tables[l].bwd[std::size_t(n - 1)];
        const auto& pb = tables[l - 1].bwd[std::size_t(n - 1)];
        for (std::size_t j = 0; j < cf.size(); ++j) {
          dl = std::max(dl, std::abs(cf[j] - pf[j]));
          dl = std::max(dl, std::abs(cb[j] - pb[j]));
        }
        rhs += dl;
      }
      rows.push_back({k, n, lhs, rhs});
    }
  }
  return rows;
}

// reconstruction residual of f_k = H_k R H_k^{-1} via a second association order
inline double reconstruction_residual(const AfkBuild& b) {
  double worst = 0.0;
  CircleDiffeo Hk = CircleDiffeo::identity(b.H.grid());
  for (std::size_t k = 1; k < b.f_cache.size(); ++k) {
    Hk = compose(Hk, b.stages[k - 1].h_k);
    Rational a = (k < b.stages.size()) ? b.stages[k].alpha_k : b.final_rotation;
    CircleDiffeo alt =
        compose(Hk, compose(CircleDiffeo::rotation(rational_to_double(a), Hk.grid()),
                            inverse(Hk)));
    const CircleDiffeo& ref = b.f_cache[k];
    for (int j = 0; j < Hk.grid(); ++j) {
      double x = double(j) / Hk.grid();
      double d = alt.value(x) - ref.value(x);
      worst = std::max(worst, std::abs(d - std::round(d)));
    }
  }
  return worst;
}

// ---------------------------------------------------------------------------
// growth asymptotics report

struct GrowthFit {
  std::string mode;
  double max_ratio{0.0};
  std::vector<double> window_max;  // dyadic windows of Gamma_n / n (or / ln n)
  bool pass{false};
};

inline GrowthFit growth_asymptotics_fit(const GrowthTable& t, const std::string& mode) {
  if (t.nmax < 64) throw std::invalid_argument("growth_asymptotics_fit: nmax >= 64");
  GrowthFit fit;
  fit.mode = mode;
  auto ratio = [&](long n) {
    if (mode == "o_log_n") return n >= 2 ? t.gamma(n) / std::log(double(n)) : 0.0;
    return t.gamma(n) / double(n);
  };
  long start = (mode == "o_log_n") ? 2 : 1;
  for (long n = start; n <= t.nmax; ++n) fit.max_ratio = std::max(fit.max_ratio, ratio(n));
  for (long lo = start; lo <= t.nmax; lo *= 2) {
    long hi = std::min(t.nmax, 2 * lo - 1);
    double w = 0.0;
    for (long n = lo; n <= hi; ++n) w = std::max(w, ratio(n));
    fit.window_max.push_back(w);
    if (hi == t.nmax) break;
  }
  fit.pass = fit.window_max.size() >= 2 &&
             fit.window_max.back() < fit.window_max.front();
  return fit;
}

}  // namespace nct
