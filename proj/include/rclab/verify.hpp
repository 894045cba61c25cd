#pragma once

// Randomised property suites behind `rclab verify`. Each case records a
// residual that must not exceed its tolerance.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rclab/bethe.hpp"
#include "rclab/exact.hpp"
#include "rclab/graph.hpp"
#include "rclab/mapping.hpp"
#include "rclab/parallel.hpp"
#include "rclab/regular.hpp"
#include "rclab/rng.hpp"

namespace rclab {

struct VerifyCase {
  std::string suite;
  std::string check;
  std::string detail;
  double residual = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

struct VerifyReport {
  std::vector<VerifyCase> cases;
  int failures() const {
    return static_cast<int>(std::count_if(cases.begin(), cases.end(), [](const VerifyCase& c) { return !c.pass; }));
  }
  void append(const VerifyReport& other) { cases.insert(cases.end(), other.cases.begin(), other.cases.end()); }
};

struct VerifyOptions {
  std::uint64_t seed = 1;
  std::optional<int> trials;      // default depends on the suite
  std::optional<double> q;        // pins q in the sandwich suite
  std::optional<double> tol;      // overrides every per-check tolerance
};

namespace detail {

inline VerifyCase make_case(const std::string& suite, const std::string& check, std::string detail, double residual,
                            double tol, const VerifyOptions& opts) {
  const double t = opts.tol.value_or(tol);
  return {suite, check, std::move(detail), residual, t, residual <= t};
}

/// Pass/fail checks carry residual 0 or 1 and ignore the tolerance override.
inline VerifyCase make_flag(const std::string& suite, const std::string& check, std::string detail, bool ok) {
  return {suite, check, std::move(detail), ok ? 0.0 : 1.0, 0.0, ok};
}

inline std::string describe(const Graph& g) { return "n=" + std::to_string(g.n()) + " m=" + std::to_string(g.m()); }

inline std::string describe(const Graph& g, double q, double w, double B) {
  char buf[128];
  std::snprintf(buf, sizeof buf, " q=%.6g w=%.6g B=%.6g", q, w, B);
  return describe(g) + buf;
}

/// n in [lo_n, hi_n], m uniform up to min(max_m, n(n-1)/2) but at least min_m.
inline Graph random_graph(Rng& rng, int lo_n, int hi_n, int min_m, int max_m) {
  const int n = lo_n + static_cast<int>(rng.below(hi_n - lo_n + 1));
  const int cap = std::min(max_m, n * (n - 1) / 2);
  const int lo = std::min(min_m, cap);
  const int m = lo + static_cast<int>(rng.below(cap - lo + 1));
  return gen_random_gnm(n, m, rng.next());
}

template <class Body>
std::vector<VerifyCase> run_cases(int trials, Body body) {
  std::vector<std::vector<VerifyCase>> slots(trials);
  parallel_for(trials, [&](std::size_t i) { slots[i] = body(static_cast<int>(i)); });
  std::vector<VerifyCase> out;
  for (auto& s : slots) out.insert(out.end(), s.begin(), s.end());
  return out;
}

}  // namespace detail

/// Z^(2) <= Z <= q^L Z^(2) on random graphs with n <= 10, |E| <= 20.
inline VerifyReport verify_sandwich(const VerifyOptions& opts) {
  const int trials = opts.trials.value_or(200);
  VerifyReport r;
  r.cases = detail::run_cases(trials, [&](int i) {
    Rng rng = Rng::stream(opts.seed, i);
    const Graph g = detail::random_graph(rng, 2, 10, 0, 20);
    const double q = opts.q ? *opts.q : rng.uniform(2.0, 6.0);
    const double w = rng.uniform(0.0, 5.0), B = rng.uniform(0.0, 3.0);
    const SandwichReport s = sandwich_check(g, {q, w, B});
    const double residual = std::max({0.0, s.logZ2 - s.logZ, s.logZ - s.logUpper});
    return std::vector<VerifyCase>{detail::make_case("sandwich", "Z2<=Z<=q^L*Z2",
                                                     detail::describe(g, q, w, B) + " L=" + std::to_string(s.L),
                                                     residual, kSandwichTolerance, opts)};
  });
  return r;
}

/// Exact equality chains: forests, q = 2, Potts, extended Ising, two-spin.
inline VerifyReport verify_identities(const VerifyOptions& opts) {
  const int trials = opts.trials.value_or(100);
  constexpr double tol = 1e-10;
  VerifyReport r;
  r.cases = detail::run_cases(trials, [&](int i) {
    Rng rng = Rng::stream(opts.seed, i);
    std::vector<VerifyCase> out;
    {
      const Graph t = gen_random_tree(1 + static_cast<int>(rng.below(12)), rng.next());
      const double q = rng.uniform(2.0, 6.0), w = rng.uniform(0.0, 5.0), B = rng.uniform(0.0, 3.0);
      const double res = std::abs(rc_partition(t, {q, w, B}).log - rank2_partition(t, {q, w, B}).log);
      out.push_back(detail::make_case("identities", "forest Z=Z2", detail::describe(t, q, w, B), res, tol, opts));
    }
    {
      const Graph g = detail::random_graph(rng, 2, 10, 0, 16);
      const double w = rng.uniform(0.0, 5.0), B = rng.uniform(-2.0, 3.0);
      const double res = std::abs(rc_partition(g, {2.0, w, B}).log - rank2_partition(g, {2.0, w, B}).log);
      out.push_back(detail::make_case("identities", "q=2 Z=Z2", detail::describe(g, 2.0, w, B), res, tol, opts));
    }
    {
      const int q = 2 + i % 3;
      const Graph g = detail::random_graph(rng, 1, 8, 0, 14);
      const double beta = rng.uniform(0.0, 2.0), B = rng.uniform(-2.0, 3.0);
      const double w = std::expm1(beta);
      const double res = std::abs(potts_partition(g, q, beta, B).log - (B * g.n() + rc_partition(g, {double(q), w, B}).log));
      out.push_back(
          detail::make_case("identities", "Potts=e^{Bn}Z", detail::describe(g, q, w, B), res, tol, opts));
    }
    {
      const Graph g = detail::random_graph(rng, 1, 12, 0, 20);
      const double q = rng.uniform(1.5, 6.0), w = rng.uniform(0.0, 5.0), B = rng.uniform(-2.0, 3.0);
      const IdentityResiduals id = assemble_identities(g, q, w, B);
      out.push_back(detail::make_case("identities", "Z2=eIsing", detail::describe(g, q, w, B), id.eising_residual,
                                      tol, opts));
      out.push_back(detail::make_case("identities", "Z2=Z(psi,psibar)", detail::describe(g, q, w, B),
                                      id.two_spin_residual, tol, opts));
    }
    return out;
  });
  return r;
}

/// Bethe values never exceed the exact partition function on loopy graphs
/// and equal it on trees.
inline VerifyReport verify_bethe(const VerifyOptions& opts) {
  const int trials = opts.trials.value_or(100);
  constexpr double tol = 1e-8;
  VerifyReport r;
  r.cases = detail::run_cases(trials, [&](int i) {
    Rng rng = Rng::stream(opts.seed, i);
    std::vector<VerifyCase> out;
    const double q = rng.uniform(2.0, 6.0), w = rng.uniform(0.0, 5.0), B = rng.uniform(0.0, 3.0);
    const TwoSpinWeights ws = rc_to_two_spin(q, w, B);
    {
      const int n = 3 + static_cast<int>(rng.below(10));
      const int cap = std::min(20, n * (n - 1) / 2);
      const int m = n + static_cast<int>(rng.below(cap - n + 1));
      const Graph g = gen_random_gnm(n, m, rng.next());
      const auto best = bethe_max(g, make_pairwise(g, ws), 4, rng.next());
      const double exact = two_spin_partition(g, ws).log;
      const double logZ = rc_partition(g, {q, w, B}).log;
      double worst = 0.0;
      for (const auto& run : best.runs)
        if (run.converged) worst = std::max(worst, run.logZB - exact);
      out.push_back(detail::make_case("bethe", "ZB<=Z(psi,psibar) loopy", detail::describe(g, q, w, B),
                                      std::max(0.0, worst), tol, opts));
      out.push_back(detail::make_case("bethe", "ZB<=Z loopy", detail::describe(g, q, w, B),
                                      std::max(0.0, best.logZB_best - logZ), tol, opts));
    }
    {
      const Graph t = gen_random_tree(1 + static_cast<int>(rng.below(12)), rng.next());
      const auto best = bethe_max(t, make_pairwise(t, ws), 2, rng.next());
      const double exact = two_spin_partition(t, ws).log;
      out.push_back(detail::make_case("bethe", "ZB=Z tree", detail::describe(t, q, w, B),
                                      std::abs(best.logZB_best - exact), tol, opts));
    }
    return out;
  });
  return r;
}

/// Closed-form anchors, envelope identity, critical curve and the
/// first-order verdicts of the regular-graph formulas.
inline VerifyReport verify_regular(const VerifyOptions& opts) {
  const int trials = opts.trials.value_or(50);
  VerifyReport r;
  r.cases = detail::run_cases(trials, [&](int i) {
    Rng rng = Rng::stream(opts.seed, i);
    std::vector<VerifyCase> out;
    char buf[160];
    const int d = 3 + static_cast<int>(rng.below(3));
    {
      const double z = rng.uniform(-3.0, 3.0);
      std::snprintf(buf, sizeof buf, "z=%.6g d=%d", z, d);
      out.push_back(detail::make_case("regular", "phi_ising(0,z)=log2cosh z", buf,
                                      std::abs(phi_ising(0.0, z, d) - std::log(2.0 * std::cosh(z))), 1e-9, opts));
    }
    {
      const double q = rng.uniform(2.0, 6.0), B = rng.uniform(0.0, 3.0);
      std::snprintf(buf, sizeof buf, "q=%.6g B=%.6g d=%d", q, B, d);
      out.push_back(detail::make_case("regular", "phi(q,0,B)=log(1+(q-1)e^-B)", buf,
                                      std::abs(phi_rc_regular(q, 0.0, B, d) - std::log1p((q - 1.0) * std::exp(-B))),
                                      1e-9, opts));
    }
    {
      const double beta = rng.uniform(0.0, 1.2);
      const double z = (rng.below(2) ? 1.0 : -1.0) * rng.uniform(0.05, 1.5);
      const double h = 1e-4;
      const double fd = (phi_ising(beta, z + h, d) - phi_ising(beta, z - h, d)) / (2.0 * h);
      const double env = 2.0 * maximize_G(beta, z, d).t_star - 1.0;
      std::snprintf(buf, sizeof buf, "beta=%.6g z=%.6g d=%d", beta, z, d);
      out.push_back(detail::make_case("regular", "d_z phi=2t*-1", buf, std::abs(fd - env), 1e-5, opts));
    }
    {
      const double q = rng.uniform(2.5, 5.0), B = rng.uniform(0.0, 2.0);
      const double wc = w_c(B, q, d);
      double w = rng.uniform(0.1, 5.0);
      if (std::abs(w - wc) < 0.05) w = wc + 0.1;
      const auto dd = dphi_dw_one_sided(q, w, B, d);
      std::snprintf(buf, sizeof buf, "q=%.6g w=%.6g B=%.6g d=%d", q, w, B, d);
      out.push_back(detail::make_case("regular", "off-curve differentiable", buf, std::abs(dd.plus - dd.minus), 1e-5,
                                      opts));
    }
    return out;
  });

  // Deterministic curve checks (not randomised).
  for (auto [q, d] : {std::pair{4.0, 3}, std::pair{3.0, 4}, std::pair{5.0, 3}}) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "q=%g d=%d", q, d);
    const double Bp = find_B_plus(q, d);
    const double target = std::pow(double(d) / (d - 2), 2);
    r.cases.push_back(detail::make_case("regular", "g(w_c(B_+))=(d/(d-2))^2", buf,
                                        std::abs(g_of_w(w_c(Bp, q, d), q) - target), 1e-10, opts));
    double worst_rise = -kInf;
    double prev = w_c(0.0, q, d);
    for (int j = 1; j < 100; ++j) {
      const double cur = w_c(Bp * j / 99.0, q, d);
      worst_rise = std::max(worst_rise, cur - prev);
      prev = cur;
    }
    r.cases.push_back(detail::make_flag("regular", "w_c strictly decreasing", buf, worst_rise < 0.0));
    for (int j = 0; j < 5; ++j) {
      const PhasePoint p = transition_probe(q, d, Bp * j / 5.0);
      const bool ok = p.first_order && p.gap > kFirstOrderThreshold;
      char b2[160];
      std::snprintf(b2, sizeof b2, "%s B=%.6g gap=%.6g", buf, p.B, p.gap);
      r.cases.push_back(detail::make_flag("regular", "first order below B_+", b2, ok));
    }
    const PhasePoint beyond = transition_probe(q, d, Bp + 0.2);
    char b3[160];
    std::snprintf(b3, sizeof b3, "%s B=%.6g gap=%.6g", buf, beyond.B, beyond.gap);
    r.cases.push_back(detail::make_flag("regular", "no transition beyond B_+", b3, !beyond.first_order));
  }
  {
    const PhasePoint p = transition_probe(2.0, 3, 0.0);
    char buf[96];
    std::snprintf(buf, sizeof buf, "q=2 d=3 B=0 w=%.6g gap=%.6g", p.w, p.gap);
    r.cases.push_back(detail::make_flag("regular", "no w-kink at q=2", buf, !p.first_order));
  }
  return r;
}

inline VerifyReport verify_suite(const std::string& suite, const VerifyOptions& opts) {
  if (suite == "sandwich") return verify_sandwich(opts);
  if (suite == "identities") return verify_identities(opts);
  if (suite == "bethe") return verify_bethe(opts);
  if (suite == "regular") return verify_regular(opts);
  if (suite == "all") {
    VerifyReport all;
    for (const char* s : {"sandwich", "identities", "bethe", "regular"}) all.append(verify_suite(s, opts));
    return all;
  }
  fail(ErrorKind::InvalidParameter, "unknown suite '" + suite + "'");
}

}  // namespace rclab
