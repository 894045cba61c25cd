#pragma once

// Exact partition functions by exhaustive enumeration, carried in log space.
// This is the ground-truth layer every other module is checked against.

#include <bit>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "rclab/error.hpp"
#include "rclab/graph.hpp"
#include "rclab/log_value.hpp"
#include "rclab/parallel.hpp"

namespace rclab {

inline constexpr int kEdgeEnumerationBudget = 24;
inline constexpr int kVertexEnumerationBudget = 24;
inline constexpr std::uint64_t kPottsConfigurationBudget = std::uint64_t{1} << 24;

/// Random cluster parameters: cluster weight q, edge weight w = e^beta - 1,
/// external field B.
struct RCParams {
  double q = 2.0;
  double w = 0.0;
  double B = 0.0;
};

inline void validate(const RCParams& p) {
  require(std::isfinite(p.q) && p.q > 0.0, ErrorKind::InvalidQ, "q must be > 0, got " + std::to_string(p.q));
  require(std::isfinite(p.w) && p.w >= 0.0, ErrorKind::InvalidParameter, "w must be >= 0");
  require(std::isfinite(p.B), ErrorKind::InvalidParameter, "B must be finite");
}

/// Two-spin weights. psi(+,-) = psi(-,+) is a single field.
struct TwoSpinWeights {
  double psi_pp = 1.0;
  double psi_pm = 1.0;
  double psi_mm = 1.0;
  double psibar_p = 1.0;
  double psibar_m = 1.0;

  double edge(bool a, bool b) const { return a ? (b ? psi_pp : psi_pm) : (b ? psi_pm : psi_mm); }
  double vertex(bool a) const { return a ? psibar_p : psibar_m; }
};

inline void validate(const TwoSpinWeights& ws) {
  for (double x : {ws.psi_pp, ws.psi_pm, ws.psi_mm, ws.psibar_p, ws.psibar_m})
    require(std::isfinite(x) && x > 0.0, ErrorKind::Positivity, "two-spin weights must be strictly positive");
}

/// Extended Ising model: coupling beta_star, vertex field B_v = k d_v + h.
struct EIsingParams {
  double beta_star = 0.0;
  double k = 0.0;
  double h = 0.0;

  double field(int degree) const { return k * degree + h; }
};

inline void validate(const EIsingParams& p) {
  require(std::isfinite(p.beta_star) && p.beta_star >= 0.0, ErrorKind::InvalidParameter, "beta_star must be >= 0");
  require(std::isfinite(p.k) && std::isfinite(p.h), ErrorKind::InvalidParameter, "k and h must be finite");
}

namespace detail {

// Splits [0, total) into a fixed number of chunks and merges the per-chunk
// sums in chunk order, so the result does not depend on the worker count.
template <class Term>
LogValue enumerate_log_sum(std::uint64_t total, Term&& term_of_chunk) {
  const std::size_t chunks = total < 4096 ? 1 : 64;
  std::vector<LogSumExp> partial(chunks);
  parallel_for(chunks, [&](std::size_t c) {
    const std::uint64_t lo = total * c / chunks, hi = total * (c + 1) / chunks;
    term_of_chunk(lo, hi, partial[c]);
  });
  LogSumExp all;
  for (const auto& p : partial) all.merge(p);
  return all.result();
}

inline void check_edge_budget(const Graph& g) {
  if (g.m() > kEdgeEnumerationBudget)
    fail(ErrorKind::BudgetExceeded,
         std::to_string(g.m()) + " edges exceeds 2^E budget (" + std::to_string(kEdgeEnumerationBudget) + ")");
}

inline void check_vertex_budget(const Graph& g) {
  if (g.n() > kVertexEnumerationBudget)
    fail(ErrorKind::BudgetExceeded,
         std::to_string(g.n()) + " vertices exceeds 2^n budget (" + std::to_string(kVertexEnumerationBudget) + ")");
}

/// Vertex adjacency as bitmasks, n <= 24.
inline std::vector<std::uint32_t> adjacency_masks(const Graph& g) {
  std::vector<std::uint32_t> adj(g.n(), 0);
  for (const auto& e : g.edges()) {
    adj[e.u] |= std::uint32_t{1} << e.v;
    adj[e.v] |= std::uint32_t{1} << e.u;
  }
  return adj;
}

/// Number of edges with both endpoints in S.
inline int induced_edges(const std::vector<std::uint32_t>& adj, std::uint32_t S) {
  int twice = 0;
  for (std::uint32_t bits = S; bits; bits &= bits - 1) twice += std::popcount(adj[std::countr_zero(bits)] & S);
  return twice / 2;
}

/// Walks edge subsets [lo, hi) and hands each subset's component structure
/// to visit(edge_count, roots, size). Union-find is rebuilt per subset.
template <class Visit>
void for_each_edge_subset(const Graph& g, std::uint64_t lo, std::uint64_t hi, Visit&& visit) {
  const int n = g.n();
  const auto& edges = g.edges();
  std::vector<int> parent(n), size(n);
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (std::uint64_t mask = lo; mask < hi; ++mask) {
    std::iota(parent.begin(), parent.end(), 0);
    std::fill(size.begin(), size.end(), 1);
    int components = n;
    for (std::uint64_t bits = mask; bits; bits &= bits - 1) {
      const auto& e = edges[std::countr_zero(bits)];
      int a = find(e.u), b = find(e.v);
      if (a == b) continue;
      if (size[a] < size[b]) std::swap(a, b);
      parent[b] = a;
      size[a] += size[b];
      --components;
    }
    visit(std::popcount(mask), components, parent, size);
  }
}

}  // namespace detail

/// log Z_G(q, w, B): sum over edge subsets of w^|A| times, for every
/// component C of (V, A), the factor 1 + (q-1) e^{-B|C|}.
inline LogValue rc_partition(const Graph& g, const RCParams& p) {
  validate(p);
  detail::check_edge_budget(g);
  const int n = g.n();
  std::vector<double> factor(n + 1, 0.0);
  for (int s = 1; s <= n; ++s) {
    const double x = (p.q - 1.0) * std::exp(-p.B * s);
    require(1.0 + x > 0.0, ErrorKind::Positivity, "component factor 1+(q-1)e^{-B|C|} is not positive");
    factor[s] = std::log1p(x);
  }
  if (p.w == 0.0) return LogValue{n * factor[1]};
  const double log_w = std::log(p.w);
  return detail::enumerate_log_sum(std::uint64_t{1} << g.m(), [&](std::uint64_t lo, std::uint64_t hi, LogSumExp& acc) {
    detail::for_each_edge_subset(g, lo, hi, [&](int edges, int, const std::vector<int>& parent, const std::vector<int>& size) {
      double t = edges * log_w;
      for (int v = 0; v < n; ++v)
        if (parent[v] == v) t += factor[size[v]];
      acc.add(t);
    });
  });
}

/// log Z_G(q, w) = log sum_A q^{k(A)} w^{|A|}.
inline LogValue rc_partition_no_field(const Graph& g, double q, double w) {
  validate(RCParams{q, w, 0.0});
  detail::check_edge_budget(g);
  const double log_q = std::log(q);
  if (w == 0.0) return LogValue{g.n() * log_q};
  const double log_w = std::log(w);
  return detail::enumerate_log_sum(std::uint64_t{1} << g.m(), [&](std::uint64_t lo, std::uint64_t hi, LogSumExp& acc) {
    detail::for_each_edge_subset(g, lo, hi, [&](int edges, int components, const auto&, const auto&) {
      acc.add(components * log_q + edges * log_w);
    });
  });
}

/// log of the q-state Potts partition function with field on colour 1:
/// sum over colourings of exp(beta * #monochromatic edges + B * #{sigma_v = 1}).
inline LogValue potts_partition(const Graph& g, int q, double beta, double B) {
  require(q >= 2, ErrorKind::InvalidQ, "Potts model needs integer q >= 2");
  require(std::isfinite(beta) && std::isfinite(B), ErrorKind::InvalidParameter, "beta and B must be finite");
  const int n = g.n();
  std::uint64_t total = 1;
  for (int i = 0; i < n; ++i) {
    total *= static_cast<std::uint64_t>(q);
    if (total > kPottsConfigurationBudget)
      fail(ErrorKind::BudgetExceeded, "q^n exceeds configuration budget 2^24");
  }
  const auto& edges = g.edges();
  return detail::enumerate_log_sum(total, [&](std::uint64_t lo, std::uint64_t hi, LogSumExp& acc) {
    std::vector<int> colour(n);
    std::uint64_t x = lo;
    for (int v = 0; v < n; ++v) {
      colour[v] = static_cast<int>(x % q);
      x /= q;
    }
    for (std::uint64_t idx = lo; idx < hi; ++idx) {
      int mono = 0, ones = 0;
      for (const auto& e : edges) mono += colour[e.u] == colour[e.v];
      for (int v = 0; v < n; ++v) ones += colour[v] == 0;
      acc.add(beta * mono + B * ones);
      for (int v = 0; v < n; ++v) {
        if (++colour[v] < q) break;
        colour[v] = 0;
      }
    }
  });
}

/// log Z^(2)_G(q, w, B): sum over S subset of V of
/// (1+w)^{|E(S)|} (1+w/(q-1))^{|E(V\S)|} ((q-1)e^{-B})^{n-|S|}.
inline LogValue rank2_partition(const Graph& g, const RCParams& p) {
  validate(p);
  require(p.q > 1.0 + 1e-12, ErrorKind::InvalidQ, "rank-2 form needs q > 1 (w/(q-1) is singular at q = 1)");
  detail::check_vertex_budget(g);
  const int n = g.n();
  const auto adj = detail::adjacency_masks(g);
  const std::uint32_t all = n == 32 ? ~0u : ((std::uint32_t{1} << n) - 1);
  const double log_in = std::log1p(p.w);
  const double log_out = std::log1p(p.w / (p.q - 1.0));
  const double log_vertex = std::log(p.q - 1.0) - p.B;
  return detail::enumerate_log_sum(std::uint64_t{1} << n, [&](std::uint64_t lo, std::uint64_t hi, LogSumExp& acc) {
    for (std::uint64_t s = lo; s < hi; ++s) {
      const auto S = static_cast<std::uint32_t>(s);
      const int in = detail::induced_edges(adj, S);
      const int out = detail::induced_edges(adj, all & ~S);
      acc.add(in * log_in + out * log_out + (n - std::popcount(S)) * log_vertex);
    }
  });
}

/// log Z_G(psi, psibar) over {+,-}^V (bit set = +).
inline LogValue two_spin_partition(const Graph& g, const TwoSpinWeights& ws) {
  validate(ws);
  detail::check_vertex_budget(g);
  const int n = g.n();
  const auto& edges = g.edges();
  const double lpp = std::log(ws.psi_pp), lpm = std::log(ws.psi_pm), lmm = std::log(ws.psi_mm);
  const double lp = std::log(ws.psibar_p), lm = std::log(ws.psibar_m);
  return detail::enumerate_log_sum(std::uint64_t{1} << n, [&](std::uint64_t lo, std::uint64_t hi, LogSumExp& acc) {
    for (std::uint64_t s = lo; s < hi; ++s) {
      const int plus = std::popcount(s);
      double t = plus * lp + (n - plus) * lm;
      for (const auto& e : edges) {
        const bool a = s >> e.u & 1, b = s >> e.v & 1;
        t += a ? (b ? lpp : lpm) : (b ? lpm : lmm);
      }
      acc.add(t);
    }
  });
}

/// log Z^eIsing: sum over sigma in {-1,+1}^V of
/// exp(beta* sum_uv sigma_u sigma_v + sum_v (k d_v + h) sigma_v).
inline LogValue eising_partition(const Graph& g, const EIsingParams& p) {
  validate(p);
  detail::check_vertex_budget(g);
  const int n = g.n();
  const auto& edges = g.edges();
  std::vector<double> field(n);
  for (int v = 0; v < n; ++v) field[v] = p.field(g.degree(v));
  return detail::enumerate_log_sum(std::uint64_t{1} << n, [&](std::uint64_t lo, std::uint64_t hi, LogSumExp& acc) {
    for (std::uint64_t s = lo; s < hi; ++s) {
      double t = 0.0;
      for (int v = 0; v < n; ++v) t += (s >> v & 1) ? field[v] : -field[v];
      int agree = 0;
      for (const auto& e : edges) agree += ((s >> e.u) & 1) == ((s >> e.v) & 1);
      t += p.beta_star * (2 * agree - g.m());
      acc.add(t);
    }
  });
}

/// Subgraph induced by the vertices in `keep` (bitmask over n <= 64),
/// relabelled in increasing order. Requires at least one kept vertex.
inline Graph induced_subgraph(const Graph& g, std::uint64_t keep) {
  std::vector<int> label(g.n(), -1);
  int next = 0;
  for (int v = 0; v < g.n(); ++v)
    if (keep >> v & 1) label[v] = next++;
  require(next >= 1, ErrorKind::InvalidParameter, "induced subgraph would be empty");
  std::vector<Edge> edges;
  for (const auto& e : g.edges())
    if (label[e.u] >= 0 && label[e.v] >= 0) edges.push_back({label[e.u], label[e.v]});
  return build_graph(next, std::move(edges));
}

struct SandwichReport {
  double logZ = 0.0;
  double logZ2 = 0.0;
  int L = 0;
  double logBoundGap = 0.0;  // logZ - logZ2, the observed slack above the lower bound
  double logUpper = 0.0;     // logZ2 + L log q
  bool lower_ok = false;
  bool upper_ok = false;
  bool pass = false;
};

inline constexpr double kSandwichTolerance = 1e-9;

/// Checks Z^(2) <= Z <= q^{L(G)} Z^(2) in log space, q >= 2 and B >= 0.
inline SandwichReport sandwich_check(const Graph& g, const RCParams& p, double eps = kSandwichTolerance) {
  validate(p);
  require(p.q >= 2.0, ErrorKind::InvalidQ, "sandwich bound needs q >= 2, got " + std::to_string(p.q));
  require(p.B >= 0.0, ErrorKind::InvalidParameter, "sandwich bound needs B >= 0");
  SandwichReport r;
  r.logZ = rc_partition(g, p).log;
  r.logZ2 = rank2_partition(g, p).log;
  r.L = cyclic_components_max(g);
  r.logBoundGap = r.logZ - r.logZ2;
  r.logUpper = r.logZ2 + r.L * std::log(p.q);
  r.lower_ok = r.logZ2 - eps <= r.logZ;
  r.upper_ok = r.logZ <= r.logUpper + eps;
  r.pass = r.lower_ok && r.upper_ok;
  return r;
}

}  // namespace rclab
