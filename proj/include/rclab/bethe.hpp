#pragma once

// Belief propagation for pairwise two-spin models, the Bethe functional, and
// the tree pressure of the extended Ising model on Galton-Watson trees.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "rclab/error.hpp"
#include "rclab/exact.hpp"
#include "rclab/graph.hpp"
#include "rclab/log_value.hpp"
#include "rclab/parallel.hpp"
#include "rclab/rng.hpp"

namespace rclab {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Log-domain pairwise model: a per-vertex field and one shared edge table.
/// Index 0 is spin +, index 1 is spin -.
struct PairwiseModel {
  std::vector<std::array<double, 2>> log_vertex;
  double lpp = 0.0, lpm = 0.0, lmm = 0.0;

  double log_edge(int a, int b) const { return a == 0 ? (b == 0 ? lpp : lpm) : (b == 0 ? lpm : lmm); }
  double vertex_log_odds(int v) const { return log_vertex[v][0] - log_vertex[v][1]; }
};

inline PairwiseModel make_pairwise(const Graph& g, const TwoSpinWeights& ws) {
  validate(ws);
  PairwiseModel m;
  m.log_vertex.assign(g.n(), {std::log(ws.psibar_p), std::log(ws.psibar_m)});
  m.lpp = std::log(ws.psi_pp);
  m.lpm = std::log(ws.psi_pm);
  m.lmm = std::log(ws.psi_mm);
  return m;
}

inline PairwiseModel make_pairwise(const Graph& g, const EIsingParams& p) {
  validate(p);
  PairwiseModel m;
  m.log_vertex.resize(g.n());
  for (int v = 0; v < g.n(); ++v) {
    const double b = p.field(g.degree(v));
    m.log_vertex[v] = {b, -b};
  }
  m.lpp = p.beta_star;
  m.lpm = -p.beta_star;
  m.lmm = p.beta_star;
  return m;
}

namespace detail {

inline double softplus(double x) {
  if (x == kInf) return kInf;
  if (x == -kInf) return 0.0;
  return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

/// log m(+), log m(-) for a message given as log-odds (may be +-inf).
inline double log_plus(double odds) { return -softplus(-odds); }
inline double log_minus(double odds) { return -softplus(odds); }

/// log sum_s' psi(s, s') m(s') for receiver spin s.
inline double log_edge_sum(const PairwiseModel& m, int s, double odds) {
  return lse2(m.log_edge(s, 0) + log_plus(odds), m.log_edge(s, 1) + log_minus(odds));
}

/// Log-odds contribution of one incoming message to its receiver.
inline double odds_shift(const PairwiseModel& m, double odds) {
  if (odds == kInf) return m.lpp - m.lpm;
  if (odds == -kInf) return m.lpm - m.lmm;
  return lse2(m.lpp + odds, m.lpm) - lse2(m.lpm + odds, m.lmm);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// BP state and updates

inline constexpr double kMessageClamp = 40.0;
inline constexpr double kPlusInit = 20.0;

/// Directed edge 2e is e.u -> e.v, 2e+1 is e.v -> e.u. Messages are log-odds
/// log(m(+)/m(-)).
struct BPState {
  std::vector<double> log_odds;
  int iterations = 0;
  double residual = kInf;
  bool clamped = false;  // the clamp bound at the last sweep
};

enum class BPInit { Uniform, Plus, Minus, Random };
enum class BPSchedule { Synchronous, RandomSequential };

inline int message_source(const Graph& g, int d) { return d % 2 == 0 ? g.edges()[d / 2].u : g.edges()[d / 2].v; }
inline int message_target(const Graph& g, int d) { return d % 2 == 0 ? g.edges()[d / 2].v : g.edges()[d / 2].u; }

inline BPState bp_init(const Graph& g, BPInit mode, std::uint64_t seed = 0) {
  BPState s;
  s.log_odds.assign(2 * static_cast<std::size_t>(g.m()), 0.0);
  switch (mode) {
    case BPInit::Uniform: break;
    case BPInit::Plus: std::fill(s.log_odds.begin(), s.log_odds.end(), kPlusInit); break;
    case BPInit::Minus: std::fill(s.log_odds.begin(), s.log_odds.end(), -kPlusInit); break;
    case BPInit::Random: {
      Rng rng(seed);
      for (auto& x : s.log_odds) x = rng.uniform(-2.0, 2.0);
      break;
    }
  }
  return s;
}

namespace detail {

/// For each vertex, the directed edges pointing into it.
inline std::vector<std::vector<int>> incoming_messages(const Graph& g) {
  std::vector<std::vector<int>> in(g.n());
  for (int d = 0; d < 2 * g.m(); ++d) in[message_target(g, d)].push_back(d);
  return in;
}

inline double clamp_message(double x, bool& clamped) {
  if (x > kMessageClamp) {
    clamped = true;
    return kMessageClamp;
  }
  if (x < -kMessageClamp) {
    clamped = true;
    return -kMessageClamp;
  }
  return x;
}

}  // namespace detail

/// One sweep. Synchronous: every message u->v is recomputed from the old
/// messages as psibar_u times the product over j in N(u)\v of
/// sum_s psi(., s) m_{j->u}(s), then blended with the old value in log-odds.
inline BPState bp_step(const Graph& g, const PairwiseModel& model, const BPState& s, double damping,
                       BPSchedule schedule = BPSchedule::Synchronous, Rng* order_rng = nullptr) {
  require(damping >= 0.0 && damping < 1.0, ErrorKind::InvalidParameter, "damping must be in [0, 1)");
  require(s.log_odds.size() == 2 * static_cast<std::size_t>(g.m()), ErrorKind::InvalidParameter,
          "state does not match graph");
  BPState next = s;
  next.clamped = false;
  next.residual = 0.0;
  const auto in = detail::incoming_messages(g);
  const int messages = 2 * g.m();

  if (schedule == BPSchedule::Synchronous) {
    std::vector<double> total(g.n());
    for (int v = 0; v < g.n(); ++v) {
      double t = model.vertex_log_odds(v);
      for (int d : in[v]) t += detail::odds_shift(model, s.log_odds[d]);
      total[v] = t;
    }
    for (int d = 0; d < messages; ++d) {
      const int u = message_source(g, d);
      const double update = total[u] - detail::odds_shift(model, s.log_odds[d ^ 1]);
      const double blended =
          detail::clamp_message((1.0 - damping) * update + damping * s.log_odds[d], next.clamped);
      next.residual = std::max(next.residual, std::abs(blended - s.log_odds[d]));
      next.log_odds[d] = blended;
    }
  } else {
    std::vector<int> order(messages);
    for (int d = 0; d < messages; ++d) order[d] = d;
    if (order_rng)
      for (int i = messages; i > 1; --i) std::swap(order[i - 1], order[order_rng->below(i)]);
    for (int d : order) {
      const int u = message_source(g, d);
      double update = model.vertex_log_odds(u);
      for (int j : in[u])
        if (j != (d ^ 1)) update += detail::odds_shift(model, next.log_odds[j]);
      const double old = next.log_odds[d];
      const double blended = detail::clamp_message((1.0 - damping) * update + damping * old, next.clamped);
      next.residual = std::max(next.residual, std::abs(blended - old));
      next.log_odds[d] = blended;
    }
  }
  ++next.iterations;
  return next;
}

struct BPOptions {
  int max_sweeps = 10000;
  double tol = 1e-12;
  double damping = 0.5;
  BPSchedule schedule = BPSchedule::Synchronous;
  std::uint64_t schedule_seed = 0;
};

struct BPRun {
  BPState state;
  bool converged = false;
  bool clamp_bound = false;  // converged against the clamp; counts as failure
};

inline BPRun bp_run(const Graph& g, const PairwiseModel& model, BPState start, const BPOptions& opts = {}) {
  BPRun run;
  run.state = std::move(start);
  if (g.m() == 0) {
    run.state.residual = 0.0;
    run.converged = true;
    return run;
  }
  Rng order_rng(opts.schedule_seed);
  for (int sweep = 0; sweep < opts.max_sweeps; ++sweep) {
    run.state = bp_step(g, model, run.state, opts.damping, opts.schedule, &order_rng);
    if (run.state.residual < opts.tol) {
      run.clamp_bound = run.state.clamped;
      run.converged = !run.state.clamped;
      return run;
    }
  }
  return run;
}

// ---------------------------------------------------------------------------
// Marginals and the Bethe functional

struct BetheMarginals {
  std::vector<std::array<double, 2>> vertex;  // {mu(+), mu(-)}
  /// Edge e = (u, v): index 2*a + b holds mu(sigma_u = a, sigma_v = b), 0 = +.
  std::vector<std::array<double, 4>> edge;
};

inline BetheMarginals beliefs_from_messages(const Graph& g, const PairwiseModel& model, const BPState& s) {
  BetheMarginals mu;
  mu.vertex.resize(g.n());
  mu.edge.resize(g.m());
  const auto in = detail::incoming_messages(g);
  for (int v = 0; v < g.n(); ++v) {
    std::array<double, 2> l = model.log_vertex[v];
    for (int d : in[v])
      for (int a = 0; a < 2; ++a) l[a] += detail::log_edge_sum(model, a, s.log_odds[d]);
    const double z = lse2(l[0], l[1]);
    mu.vertex[v] = {std::exp(l[0] - z), std::exp(l[1] - z)};
  }
  for (int e = 0; e < g.m(); ++e) {
    const double out_u = s.log_odds[2 * e], out_v = s.log_odds[2 * e + 1];
    std::array<double, 4> l{};
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b)
        l[2 * a + b] = (a == 0 ? detail::log_plus(out_u) : detail::log_minus(out_u)) + model.log_edge(a, b) +
                       (b == 0 ? detail::log_plus(out_v) : detail::log_minus(out_v));
    const double z = lse2(lse2(l[0], l[1]), lse2(l[2], l[3]));
    for (int i = 0; i < 4; ++i) mu.edge[e][i] = std::exp(l[i] - z);
  }
  return mu;
}

/// Largest violation of normalisation or edge/vertex consistency.
inline double marginal_inconsistency(const Graph& g, const BetheMarginals& mu) {
  double worst = 0.0;
  for (const auto& p : mu.vertex) worst = std::max(worst, std::abs(p[0] + p[1] - 1.0));
  for (int e = 0; e < g.m(); ++e) {
    const auto& me = mu.edge[e];
    const auto& mu_u = mu.vertex[g.edges()[e].u];
    const auto& mu_v = mu.vertex[g.edges()[e].v];
    for (int a = 0; a < 2; ++a) {
      worst = std::max(worst, std::abs(me[2 * a] + me[2 * a + 1] - mu_u[a]));
      worst = std::max(worst, std::abs(me[a] + me[2 + a] - mu_v[a]));
    }
  }
  return worst;
}

namespace detail {
inline double xlogy(double x, double y) { return x == 0.0 ? 0.0 : x * std::log(y); }
}  // namespace detail

/// log Z_B(G, mu): vertex energy + edge energy + vertex entropy - edge
/// mutual information, with 0 log 0 = 0.
inline double bethe_log_partition(const Graph& g, const PairwiseModel& model, const BetheMarginals& mu,
                                  double consistency_tol = 1e-8) {
  const double bad = marginal_inconsistency(g, mu);
  if (!(bad <= consistency_tol))
    fail(ErrorKind::InconsistentMarginals, "marginals violate consistency by " + std::to_string(bad));
  double energy_v = 0.0, energy_e = 0.0, entropy_v = 0.0, mutual = 0.0;
  for (int v = 0; v < g.n(); ++v)
    for (int a = 0; a < 2; ++a) {
      const double p = mu.vertex[v][a];
      if (p > 0.0) energy_v += p * model.log_vertex[v][a];
      entropy_v -= detail::xlogy(p, p);
    }
  for (int e = 0; e < g.m(); ++e) {
    const auto& mu_u = mu.vertex[g.edges()[e].u];
    const auto& mu_v = mu.vertex[g.edges()[e].v];
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) {
        const double p = mu.edge[e][2 * a + b];
        if (p == 0.0) continue;
        energy_e += p * model.log_edge(a, b);
        mutual += p * std::log(p / (mu_u[a] * mu_v[b]));
      }
  }
  return energy_v + energy_e + entropy_v - mutual;
}

struct BetheFixedPoint {
  std::string init;
  bool converged = false;
  int sweeps = 0;
  double logZB = -kInf;
};

struct BetheMaxResult {
  double logZB_best = -kInf;
  std::vector<double> distinct_values;  // converged values differing by > 1e-8, ascending
  std::vector<BetheFixedPoint> runs;
  int converged_runs = 0;
};

/// Best Bethe value over BP fixed points reached from the uniform, plus,
/// minus and `restarts` random initialisations. A run that fails to converge
/// is retried once with damping 0.9.
inline BetheMaxResult bethe_max(const Graph& g, const PairwiseModel& model, int restarts, std::uint64_t seed,
                                const BPOptions& opts = {}) {
  struct Start {
    std::string label;
    BPInit mode;
    std::uint64_t seed;
  };
  std::vector<Start> starts{{"uniform", BPInit::Uniform, 0}, {"plus", BPInit::Plus, 0}, {"minus", BPInit::Minus, 0}};
  for (int r = 0; r < restarts; ++r)
    starts.push_back({"random" + std::to_string(r), BPInit::Random, Rng::stream(seed, r).next()});

  BetheMaxResult out;
  out.runs.resize(starts.size());
  parallel_for(starts.size(), [&](std::size_t i) {
    const auto& st = starts[i];
    BPRun run = bp_run(g, model, bp_init(g, st.mode, st.seed), opts);
    if (!run.converged) {
      BPOptions slow = opts;
      slow.damping = 0.9;
      run = bp_run(g, model, bp_init(g, st.mode, st.seed), slow);
    }
    BetheFixedPoint fp;
    fp.init = st.label;
    fp.converged = run.converged;
    fp.sweeps = run.state.iterations;
    if (run.converged) {
      const auto mu = beliefs_from_messages(g, model, run.state);
      fp.logZB = bethe_log_partition(g, model, mu);
    }
    out.runs[i] = fp;
  });
  std::vector<double> values;
  for (const auto& fp : out.runs)
    if (fp.converged) {
      ++out.converged_runs;
      values.push_back(fp.logZB);
      out.logZB_best = std::max(out.logZB_best, fp.logZB);
    }
  if (out.converged_runs == 0) fail(ErrorKind::NoConvergedRun, "no BP initialisation converged");
  std::sort(values.begin(), values.end());
  for (double v : values)
    if (out.distinct_values.empty() || v - out.distinct_values.back() > 1e-8) out.distinct_values.push_back(v);
  return out;
}

// ---------------------------------------------------------------------------
// Log-supermodularity

struct SupermodularityReport {
  bool exhaustive = false;  // f(s & s') f(s | s') >= f(s) f(s') for all pairs
  bool analytic = false;    // psi(+,+) psi(-,-) >= psi(+,-)^2
};

inline constexpr int kSupermodularVertexBudget = 14;

inline SupermodularityReport log_supermodular_check(const Graph& g, const PairwiseModel& model) {
  if (g.n() > kSupermodularVertexBudget)
    fail(ErrorKind::BudgetExceeded, "log-supermodularity check is limited to 14 vertices");
  const int n = g.n();
  const std::uint32_t count = std::uint32_t{1} << n;
  // bit set = spin +, so coordinate-wise max is OR and min is AND.
  std::vector<double> logf(count);
  for (std::uint32_t s = 0; s < count; ++s) {
    double t = 0.0;
    for (int v = 0; v < n; ++v) t += model.log_vertex[v][(s >> v & 1) ? 0 : 1];
    for (const auto& e : g.edges()) t += model.log_edge((s >> e.u & 1) ? 0 : 1, (s >> e.v & 1) ? 0 : 1);
    logf[s] = t;
  }
  double scale = 1.0;
  for (double x : logf) scale = std::max(scale, std::abs(x));
  const double slack = 1e-12 * scale;
  SupermodularityReport r;
  r.exhaustive = true;
  for (std::uint32_t a = 0; a < count && r.exhaustive; ++a)
    for (std::uint32_t b = a + 1; b < count; ++b)
      if (logf[a & b] + logf[a | b] < logf[a] + logf[b] - slack) {
        r.exhaustive = false;
        break;
      }
  r.analytic = model.lpp + model.lmm >= 2.0 * model.lpm - 1e-15;
  return r;
}

inline SupermodularityReport log_supermodular_check(const Graph& g, const TwoSpinWeights& ws) {
  return log_supermodular_check(g, make_pairwise(g, ws));
}

// ---------------------------------------------------------------------------
// Tree pressure of the extended Ising model

struct TreePressureOptions {
  int depth = 30;
  int samples = 2000;
  std::uint64_t seed = 0;
  std::size_t vertex_budget = 5'000'000;  // per sampled tree, explicit recursion only
};

/// Per-tree bracket: root pressure Phi^vx - Phi^e and root magnetisation
/// under free and plus boundary conditions at the truncation depth.
struct TreeSample {
  double phi_free = 0.0, phi_plus = 0.0;
  double mag_free = 0.0, mag_plus = 0.0;
  int root_degree = 0;
};

struct TreePressureEstimate {
  double phi = 0.0;  // mean of the bracket midpoints
  double stderr_ = 0.0;
  double phi_free = 0.0, phi_plus = 0.0;
  double stderr_free = 0.0, stderr_plus = 0.0;
  double mag_free = 0.0, mag_plus = 0.0;
  double max_width = 0.0;  // max over trees of |phi_plus - phi_free|
  int samples = 0;
  int depth = 0;
  int magnetisation_order_violations = 0;  // trees with mag_free > mag_plus (beyond 1e-12)
  int pressure_order_violations = 0;       // trees with phi_free > phi_plus (beyond 1e-12)
};

/// Minimum vertex field k d + h over the degrees the spec can produce.
inline double min_tree_field(const OffspringSpec& spec, const EIsingParams& p, int depth) {
  double lowest = kInf;
  for (int c = spec.root.support_min(); c <= spec.root.support_max(); ++c)
    if (spec.root.probabilities()[c] > 0.0) lowest = std::min(lowest, p.field(c));
  if (depth >= 1 && spec.root.support_max() > 0)
    for (int c = spec.interior.support_min(); c <= spec.interior.support_max(); ++c)
      if (spec.interior.probabilities()[c] > 0.0) lowest = std::min(lowest, p.field(c + 1));
  return lowest;
}

namespace detail {

struct BracketMessage {
  double free = 0.0, plus = 0.0;
};

/// Root functional for one tree given its children's upward messages.
inline TreeSample root_functional(const PairwiseModel& ising, double field, const std::vector<BracketMessage>& kids) {
  TreeSample out;
  out.root_degree = static_cast<int>(kids.size());
  for (int bc = 0; bc < 2; ++bc) {
    double total = 2.0 * field;
    std::array<double, 2> vx{field, -field};
    for (const auto& k : kids) {
      const double odds = bc == 0 ? k.free : k.plus;
      total += odds_shift(ising, odds);
      for (int a = 0; a < 2; ++a) vx[a] += log_edge_sum(ising, a, odds);
    }
    const double phi_vx = lse2(vx[0], vx[1]);
    double phi_e = 0.0;
    for (const auto& k : kids) {
      const double up = bc == 0 ? k.free : k.plus;
      const double down = total - odds_shift(ising, up);  // root -> child cavity
      double pair = -kInf;
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
          pair = lse2(pair, ising.log_edge(a, b) + (a == 0 ? log_plus(down) : log_minus(down)) +
                                (b == 0 ? log_plus(up) : log_minus(up)));
      phi_e += 0.5 * pair;
    }
    const double phi = phi_vx - phi_e;
    const double mag = std::tanh(0.5 * total);
    if (bc == 0) {
      out.phi_free = phi;
      out.mag_free = mag;
    } else {
      out.phi_plus = phi;
      out.mag_plus = mag;
    }
  }
  return out;
}

}  // namespace detail

/// One truncated tree. Vertices at generation `depth` are the boundary: their
/// degree (hence field) still counts their untruncated offspring, and their
/// message is the field alone (free) or pinned to + (plus). When the interior
/// law is deterministic all subtrees at a generation coincide, so messages
/// are computed once per generation instead of per vertex.
inline TreeSample tree_sample(const OffspringSpec& spec, const EIsingParams& p, int depth, Rng& rng,
                              std::size_t vertex_budget = 5'000'000) {
  require(depth >= 1, ErrorKind::InvalidParameter, "tree depth must be >= 1");
  PairwiseModel ising;
  ising.lpp = p.beta_star;
  ising.lpm = -p.beta_star;
  ising.lmm = p.beta_star;

  const int root_children = spec.root.sample(rng);
  std::vector<detail::BracketMessage> kids(root_children);

  if (spec.interior.is_deterministic()) {
    const int c = spec.interior.fixed_count();
    const double field = p.field(c + 1);
    detail::BracketMessage level{2.0 * field, kInf};
    for (int gen = depth - 1; gen >= 1; --gen) {
      const double sf = detail::odds_shift(ising, level.free), sp = detail::odds_shift(ising, level.plus);
      level = {2.0 * field + c * sf, 2.0 * field + c * sp};
    }
    std::fill(kids.begin(), kids.end(), level);
  } else {
    std::size_t visited = 1;
    auto message = [&](auto&& self, int gen) -> detail::BracketMessage {
      if (++visited > vertex_budget) fail(ErrorKind::BudgetExceeded, "sampled tree exceeds vertex budget");
      const int c = spec.interior.sample(rng);
      const double field = p.field(c + 1);
      if (gen == depth) return {2.0 * field, kInf};
      detail::BracketMessage m{2.0 * field, 2.0 * field};
      for (int i = 0; i < c; ++i) {
        const auto child = self(self, gen + 1);
        m.free += detail::odds_shift(ising, child.free);
        m.plus += detail::odds_shift(ising, child.plus);
      }
      return m;
    };
    for (auto& k : kids) k = message(message, 1);
  }
  return detail::root_functional(ising, p.field(root_children), kids);
}

inline TreePressureEstimate tree_pressure_mc(const OffspringSpec& spec, const EIsingParams& p,
                                             const TreePressureOptions& opts) {
  validate(p);
  require(opts.depth >= 1, ErrorKind::InvalidParameter, "depth must be >= 1");
  require(opts.samples >= 1, ErrorKind::InvalidParameter, "need at least one sample");
  const double lowest = min_tree_field(spec, p, opts.depth);
  if (!(lowest > 0.0))
    fail(ErrorKind::SignCondition,
         "vertex fields k*d + h must be positive on the degree support (min " + std::to_string(lowest) + ")");

  std::vector<TreeSample> samples(opts.samples);
  parallel_for(samples.size(), [&](std::size_t i) {
    Rng rng = Rng::stream(opts.seed, i);
    samples[i] = tree_sample(spec, p, opts.depth, rng, opts.vertex_budget);
  });

  TreePressureEstimate est;
  est.samples = opts.samples;
  est.depth = opts.depth;
  auto mean_and_stderr = [&](auto get, double& mean, double& se) {
    double s = 0.0;
    for (const auto& t : samples) s += get(t);
    mean = s / samples.size();
    double ss = 0.0;
    for (const auto& t : samples) ss += (get(t) - mean) * (get(t) - mean);
    se = samples.size() > 1 ? std::sqrt(ss / (samples.size() - 1) / samples.size()) : 0.0;
  };
  mean_and_stderr([](const TreeSample& t) { return 0.5 * (t.phi_free + t.phi_plus); }, est.phi, est.stderr_);
  mean_and_stderr([](const TreeSample& t) { return t.phi_free; }, est.phi_free, est.stderr_free);
  mean_and_stderr([](const TreeSample& t) { return t.phi_plus; }, est.phi_plus, est.stderr_plus);
  double se_unused = 0.0;
  mean_and_stderr([](const TreeSample& t) { return t.mag_free; }, est.mag_free, se_unused);
  mean_and_stderr([](const TreeSample& t) { return t.mag_plus; }, est.mag_plus, se_unused);
  for (const auto& t : samples) {
    est.max_width = std::max(est.max_width, std::abs(t.phi_plus - t.phi_free));
    if (t.mag_free > t.mag_plus + 1e-12) ++est.magnetisation_order_violations;
    if (t.phi_free > t.phi_plus + 1e-12) ++est.pressure_order_violations;
  }
  return est;
}

}  // namespace rclab
