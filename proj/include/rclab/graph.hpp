#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <istream>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "rclab/error.hpp"
#include "rclab/rng.hpp"

namespace rclab {

struct Edge {
  int u = 0;
  int v = 0;

  friend bool operator==(const Edge&, const Edge&) = default;
};

/// Finite simple graph. Construction validates; once built the invariants
/// (no loops, no parallel edges, indices in range, degrees consistent) hold.
class Graph {
 public:
  Graph() = default;

  static Graph build(int n, std::vector<Edge> edges) {
    require(n >= 1, ErrorKind::InvalidParameter, "graph needs at least one vertex");
    Graph g;
    g.n_ = n;
    g.degrees_.assign(n, 0);
    g.adj_.assign(n, {});
    std::set<std::pair<int, int>> seen;
    for (auto& e : edges) {
      if (e.u < 0 || e.u >= n || e.v < 0 || e.v >= n)
        fail(ErrorKind::IndexOutOfRange,
             "edge (" + std::to_string(e.u) + "," + std::to_string(e.v) + ") outside [0," + std::to_string(n) + ")");
      if (e.u == e.v) fail(ErrorKind::SelfLoop, "self-loop at vertex " + std::to_string(e.u));
      if (e.u > e.v) std::swap(e.u, e.v);
      if (!seen.emplace(e.u, e.v).second)
        fail(ErrorKind::DuplicateEdge, "edge (" + std::to_string(e.u) + "," + std::to_string(e.v) + ") repeated");
      ++g.degrees_[e.u];
      ++g.degrees_[e.v];
      g.adj_[e.u].push_back(e.v);
      g.adj_[e.v].push_back(e.u);
    }
    g.edges_ = std::move(edges);
    return g;
  }

  int n() const { return n_; }
  int m() const { return static_cast<int>(edges_.size()); }
  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<int>& degrees() const { return degrees_; }
  int degree(int v) const { return degrees_[v]; }
  const std::vector<int>& neighbors(int v) const { return adj_[v]; }

  int min_degree() const { return *std::min_element(degrees_.begin(), degrees_.end()); }

  /// Number of connected components.
  int component_count() const {
    std::vector<int> parent(n_);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int x) {
      while (parent[x] != x) x = parent[x] = parent[parent[x]];
      return x;
    };
    int c = n_;
    for (const auto& e : edges_) {
      const int a = find(e.u), b = find(e.v);
      if (a != b) {
        parent[a] = b;
        --c;
      }
    }
    return c;
  }

  bool is_forest() const { return m() == n_ - component_count(); }

 private:
  int n_ = 0;
  std::vector<Edge> edges_;
  std::vector<int> degrees_;
  std::vector<std::vector<int>> adj_;
};

inline Graph build_graph(int n, std::vector<Edge> edges) { return Graph::build(n, std::move(edges)); }

/// Vertex-disjoint union; H's vertices are shifted by G.n().
inline Graph disjoint_union(const Graph& g, const Graph& h) {
  std::vector<Edge> edges = g.edges();
  for (const auto& e : h.edges()) edges.push_back({e.u + g.n(), e.v + g.n()});
  return build_graph(g.n() + h.n(), std::move(edges));
}

inline Graph path_graph(int n) {
  std::vector<Edge> edges;
  for (int i = 0; i + 1 < n; ++i) edges.push_back({i, i + 1});
  return build_graph(n, std::move(edges));
}

inline Graph cycle_graph(int n) {
  std::vector<Edge> edges;
  for (int i = 0; i < n; ++i) edges.push_back({i, (i + 1) % n});
  return build_graph(n, std::move(edges));
}

inline Graph complete_graph(int n) {
  std::vector<Edge> edges;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) edges.push_back({i, j});
  return build_graph(n, std::move(edges));
}

// ---------------------------------------------------------------------------
// Text format: "n m" then m lines "u v", 0-based.

inline Graph read_graph(std::istream& in) {
  long long n = 0, m = 0;
  if (!(in >> n >> m)) fail(ErrorKind::ParseError, "expected header 'n m'");
  if (n < 1 || m < 0) fail(ErrorKind::ParseError, "bad header values");
  std::vector<Edge> edges;
  edges.reserve(static_cast<std::size_t>(m));
  for (long long i = 0; i < m; ++i) {
    long long u = 0, v = 0;
    if (!(in >> u >> v)) fail(ErrorKind::ParseError, "expected " + std::to_string(m) + " edge lines, got " + std::to_string(i));
    if (u < 0 || v < 0 || u >= n || v >= n)
      fail(ErrorKind::IndexOutOfRange, "edge line " + std::to_string(i + 1) + " out of range");
    edges.push_back({static_cast<int>(u), static_cast<int>(v)});
  }
  std::string trailing;
  if (in >> trailing) fail(ErrorKind::ParseError, "unexpected trailing content '" + trailing + "'");
  return build_graph(static_cast<int>(n), std::move(edges));
}

inline Graph parse_graph(const std::string& text) {
  std::istringstream in(text);
  return read_graph(in);
}

inline void write_graph(std::ostream& out, const Graph& g) {
  out << g.n() << ' ' << g.m() << '\n';
  for (const auto& e : g.edges()) out << e.u << ' ' << e.v << '\n';
}

// ---------------------------------------------------------------------------
// Random generators

/// Uniform simple d-regular graph: configuration-model pairing, resampled in
/// full whenever it produces a loop or a multi-edge.
inline Graph gen_random_regular(int n, int d, std::uint64_t seed, int max_attempts = 100000) {
  require(n >= 1 && d >= 0, ErrorKind::InvalidParameter, "need n >= 1, d >= 0");
  if ((static_cast<long long>(n) * d) % 2 != 0)
    fail(ErrorKind::ParityError, "n*d = " + std::to_string(static_cast<long long>(n) * d) + " is odd");
  require(d < n, ErrorKind::InvalidParameter, "need d < n");
  Rng rng(seed);
  std::vector<int> points(static_cast<std::size_t>(n) * d);
  std::vector<std::uint64_t> seen;
  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    for (std::size_t i = 0; i < points.size(); ++i) points[i] = static_cast<int>(i / d);
    for (std::size_t i = points.size(); i > 1; --i) std::swap(points[i - 1], points[rng.below(i)]);
    std::vector<Edge> edges;
    edges.reserve(points.size() / 2);
    seen.clear();
    bool simple = true;
    for (std::size_t i = 0; i < points.size(); i += 2) {
      int u = points[i], v = points[i + 1];
      if (u == v) {
        simple = false;
        break;
      }
      if (u > v) std::swap(u, v);
      seen.push_back(static_cast<std::uint64_t>(u) * n + v);
      edges.push_back({u, v});
    }
    if (!simple) continue;
    std::sort(seen.begin(), seen.end());
    if (std::adjacent_find(seen.begin(), seen.end()) != seen.end()) continue;
    return build_graph(n, std::move(edges));
  }
  fail(ErrorKind::GenerationFailure, "no simple pairing after " + std::to_string(max_attempts) + " attempts");
}

/// Uniform graph with exactly m distinct edges on n vertices.
inline Graph gen_random_gnm(int n, int m, std::uint64_t seed) {
  const long long slots = static_cast<long long>(n) * (n - 1) / 2;
  require(m >= 0 && m <= slots, ErrorKind::InvalidParameter, "edge count out of range");
  std::vector<Edge> all;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) all.push_back({i, j});
  Rng rng(seed);
  for (int i = 0; i < m; ++i) std::swap(all[i], all[i + rng.below(all.size() - i)]);
  all.resize(m);
  return build_graph(n, std::move(all));
}

/// Random labelled tree: each vertex i >= 1 attaches to a uniform earlier vertex.
inline Graph gen_random_tree(int n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Edge> edges;
  for (int i = 1; i < n; ++i) edges.push_back({static_cast<int>(rng.below(i)), i});
  return build_graph(n, std::move(edges));
}

// ---------------------------------------------------------------------------
// Offspring laws and Galton-Watson trees

class OffspringLaw {
 public:
  static OffspringLaw deterministic(int c) {
    require(c >= 0, ErrorKind::InvalidParameter, "offspring count must be >= 0");
    OffspringLaw law;
    law.probs_.assign(c + 1, 0.0);
    law.probs_[c] = 1.0;
    law.fixed_ = c;
    return law;
  }

  static OffspringLaw tabulated(std::vector<double> probs) {
    require(!probs.empty(), ErrorKind::InvalidParameter, "empty offspring table");
    double sum = 0.0;
    for (double p : probs) {
      require(p >= 0.0, ErrorKind::InvalidParameter, "negative offspring probability");
      sum += p;
    }
    require(std::abs(sum - 1.0) <= 1e-12, ErrorKind::InvalidParameter, "offspring probabilities must sum to 1");
    OffspringLaw law;
    law.probs_ = std::move(probs);
    int support = 0, last = -1;
    for (int c = 0; c < static_cast<int>(law.probs_.size()); ++c)
      if (law.probs_[c] > 0.0) {
        ++support;
        last = c;
      }
    if (support == 1) law.fixed_ = last;
    return law;
  }

  bool is_deterministic() const { return fixed_ >= 0; }
  int fixed_count() const { return fixed_; }
  const std::vector<double>& probabilities() const { return probs_; }

  int support_min() const {
    for (int c = 0; c < static_cast<int>(probs_.size()); ++c)
      if (probs_[c] > 0.0) return c;
    return 0;
  }
  int support_max() const {
    for (int c = static_cast<int>(probs_.size()) - 1; c >= 0; --c)
      if (probs_[c] > 0.0) return c;
    return 0;
  }

  double mean() const {
    double m = 0.0;
    for (std::size_t c = 0; c < probs_.size(); ++c) m += static_cast<double>(c) * probs_[c];
    return m;
  }

  int sample(Rng& rng) const {
    if (fixed_ >= 0) return fixed_;
    const double u = rng.uniform();
    double acc = 0.0;
    for (int c = 0; c < static_cast<int>(probs_.size()); ++c) {
      acc += probs_[c];
      if (u < acc) return c;
    }
    return support_max();
  }

 private:
  std::vector<double> probs_;
  int fixed_ = -1;
};

/// Root and non-root offspring laws. The local limit of a d-regular graph is
/// root d, interior d-1.
struct OffspringSpec {
  OffspringLaw root;
  OffspringLaw interior;

  static OffspringSpec uniform(const OffspringLaw& law) { return {law, law}; }
  static OffspringSpec regular_tree(int d) {
    return {OffspringLaw::deterministic(d), OffspringLaw::deterministic(d - 1)};
  }

  bool is_deterministic() const { return root.is_deterministic() && interior.is_deterministic(); }
};

struct RootedTree {
  Graph graph;
  int root = 0;
  std::vector<int> parent;  // -1 at the root
  std::vector<int> depth;
};

inline RootedTree gen_gw_tree(const OffspringSpec& spec, int depth, std::uint64_t seed,
                              std::size_t max_vertices = 5'000'000) {
  require(depth >= 0, ErrorKind::InvalidParameter, "depth must be >= 0");
  Rng rng(seed);
  RootedTree t;
  t.parent.push_back(-1);
  t.depth.push_back(0);
  std::vector<Edge> edges;
  std::vector<int> frontier{0};
  for (int level = 0; level < depth && !frontier.empty(); ++level) {
    std::vector<int> next;
    for (int v : frontier) {
      const int c = (v == 0 ? spec.root : spec.interior).sample(rng);
      for (int i = 0; i < c; ++i) {
        const int child = static_cast<int>(t.parent.size());
        if (t.parent.size() >= max_vertices) fail(ErrorKind::BudgetExceeded, "tree exceeds vertex budget");
        t.parent.push_back(v);
        t.depth.push_back(level + 1);
        edges.push_back({v, child});
        next.push_back(child);
      }
    }
    frontier = std::move(next);
  }
  t.graph = build_graph(static_cast<int>(t.parent.size()), std::move(edges));
  return t;
}

// ---------------------------------------------------------------------------
// Cycle statistics

inline constexpr int kCyclicEnumerationBudget = 22;

/// L(G): max over A subset of E of the number of components of (V, A) that
/// contain a cycle. Exhaustive over 2^|E| subsets; stops early once the
/// count reaches min(floor(n/3), cyclomatic number), which no subset can beat.
inline int cyclic_components_max(const Graph& g, int edge_budget = kCyclicEnumerationBudget) {
  const int m = g.m(), n = g.n();
  if (m > edge_budget)
    fail(ErrorKind::BudgetExceeded, std::to_string(m) + " edges exceeds enumeration budget " + std::to_string(edge_budget));
  const int cyclomatic = m - n + g.component_count();
  const int ceiling = std::min(n / 3, cyclomatic);
  if (ceiling <= 0) return 0;
  std::vector<int> parent(n), edge_count(n), size(n);
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  const auto& edges = g.edges();
  int best = 0;
  const std::uint64_t total = std::uint64_t{1} << m;
  for (std::uint64_t mask = 1; mask < total; ++mask) {
    // A subset with fewer than 3 * (best + 1) edges cannot beat best.
    if (std::popcount(mask) < 3 * (best + 1)) continue;
    std::iota(parent.begin(), parent.end(), 0);
    std::fill(edge_count.begin(), edge_count.end(), 0);
    std::fill(size.begin(), size.end(), 1);
    for (std::uint64_t bits = mask; bits; bits &= bits - 1) {
      const auto& e = edges[std::countr_zero(bits)];
      int a = find(e.u), b = find(e.v);
      if (a != b) {
        if (size[a] < size[b]) std::swap(a, b);
        parent[b] = a;
        size[a] += size[b];
        edge_count[a] += edge_count[b] + 1;
      } else {
        ++edge_count[a];
      }
    }
    int cyclic = 0;
    for (int v = 0; v < n; ++v)
      if (parent[v] == v && edge_count[v] >= size[v]) ++cyclic;
    if (cyclic > best) {
      best = cyclic;
      if (best == ceiling) break;
    }
  }
  return best;
}

/// All simple cycles of the given length, each as a vertex bitmask (n <= 64).
inline std::vector<std::uint64_t> cycles_of_length(const Graph& g, int length, std::size_t cycle_budget = 200000) {
  require(g.n() <= 64, ErrorKind::BudgetExceeded, "cycle search supports at most 64 vertices");
  std::vector<std::uint64_t> out;
  if (length < 3 || length > g.n()) return out;
  std::vector<int> path;
  // Canonical form: start at the cycle's smallest vertex, and the second
  // vertex is smaller than the last, so each cycle is found exactly once.
  auto extend = [&](auto&& self, int start, std::uint64_t used) -> void {
    const int tail = path.back();
    if (static_cast<int>(path.size()) == length) {
      if (path[1] < path.back()) {
        for (int w : g.neighbors(tail))
          if (w == start) {
            out.push_back(used);
            if (out.size() > cycle_budget) fail(ErrorKind::BudgetExceeded, "too many cycles to enumerate");
            break;
          }
      }
      return;
    }
    for (int w : g.neighbors(tail)) {
      if (w <= start || (used >> w & 1)) continue;
      path.push_back(w);
      self(self, start, used | (std::uint64_t{1} << w));
      path.pop_back();
    }
  };
  for (int s = 0; s < g.n(); ++s) {
    path.assign(1, s);
    extend(extend, s, std::uint64_t{1} << s);
  }
  return out;
}

/// L_i(G): maximum number of vertex-disjoint cycles of length i.
inline int disjoint_cycles_max(const Graph& g, int length) {
  require(length >= 3, ErrorKind::InvalidParameter, "simple graphs have no cycles shorter than 3");
  const auto cycles = cycles_of_length(g, length);
  if (cycles.empty()) return 0;
  const int hard_cap = g.n() / length;
  int best = 0;
  auto search = [&](auto&& self, std::size_t from, std::uint64_t used, int count) -> void {
    if (count > best) best = count;
    if (best == hard_cap) return;
    const int free_vertices = g.n() - std::popcount(used);
    if (count + free_vertices / length <= best) return;
    for (std::size_t i = from; i < cycles.size(); ++i) {
      if (cycles[i] & used) continue;
      self(self, i + 1, used | cycles[i], count + 1);
      if (best == hard_cap) return;
    }
  };
  search(search, 0, 0, 0);
  return best;
}

}  // namespace rclab
