#include <gtest/gtest.h>

#include <cmath>
#include <functional>

#include "oracles.hpp"
#include "rclab/exact.hpp"

using namespace rclab;

namespace {

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "expected an rclab::Error";
  return ErrorKind::ParseError;
}

Graph random_graph(Rng& rng, int max_n, int max_m) {
  const int n = 1 + static_cast<int>(rng.below(max_n));
  const int m = static_cast<int>(rng.below(std::min(max_m, n * (n - 1) / 2) + 1));
  return gen_random_gnm(n, m, rng.next());
}

}  // namespace

TEST(RCPartition, TrianglePinned) {
  const Graph tri = complete_graph(3);
  EXPECT_NEAR(std::exp(rc_partition(tri, {3.0, 1.0, 0.0}).log), 66.0, 66.0 * 1e-12);
  EXPECT_NEAR(std::exp(rank2_partition(tri, {3.0, 1.0, 0.0}).log), 65.0, 65.0 * 1e-12);
}

TEST(RCPartition, SingleEdgePinned) {
  const Graph edge = path_graph(2);
  EXPECT_NEAR(std::exp(rc_partition(edge, {2.0, 1.0, 0.0}).log), 6.0, 6.0 * 1e-12);
  EXPECT_NEAR(std::exp(rank2_partition(edge, {2.0, 1.0, 0.0}).log), 6.0, 6.0 * 1e-12);
}

TEST(RCPartition, EdgelessClosedForm) {
  for (double B : {0.0, 0.7, 2.5}) {
    const double expected = 5.0 * std::log1p(2.0 * std::exp(-B));
    EXPECT_NEAR(rc_partition(build_graph(5, {}), {3.0, 1.5, B}).log, expected, 1e-12);
    EXPECT_NEAR(rc_partition(complete_graph(5), {3.0, 0.0, B}).log, expected, 1e-12);
  }
}

TEST(RCPartition, MatchesBruteForce) {
  Rng rng(17);
  for (int trial = 0; trial < 60; ++trial) {
    const Graph g = random_graph(rng, 8, 12);
    const double q = rng.uniform(0.5, 6.0), w = rng.uniform(0.0, 4.0), B = rng.uniform(-1.0, 3.0);
    EXPECT_NEAR(rc_partition(g, {q, w, B}).log, std::log(oracle::rc_partition(g, q, w, B)), 1e-11)
        << "trial " << trial;
  }
}

TEST(RCPartition, ZeroFieldIsFortuinKasteleyn) {
  Rng rng(5);
  for (int trial = 0; trial < 30; ++trial) {
    const Graph g = random_graph(rng, 8, 12);
    const double q = rng.uniform(1.0, 5.0), w = rng.uniform(0.0, 3.0);
    // at B = 0 each component contributes 1 + (q-1) = q
    EXPECT_NEAR(rc_partition(g, {q, w, 0.0}).log, rc_partition_no_field(g, q, w).log, 1e-11);
  }
}

TEST(RCPartition, MultiplicativeOverDisjointUnion) {
  const Graph a = gen_random_gnm(5, 6, 1), b = gen_random_gnm(4, 4, 2);
  const RCParams p{3.5, 1.2, 0.4};
  EXPECT_NEAR(rc_partition(disjoint_union(a, b), p).log, rc_partition(a, p).log + rc_partition(b, p).log, 1e-12);
  EXPECT_NEAR(rank2_partition(disjoint_union(a, b), p).log,
              rank2_partition(a, p).log + rank2_partition(b, p).log, 1e-12);
}

TEST(RCPartition, Errors) {
  EXPECT_EQ(kind_of([] { rc_partition(complete_graph(3), {0.0, 1.0, 0.0}); }), ErrorKind::InvalidQ);
  EXPECT_EQ(kind_of([] { rc_partition(complete_graph(3), {2.0, -1.0, 0.0}); }), ErrorKind::InvalidParameter);
  EXPECT_EQ(kind_of([] { rc_partition(gen_random_gnm(12, 25, 1), {2.0, 1.0, 0.0}); }), ErrorKind::BudgetExceeded);
  EXPECT_EQ(kind_of([] { rank2_partition(complete_graph(3), {1.0, 1.0, 0.0}); }), ErrorKind::InvalidQ);
  EXPECT_EQ(kind_of([] { rank2_partition(build_graph(25, {}), {3.0, 1.0, 0.0}); }), ErrorKind::BudgetExceeded);
  EXPECT_EQ(kind_of([] { potts_partition(build_graph(13, {}), 4, 1.0, 0.0); }), ErrorKind::BudgetExceeded);
  EXPECT_EQ(kind_of([] { potts_partition(complete_graph(3), 1, 1.0, 0.0); }), ErrorKind::InvalidQ);
}

TEST(Potts, MatchesBruteForceAndRandomCluster) {
  Rng rng(23);
  for (int trial = 0; trial < 45; ++trial) {
    const int q = 2 + trial % 3;
    const Graph g = random_graph(rng, 7, 10);
    const double beta = rng.uniform(0.0, 2.0), B = rng.uniform(-2.0, 2.0);
    const double logZp = potts_partition(g, q, beta, B).log;
    EXPECT_NEAR(logZp, std::log(oracle::potts_partition(g, q, beta, B)), 1e-11);
    EXPECT_NEAR(logZp, B * g.n() + rc_partition(g, {double(q), std::expm1(beta), B}).log, 1e-10);
  }
}

TEST(Rank2, MatchesBruteForce) {
  Rng rng(29);
  for (int trial = 0; trial < 40; ++trial) {
    const Graph g = random_graph(rng, 10, 18);
    const double q = rng.uniform(1.2, 6.0), w = rng.uniform(0.0, 4.0), B = rng.uniform(-1.0, 3.0);
    EXPECT_NEAR(rank2_partition(g, {q, w, B}).log, std::log(oracle::rank2_partition(g, q, w, B)), 1e-11);
  }
}

TEST(Rank2, TwoSpinAndEIsingMatchBruteForce) {
  Rng rng(31);
  for (int trial = 0; trial < 40; ++trial) {
    const Graph g = random_graph(rng, 9, 14);
    const TwoSpinWeights ws{rng.uniform(0.2, 3.0), rng.uniform(0.2, 3.0), rng.uniform(0.2, 3.0),
                            rng.uniform(0.2, 3.0), rng.uniform(0.2, 3.0)};
    EXPECT_NEAR(two_spin_partition(g, ws).log,
                std::log(oracle::two_spin_partition(g, ws.psi_pp, ws.psi_pm, ws.psi_mm, ws.psibar_p, ws.psibar_m)),
                1e-11);
    const EIsingParams p{rng.uniform(0.0, 1.0), rng.uniform(-0.5, 0.5), rng.uniform(-1.0, 1.0)};
    EXPECT_NEAR(eising_partition(g, p).log, std::log(oracle::eising_partition(g, p.beta_star, p.k, p.h)), 1e-11);
  }
}

TEST(Rank2, ForestsAndQTwoAreExact) {
  Rng rng(37);
  for (int trial = 0; trial < 40; ++trial) {
    const Graph t = gen_random_tree(1 + static_cast<int>(rng.below(12)), rng.next());
    const RCParams p{rng.uniform(2.0, 6.0), rng.uniform(0.0, 5.0), rng.uniform(0.0, 3.0)};
    EXPECT_NEAR(rc_partition(t, p).log, rank2_partition(t, p).log, 1e-10);
    const Graph g = random_graph(rng, 9, 16);
    const RCParams p2{2.0, rng.uniform(0.0, 5.0), rng.uniform(-1.0, 3.0)};
    EXPECT_NEAR(rc_partition(g, p2).log, rank2_partition(g, p2).log, 1e-10);
  }
}

TEST(Sandwich, TriangleReport) {
  const SandwichReport r = sandwich_check(complete_graph(3), {3.0, 1.0, 0.0});
  EXPECT_EQ(r.L, 1);
  EXPECT_NEAR(r.logBoundGap, std::log(66.0 / 65.0), 1e-12);
  EXPECT_NEAR(r.logUpper, std::log(65.0) + std::log(3.0), 1e-12);
  EXPECT_TRUE(r.pass);
}

TEST(Sandwich, HoldsOnRandomGraphs) {
  Rng rng(41);
  for (int trial = 0; trial < 40; ++trial) {
    const Graph g = random_graph(rng, 9, 14);
    const RCParams p{rng.uniform(2.0, 6.0), rng.uniform(0.0, 5.0), rng.uniform(0.0, 3.0)};
    const SandwichReport r = sandwich_check(g, p);
    EXPECT_TRUE(r.lower_ok && r.upper_ok) << "trial " << trial;
    EXPECT_EQ(r.L, oracle::cyclic_components_max(g));
  }
}

TEST(Sandwich, Preconditions) {
  EXPECT_EQ(kind_of([] { sandwich_check(complete_graph(3), {1.5, 1.0, 0.0}); }), ErrorKind::InvalidQ);
  EXPECT_EQ(kind_of([] { sandwich_check(complete_graph(3), {3.0, 1.0, -0.5}); }), ErrorKind::InvalidParameter);
}

TEST(InducedSubgraph, Relabels) {
  const Graph g = induced_subgraph(cycle_graph(5), 0b10111);
  EXPECT_EQ(g.n(), 4);
  EXPECT_EQ(g.m(), 3);  // edges 0-1, 1-2, 4-0 survive
}

TEST(EnumerationDeterminism, IndependentOfWorkerCount) {
  const Graph g = gen_random_gnm(10, 18, 3);
  const RCParams p{3.3, 1.7, 0.8};
  const double a = rc_partition(g, p).log;
  setenv("RC_LAB_THREADS", "1", 1);
  const double b = rc_partition(g, p).log;
  unsetenv("RC_LAB_THREADS");
  EXPECT_EQ(a, b);
}
