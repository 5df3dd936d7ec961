#include <gtest/gtest.h>

#include <numeric>
#include <random>

#include <bcamap/oracle.hpp>
#include <bcamap/random_models.hpp>
#include <bcamap/selection.hpp>
#include <bcamap/updates.hpp>

namespace bcamap {

namespace {

GraphicalModel edge_model(std::vector<cost> tu, std::vector<cost> tv, std::vector<cost> table)
{
  ModelBuilder b({tu.size(), tv.size()});
  b.set_unary(0, std::move(tu));
  b.set_unary(1, std::move(tv));
  b.add_edge(0, 1, std::move(table));
  return b.build();
}

std::vector<cost> slot(const Reparametrization& phi, index e, int side)
{
  const auto s = phi.slot(e, side);
  return {s.begin(), s.end()};
}

std::vector<cost> edge_table(const GraphicalModel& m, const Reparametrization& phi, index e)
{
  std::vector<cost> t;
  const auto& ed = m.edge(e);
  for (index s = 0; s < m.label_count(ed.u); ++s)
    for (index x = 0; x < m.label_count(ed.v); ++x)
      t.push_back(reparametrized_pairwise(m, phi, ed.u, ed.v, s, x));
  return t;
}

void expect_near(const std::vector<cost>& a, const std::vector<cost>& b, cost tol = 1e-12)
{
  ASSERT_EQ(a.size(), b.size());
  for (index k = 0; k < a.size(); ++k)
    EXPECT_NEAR(a[k], b[k], tol) << "at " << k;
}

/// Exact optimum of a 2-node model.
cost pair_optimum(const GraphicalModel& m)
{
  return brute_force_min(m).value;
}

std::vector<cost> all_unaries(const GraphicalModel& m, const Reparametrization& phi)
{
  std::vector<cost> out;
  for (index u = 0; u < m.node_count(); ++u)
    for (cost c : reparametrized_unary(m, phi, u))
      out.push_back(c);
  return out;
}

GraphicalModel grid(index rows, index cols)
{
  ModelBuilder b(std::vector<index>(rows * cols, 1));
  for (index r = 0; r < rows; ++r)
    for (index c = 0; c < cols; ++c) {
      const index u = r * cols + c;
      if (c + 1 < cols)
        b.add_edge(u, u + 1, {0});
      if (r + 1 < rows)
        b.add_edge(u, u + cols, {0});
    }
  return b.build();
}

} // namespace

TEST(NodeAggregate, HandExample)
{
  const auto m = edge_model({0, 0}, {0, 0}, {2, 3, 1, 4});
  Reparametrization phi(m);
  MessageCounter c;
  node_aggregate(m, phi, 0, &c);
  expect_near(slot(phi, 0, 0), {-2, -1});
  expect_near(reparametrized_unary(m, phi, 0), {2, 1});
  EXPECT_EQ(c.count(), 1u);
}

TEST(NodeAggregate, FixedPointWhenRowMinimaAreZero)
{
  const auto m = edge_model({1, 2}, {0, 0}, {0, 3, 4, 0});
  Reparametrization phi(m);
  node_aggregate(m, phi, 0);
  EXPECT_EQ(phi, Reparametrization(m));
}

TEST(NodeAggregate, ZeroesRowMinimaAndRaisesDual)
{
  std::mt19937_64 rng(1);
  for (int k = 0; k < 50; ++k) {
    const auto m = random_model(5, random_graph_edges(5, 0.7, rng), 1, 3, rng);
    Reparametrization phi(m);
    for (index u = 0; u < m.node_count(); ++u) {
      const cost before = dual_value(m, phi);
      node_aggregate(m, phi, u);
      EXPECT_GE(dual_value(m, phi), before - 1e-9);
      EXPECT_TRUE(check_feasible(m, phi));
      for (const auto& inc : m.neighbors(u))
        for (index s = 0; s < m.label_count(u); ++s) {
          cost best = std::numeric_limits<cost>::infinity();
          for (index t = 0; t < m.label_count(inc.neighbor); ++t)
            best = std::min(best, reparametrized_pairwise(m, phi, u, inc.neighbor, s, t));
          EXPECT_NEAR(best, 0, 1e-9);
        }
    }
  }
}

TEST(NodeDistribute, HandExample)
{
  const auto m = edge_model({2, 0}, {0, 0}, {0, 0, 0, 0});
  Reparametrization phi(m);
  node_distribute(m, phi, 0, {1.0});
  expect_near(reparametrized_unary(m, phi, 0), {0, 0});
  expect_near(slot(phi, 0, 0), {2, 0});
}

TEST(NodeDistribute, ZeroWeightsChangeNothing)
{
  const auto m = edge_model({2, 1}, {0, 0}, {0, 1, 1, 0});
  Reparametrization phi(m);
  node_distribute(m, phi, 0, {0.0});
  EXPECT_EQ(phi, Reparametrization(m));
}

TEST(NodeDistribute, RejectsBadWeights)
{
  const auto m = grid(2, 2);
  Reparametrization phi(m);
  EXPECT_THROW(node_distribute(m, phi, 0, {0.7, 0.7}), usage_error);
  EXPECT_THROW(node_distribute(m, phi, 0, {-0.1, 0.5}), usage_error);
  EXPECT_THROW(node_distribute(m, phi, 0, {0.5}), usage_error);
}

TEST(NodeDistribute, PreservesDualAndArgmin)
{
  std::mt19937_64 rng(2);
  for (int k = 0; k < 50; ++k) {
    const auto m = random_model(5, random_graph_edges(5, 0.7, rng), 1, 4, rng);
    Reparametrization phi(m);
    for (WeightKind kind : {WeightKind::MSD, WeightKind::CMP, WeightKind::DP, WeightKind::TRWS}) {
      const WeightScheme scheme(kind, identity_order(m.node_count()));
      for (index u = 0; u < m.node_count(); ++u) {
        const auto w = weights_for(scheme, m, u);
        if (std::accumulate(w.begin(), w.end(), 0.0) > 1)
          continue; // DP weights only fit nodes with one later neighbor
        node_aggregate(m, phi, u);
        const cost before = dual_value(m, phi);
        const auto y = primal_round(m, phi);
        node_distribute(m, phi, u, w);
        EXPECT_NEAR(dual_value(m, phi), before, 1e-9);
        EXPECT_TRUE(check_feasible(m, phi));
        // the argmin survives, possibly as a tie
        const auto th = reparametrized_unary(m, phi, u);
        EXPECT_NEAR(th[y[u]], *std::min_element(th.begin(), th.end()), 1e-9);
      }
    }
  }
}

TEST(Weights, PaperSettings)
{
  const auto m = grid(3, 3);
  const index center = 4; // four neighbors
  const auto msd = weights_for(WeightScheme(WeightKind::MSD), m, center);
  for (cost w : msd)
    EXPECT_DOUBLE_EQ(w, 0.25);
  const auto cmp = weights_for(WeightScheme(WeightKind::CMP), m, center);
  for (cost w : cmp)
    EXPECT_DOUBLE_EQ(w, 0.2);

  const auto order = identity_order(9);
  const auto trws = weights_for(WeightScheme(WeightKind::TRWS, order), m, center);
  const auto dp = weights_for(WeightScheme(WeightKind::DP, order), m, center);
  const auto nb = m.neighbors(center);
  for (index k = 0; k < nb.size(); ++k) {
    EXPECT_DOUBLE_EQ(trws[k], nb[k].neighbor > center ? 0.5 : 0.0);
    EXPECT_DOUBLE_EQ(dp[k], nb[k].neighbor > center ? 1.0 : 0.0);
  }
}

TEST(Weights, TrwsLeavesExcessWhenMoreIncoming)
{
  const auto m = grid(2, 2);
  // node 3 has two earlier neighbors and no later one
  const auto w = weights_for(WeightScheme(WeightKind::TRWS, identity_order(4)), m, 3);
  for (cost x : w)
    EXPECT_EQ(x, 0);
}

TEST(Weights, OrderRequired)
{
  const auto m = grid(2, 2);
  EXPECT_THROW(weights_for(WeightScheme(WeightKind::TRWS), m, 0), usage_error);
  EXPECT_THROW(weights_for(WeightScheme(WeightKind::DP), m, 0), usage_error);
  EXPECT_THROW(WeightScheme(WeightKind::DP, {0, 0, 1, 2}), usage_error);
  EXPECT_THROW(weights_for(WeightScheme(WeightKind::DP, {1, 0}), m, 0), usage_error);
}

TEST(Mplp, HandExample)
{
  const auto m = edge_model({0, 0}, {0, 0}, {0, 2, 3, 1});
  Reparametrization phi(m);
  MessageCounter c;
  mplp_update(m, phi, 0, 1, &c);
  expect_near(slot(phi, 0, 0), {0, -0.5});
  expect_near(reparametrized_unary(m, phi, 0), {0, 0.5});
  expect_near(reparametrized_unary(m, phi, 1), {0, 0.25});
  EXPECT_EQ(c.count(), 2u);
}

TEST(Mplp, FixedPointWithZeroMinima)
{
  const auto m = edge_model({0, 0}, {0, 0}, {0, 1, 1, 0});
  Reparametrization phi(m);
  mplp_update(m, phi, 0, 1);
  expect_near(phi.values(), Reparametrization(m).values());
}

TEST(Handshake, HandExample)
{
  const auto m = edge_model({0, 0}, {0, 0}, {0, 2, 3, 1});
  Reparametrization phi(m);
  MessageCounter c;
  handshake_update(m, phi, 0, 1, &c);
  expect_near(reparametrized_unary(m, phi, 0), {0, 0.5});
  expect_near(reparametrized_unary(m, phi, 1), {0, 0.5});
  expect_near(edge_table(m, phi, 0), {0, 1.5, 2.5, 0});
  EXPECT_EQ(c.count(), 3u);
}

TEST(EdgeUpdates, ReachTwoNodeOptimum)
{
  std::mt19937_64 rng(4);
  for (int k = 0; k < 200; ++k) {
    const auto m = random_model(2, chain_edges(2), 1, 4, rng);
    const cost opt = pair_optimum(m);
    Reparametrization a(m);
    mplp_update(m, a, 0, 1);
    EXPECT_NEAR(dual_value(m, a), opt, 1e-9);
    Reparametrization b(m);
    handshake_update(m, b, 1, 0);
    EXPECT_NEAR(dual_value(m, b), opt, 1e-9);
    EXPECT_TRUE(check_feasible(m, a));
    EXPECT_TRUE(check_feasible(m, b));
  }
}

TEST(Handshake, DominatesMplpAndIsIdempotent)
{
  std::mt19937_64 rng(5);
  for (int k = 0; k < 200; ++k) {
    const auto m = random_model(2, chain_edges(2), 2, 4, rng);
    Reparametrization mp(m);
    mplp_update(m, mp, 0, 1);
    Reparametrization hs(m);
    handshake_update(m, hs, 0, 1);
    const auto a = all_unaries(m, mp);
    const auto b = all_unaries(m, hs);
    for (index i = 0; i < a.size(); ++i)
      EXPECT_GE(b[i], a[i] - 1e-12);

    const auto once = all_unaries(m, hs);
    const auto table = edge_table(m, hs, 0);
    handshake_update(m, hs, 0, 1);
    expect_near(all_unaries(m, hs), once, 1e-9);
    expect_near(edge_table(m, hs, 0), table, 1e-9);
  }
}

TEST(Handshake, IndependentOfIncomingSlot)
{
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<cost> noise(-3, 3);
  for (int k = 0; k < 100; ++k) {
    const auto m = random_model(2, chain_edges(2), 2, 4, rng);
    Reparametrization a(m);
    mplp_update(m, a, 0, 1); // some feasible starting point
    Reparametrization b = a;
    for (auto& x : b.slot(0, 1))
      x += noise(rng);
    handshake_update(m, a, 0, 1);
    handshake_update(m, b, 0, 1);
    expect_near(all_unaries(m, a), all_unaries(m, b), 1e-9);
    expect_near(edge_table(m, a, 0), edge_table(m, b, 0), 1e-9);
  }
}

TEST(Dp, HandExample)
{
  const auto m = edge_model({1, 0}, {0, 0}, {0, 2, 3, 1});
  Reparametrization phi(m);
  MessageCounter c;
  dp_update(m, phi, 0, 1, &c);
  expect_near(reparametrized_unary(m, phi, 0), {0, 0});
  expect_near(reparametrized_unary(m, phi, 1), {1, 1});
  expect_near(edge_table(m, phi, 0), {0, 2, 2, 0});
  EXPECT_EQ(c.count(), 1u);
}

TEST(Dp, ZeroCostsUnchanged)
{
  const auto m = edge_model({0, 0}, {0, 0}, {0, 0, 0, 0});
  Reparametrization phi(m);
  dp_update(m, phi, 0, 1);
  EXPECT_EQ(phi, Reparametrization(m));
}

TEST(Dp, ForwardSweepGivesChainOptimum)
{
  std::mt19937_64 rng(7);
  for (int k = 0; k < 50; ++k) {
    const index n = 5;
    const auto m = random_model(n, chain_edges(n), 1, 3, rng);
    Reparametrization phi(m);
    for (index u = 0; u + 1 < n; ++u)
      dp_update(m, phi, u, u + 1);
    EXPECT_NEAR(dual_value(m, phi), brute_force_min(m).value, 1e-9);
  }
}

TEST(Rdp, Examples)
{
  std::mt19937_64 rng(8);
  for (int k = 0; k < 50; ++k) {
    const auto m = random_model(2, chain_edges(2), 1, 4, rng);
    Reparametrization a(m);
    Reparametrization b(m);
    dp_update(m, a, 0, 1);
    rdp_update(m, b, 0, 1, 1.0);
    EXPECT_EQ(a, b);

    Reparametrization c(m);
    Reparametrization d(m);
    rdp_update(m, c, 1, 0, 0.0);
    collect_into(m, d, 0, 1);
    EXPECT_EQ(c, d);
  }

  const auto m = edge_model({2, 0}, {0, 0}, {0, 0, 0, 0});
  Reparametrization phi(m);
  rdp_update(m, phi, 0, 1, 0.5);
  expect_near(reparametrized_unary(m, phi, 0), {1, 0});
  expect_near(slot(phi, 0, 0), {1, 0});
  EXPECT_THROW(rdp_update(m, phi, 0, 1, 1.5), usage_error);
  EXPECT_THROW(rdp_update(m, phi, 0, 1, -0.1), usage_error);
}

TEST(Rdp, KeepsDualFromBlockOptimalState)
{
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<cost> frac(0, 1);
  for (int k = 0; k < 50; ++k) {
    const index n = 4;
    const auto m = random_model(n, chain_edges(n), 1, 3, rng);
    Reparametrization phi(m);
    for (index u = 0; u + 1 < n; ++u)
      dp_update(m, phi, u, u + 1);
    const cost opt = dual_value(m, phi);
    for (index u = n - 1; u > 0; --u) {
      rdp_update(m, phi, u, u - 1, frac(rng));
      EXPECT_NEAR(dual_value(m, phi), opt, 1e-9);
    }
  }
}

TEST(EdgeUpdates, FeasibleAndMonotoneOnRandomSequences)
{
  std::mt19937_64 rng(10);
  for (int k = 0; k < 50; ++k) {
    const auto m = random_model(6, random_graph_edges(6, 0.6, rng), 1, 4, rng);
    if (m.edge_count() == 0)
      continue;
    Reparametrization phi(m);
    std::uniform_int_distribution<index> pick(0, m.edge_count() - 1);
    std::uniform_int_distribution<int> op(0, 4);
    std::uniform_real_distribution<cost> frac(0, 1);
    cost last = dual_value(m, phi);
    for (int step = 0; step < 40; ++step) {
      const auto ed = m.edge(pick(rng));
      switch (op(rng)) {
      case 0: mplp_update(m, phi, ed.u, ed.v); break;
      case 1: handshake_update(m, phi, ed.v, ed.u); break;
      case 2: dp_update(m, phi, ed.u, ed.v); break;
      case 3: rdp_update(m, phi, ed.v, ed.u, frac(rng)); break;
      default: node_aggregate(m, phi, ed.u); break;
      }
      ASSERT_TRUE(check_feasible(m, phi));
      const cost now = dual_value(m, phi);
      EXPECT_GE(now, last - 1e-9);
      last = now;
    }
  }
}

} // namespace bcamap
