#pragma once

// Property suite over small generated instances. Each check prints one line;
// the suite passes when every check does.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "blocks.hpp"
#include "oracle.hpp"
#include "random_models.hpp"
#include "selection.hpp"
#include "solvers.hpp"
#include "updates.hpp"

namespace bcamap {

namespace detail {

using Rng = std::mt19937_64;

struct CheckOutcome {
  bool ok = true;
  std::string detail;

  void fail(std::string why)
  {
    if (ok)
      detail = std::move(why);
    ok = false;
  }
};

inline AdjacencyList uncovered_graph(const GraphicalModel& model, const std::vector<char>& covered)
{
  AdjacencyList g(model.node_count());
  for (index e = 0; e < model.edge_count(); ++e)
    if (!covered[e]) {
      g[model.edge(e).u].push_back(model.edge(e).v);
      g[model.edge(e).v].push_back(model.edge(e).u);
    }
  return g;
}

inline bool is_unique_shortest(const AdjacencyList& g, const std::vector<index>& path)
{
  return count_shortest_paths(g, path.front(), path.back()) == 1 &&
         shortest_distance(g, path.front(), path.back()) + 1 == path.size();
}

inline Block spanning_block(const GraphicalModel& model, const EdgeList& edges)
{
  return edges.size() + 1 == model.node_count() && model.node_count() > 1 ? Block::tree(model, 0, edges)
                                                                           : Block::chain(model, {0});
}

inline CheckOutcome check_oracle_agreement(Rng& rng)
{
  CheckOutcome out;
  for (int k = 0; k < 50; ++k) {
    std::uniform_int_distribution<index> size(2, 6);
    const index n = size(rng);
    const auto model = random_model(n, chain_edges(n), 1, 4, rng);
    const Reparametrization phi(model);
    std::vector<index> nodes(n);
    for (index u = 0; u < n; ++u)
      nodes[u] = u;
    const auto chain = Block::chain(model, nodes);
    const cost a = brute_force_min(model).value;
    const cost b = viterbi_min(model, phi, chain);
    if (std::abs(a - b) > default_tolerance)
      out.fail("chain " + std::to_string(k) + ": enumeration " + std::to_string(a) + " vs viterbi " +
               std::to_string(b));
  }
  return out;
}

inline CheckOutcome check_energy_invariance(Rng& rng)
{
  CheckOutcome out;
  for (int k = 0; k < 100; ++k) {
    std::uniform_int_distribution<index> size(1, 5);
    const index n = size(rng);
    const auto model = random_model(n, random_graph_edges(n, 0.6, rng), 1, 3, rng);
    const auto phi = random_reparametrization(model, rng);
    std::vector<index> nodes(n);
    for (index u = 0; u < n; ++u)
      nodes[u] = u;
    enumerate(model, nodes, [&](const Labeling& y) {
      if (std::abs(energy(model, y) - energy(model, phi, y)) > default_tolerance)
        out.fail("model " + std::to_string(k));
    });
  }
  return out;
}

/// Random update sequences on random trees; block optimality with zero
/// pairwise minima must agree with the enumerated minorant check.
inline CheckOutcome check_block_optimality(Rng& rng)
{
  CheckOutcome out;
  int agreeing_positive = 0;
  for (int k = 0; k < 60; ++k) {
    std::uniform_int_distribution<index> size(2, 6);
    const index n = size(rng);
    const auto edges = random_tree_edges(n, rng);
    const auto model = random_model(n, edges, 1, 3, rng);
    const auto tree = spanning_block(model, edges);
    Reparametrization phi(model);
    std::uniform_int_distribution<int> action(0, 3);
    std::uniform_int_distribution<index> pick(0, edges.size() - 1);
    const int steps = static_cast<int>(k % 4);
    for (int s = 0; s < steps; ++s) {
      const auto [u, v] = edges[pick(rng)];
      switch (action(rng)) {
      case 0: dp_update(model, phi, u, v); break;
      case 1: mplp_update(model, phi, u, v); break;
      case 2: handshake_update(model, phi, u, v); break;
      default: dp_update(model, phi, v, u); break;
      }
    }
    if (k % 3 == 0)
      hm_tree(model, phi, tree);
    const auto verdict = check_minorant(model, tree, phi);
    if (verdict == MinorantCheck::hypothesis_violated)
      continue;
    const bool optimal =
      std::abs(block_dual(model, phi, tree) - brute_force_min(model, phi, tree).value) <= default_tolerance;
    if (optimal != (verdict == MinorantCheck::holds))
      out.fail("tree " + std::to_string(k) + ": block optimality and minorant check disagree");
    agreeing_positive += optimal;
  }
  if (agreeing_positive == 0)
    out.fail("no block-optimal state was reached");
  return out;
}

/// Edge-wise maximality versus the constructive improvement: handshake leaves
/// nothing to improve; where mplp or a DP push leaves a minorant with a
/// positive row or column minimum the improvement yields a strictly greater
/// one.
inline CheckOutcome check_maximality(Rng& rng)
{
  CheckOutcome out;
  int improved = 0;
  for (int k = 0; k < 100; ++k) {
    const auto model = random_model(2, chain_edges(2), 2, 4, rng);
    const auto edge = Block::edge(model, 0, 1);

    Reparametrization hs(model);
    handshake_update(model, hs, 0, 1);
    Reparametrization probe = hs;
    if (!check_maximal_minorant(model, edge, hs) || improve_minorant(model, edge, probe))
      out.fail("edge " + std::to_string(k) + ": handshake result is not maximal");

    Reparametrization mp(model);
    if (k % 2 == 0)
      mplp_update(model, mp, 0, 1);
    else
      dp_update(model, mp, 0, 1);
    if (check_minorant(model, edge, mp) != MinorantCheck::holds)
      continue;
    const bool maximal = check_maximal_minorant(model, edge, mp);
    Reparametrization better = mp;
    const bool changed = improve_minorant(model, edge, better);
    if (maximal == changed) {
      out.fail("edge " + std::to_string(k) + ": maximality and improvement disagree");
      continue;
    }
    if (!changed)
      continue;
    ++improved;
    if (check_minorant(model, edge, better) != MinorantCheck::holds)
      out.fail("edge " + std::to_string(k) + ": improvement is not a minorant");
    bool strict = false;
    for (index u = 0; u < 2; ++u) {
      const auto before = reparametrized_unary(model, mp, u);
      const auto after = reparametrized_unary(model, better, u);
      for (index s = 0; s < before.size(); ++s) {
        if (after[s] < before[s] - 1e-12)
          out.fail("edge " + std::to_string(k) + ": improvement lowered a node cost");
        strict = strict || after[s] > before[s] + default_tolerance;
      }
    }
    if (!strict)
      out.fail("edge " + std::to_string(k) + ": improvement is not strict");
  }
  if (improved == 0)
    out.fail("no non-maximal minorant was produced");
  return out;
}

inline CheckOutcome check_block_updates(Rng& rng)
{
  CheckOutcome out;
  for (int k = 0; k < 40; ++k) {
    std::uniform_int_distribution<index> size(2, 6);
    const index n = size(rng);
    const auto edges = random_tree_edges(n, rng);
    const auto model = random_model(n, edges, 1, 3, rng);
    const auto tree = spanning_block(model, edges);
    const cost optimum = brute_force_min(model).value;

    Reparametrization a(model);
    hm_tree(model, a, tree);
    if (!check_maximal_minorant(model, tree, a))
      out.fail("tree " + std::to_string(k) + ": hm_tree is not maximal");
    if (std::abs(dual_value(model, a) - optimum) > default_tolerance)
      out.fail("tree " + std::to_string(k) + ": hm_tree dual is not the optimum");

    Reparametrization b(model);
    tbca_pp_tree(model, b, tree);
    if (!check_maximal_minorant(model, tree, b))
      out.fail("tree " + std::to_string(k) + ": tbca++ is not maximal");

    const auto chain_model = random_model(n, chain_edges(n), 1, 3, rng);
    std::vector<index> nodes(n);
    for (index u = 0; u < n; ++u)
      nodes[u] = u;
    const auto chain = Block::chain(chain_model, nodes);
    Reparametrization c(chain_model);
    hm_chain(chain_model, c, chain);
    if (!check_maximal_minorant(chain_model, chain, c))
      out.fail("chain " + std::to_string(k) + ": hm_chain is not maximal");
    Reparametrization d(chain_model);
    tbca_chain(chain_model, d, chain);
    if (check_minorant(chain_model, chain, d) != MinorantCheck::holds)
      out.fail("chain " + std::to_string(k) + ": tbca is not a minorant");
  }
  return out;
}

inline CheckOutcome check_shortest_path_counts()
{
  CheckOutcome out;
  // 1-2, 2-3, 3-4, 4-8, 3-7, 7-8, 2-5, 5-6, 6-7 with nodes renumbered from 0
  AdjacencyList g(8);
  for (const auto& [u, v] : EdgeList{{0, 1}, {1, 2}, {2, 3}, {3, 7}, {2, 6}, {6, 7}, {1, 4}, {4, 5}, {5, 6}}) {
    g[u].push_back(v);
    g[v].push_back(u);
  }
  if (count_shortest_paths(g, 0, 3) != 1)
    out.fail("1 to 4 should be strict");
  if (count_shortest_paths(g, 0, 7) != 2)
    out.fail("1 to 8 should have two shortest paths");
  for (index u = 0; u < g.size(); ++u)
    for (index v : g[u])
      if (count_shortest_paths(g, u, v) != 1)
        out.fail("adjacent pair with several shortest paths");
  return out;
}

inline CheckOutcome check_covers(Rng& rng)
{
  CheckOutcome out;
  for (int k = 0; k < 40; ++k) {
    std::uniform_int_distribution<index> size(2, 12);
    const index n = size(rng);
    const auto model = random_model(n, random_graph_edges(n, 0.35, rng), 1, 1, rng);

    std::vector<index> order = identity_order(n);
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<index> rank(n);
    for (index i = 0; i < n; ++i)
      rank[order[i]] = i;
    const auto mmc = compute_mmc_cover(model, order);
    for (const auto& b : mmc.blocks)
      for (index i = 1; i < b.nodes().size(); ++i)
        if (rank[b.nodes()[i - 1]] >= rank[b.nodes()[i]])
          out.fail("graph " + std::to_string(k) + ": MMC chain is not monotone");
    const auto c = mmc.coverage(model);
    if (!std::all_of(c.begin(), c.end(), [](index x) { return x == 1; }))
      out.fail("graph " + std::to_string(k) + ": MMC is not an exact edge partition");

    const auto ssp = compute_ssp_cover(model, rng());
    std::vector<char> covered(model.edge_count(), 0);
    const auto full = adjacency_of(model);
    for (const auto& b : ssp.blocks) {
      const auto residual = uncovered_graph(model, covered);
      if (!is_unique_shortest(residual, b.nodes()) || !is_unique_shortest(full, b.nodes()))
        out.fail("graph " + std::to_string(k) + ": SSP chain is not strictly shortest at extraction");
      for (index e : b.edges())
        covered[e] = 1;
    }
    const auto cs = ssp.coverage(model);
    if (!std::all_of(cs.begin(), cs.end(), [](index x) { return x == 1; }))
      out.fail("graph " + std::to_string(k) + ": SSP is not an exact edge partition");
  }
  for (index n = 2; n <= 12; ++n) {
    const auto model = random_model(n, complete_edges(n), 1, 1, rng);
    for (const auto& b : compute_ssp_cover(model, rng()).blocks)
      if (b.nodes().size() != 2)
        out.fail("K_" + std::to_string(n) + ": SSP produced a chain longer than one edge");
  }
  return out;
}

inline CheckOutcome check_solver_safety(Rng& rng)
{
  CheckOutcome out;
  const Method methods[] = {Method::MSD,  Method::CMP,  Method::TRWS,   Method::MPLP, Method::MPLPPP,
                            Method::DMM,  Method::TBCA, Method::TBCAPP, Method::SPAM};
  for (int k = 0; k < 20; ++k) {
    std::uniform_int_distribution<index> size(2, 6);
    const index n = size(rng);
    const auto model = random_model(n, random_graph_edges(n, 0.6, rng), 1, 3, rng);
    const cost optimum = brute_force_min(model).value;
    for (Method m : methods) {
      SolverConfig config;
      config.method = m;
      config.max_passes = 8;
      config.seed = rng();
      const auto result = run(model, config);
      const std::string where = "model " + std::to_string(k) + " " + std::string(method_name(m));
      for (index i = 0; i < result.trace.size(); ++i) {
        if (result.trace[i].dual > optimum + default_tolerance)
          out.fail(where + ": dual exceeds the optimum");
        if (i > 0 && result.trace[i].dual < result.trace[i - 1].dual - default_tolerance)
          out.fail(where + ": dual decreased");
      }
      if (!check_feasible(model, result.phi))
        out.fail(where + ": infeasible reparametrization");
    }
  }
  return out;
}

} // namespace detail

/// Runs every check with randomness drawn from `seed`; true when all pass.
inline bool run_verification_suite(std::uint64_t seed, std::ostream& log)
{
  detail::Rng rng(seed);
  struct Named {
    const char* name;
    std::function<detail::CheckOutcome()> run;
  };
  const Named checks[] = {
    {"oracle agreement (enumeration vs viterbi)", [&] { return detail::check_oracle_agreement(rng); }},
    {"energy invariance under reparametrization", [&] { return detail::check_energy_invariance(rng); }},
    {"block optimality iff minorant", [&] { return detail::check_block_optimality(rng); }},
    {"maximality iff no improving minorant", [&] { return detail::check_maximality(rng); }},
    {"block updates reach their minorants", [&] { return detail::check_block_updates(rng); }},
    {"shortest path counting", [] { return detail::check_shortest_path_counts(); }},
    {"chain covers", [&] { return detail::check_covers(rng); }},
    {"solver safety", [&] { return detail::check_solver_safety(rng); }},
  };
  bool all = true;
  for (const auto& check : checks) {
    detail::CheckOutcome outcome;
    try {
      outcome = check.run();
    } catch (const std::exception& e) {
      outcome.fail(std::string("exception: ") + e.what());
    }
    log << (outcome.ok ? "PASS " : "FAIL ") << check.name;
    if (!outcome.ok)
      log << ": " << outcome.detail;
    log << '\n';
    all = all && outcome.ok;
  }
  return all;
}

} // namespace bcamap
