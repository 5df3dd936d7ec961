#pragma once

// Independent ground truth: exhaustive minimization, a Viterbi chain solver,
// minorant / maximal-minorant certificates for tree blocks and shortest-path
// counting. Nothing here uses the update routines.

#include <cstdint>
#include <limits>
#include <queue>
#include <stdexcept>
#include <utility>
#include <vector>

#include "blocks.hpp"
#include "model.hpp"

namespace bcamap {

/// Largest state space brute_force_min is willing to enumerate.
inline constexpr std::uint64_t enumeration_limit = 10'000'000;

class enumeration_too_large : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct MinResult {
  cost value;
  Labeling labeling;
};

namespace detail {

inline std::uint64_t state_space(const GraphicalModel& model, const std::vector<index>& nodes)
{
  std::uint64_t states = 1;
  for (index u : nodes) {
    states *= model.label_count(u);
    if (states > enumeration_limit)
      throw enumeration_too_large("state space exceeds " + std::to_string(enumeration_limit) + " labelings");
  }
  return states;
}

/// Visits labelings of `nodes` in lexicographic order (first node most
/// significant); labels of other nodes stay at 0.
template<typename Visit>
void enumerate(const GraphicalModel& model, const std::vector<index>& nodes, Visit visit)
{
  state_space(model, nodes);
  Labeling y(model.node_count(), 0);
  while (true) {
    visit(y);
    index k = nodes.size();
    while (k > 0) {
      const index u = nodes[k - 1];
      if (++y[u] < model.label_count(u))
        break;
      y[u] = 0;
      --k;
    }
    if (k == 0)
      return;
  }
}

} // namespace detail

/// Exact minimum energy and the lexicographically smallest minimizer.
inline MinResult brute_force_min(const GraphicalModel& model)
{
  std::vector<index> nodes(model.node_count());
  for (index u = 0; u < nodes.size(); ++u)
    nodes[u] = u;
  MinResult best{std::numeric_limits<cost>::infinity(), Labeling(model.node_count(), 0)};
  detail::enumerate(model, nodes, [&](const Labeling& y) {
    const cost c = energy(model, y);
    if (c < best.value)
      best = {c, y};
  });
  return best;
}

/// Energy of the block restricted model with costs θ^φ: Σ_{u∈V'} θ^φ_u(y_u) +
/// Σ_{uv∈E'} θ^φ_uv(y_u,y_v).
inline cost block_energy(const GraphicalModel& model, const Reparametrization& phi, const Block& block,
                         const Labeling& y)
{
  cost total = 0;
  for (index u : block.nodes())
    total += reparametrized_unary(model, phi, u, y[u]);
  for (index e : block.edges())
    total += detail::edge_cost(model, phi, e, y[model.edge(e).u], y[model.edge(e).v]);
  return total;
}

/// Minimum of the block restricted energy (labels outside the block are 0).
inline MinResult brute_force_min(const GraphicalModel& model, const Reparametrization& phi, const Block& block)
{
  MinResult best{std::numeric_limits<cost>::infinity(), Labeling(model.node_count(), 0)};
  detail::enumerate(model, block.nodes(), [&](const Labeling& y) {
    const cost c = block_energy(model, phi, block, y);
    if (c < best.value)
      best = {c, y};
  });
  return best;
}

/// Min-sum Viterbi over a chain with costs θ^φ; the chain's optimum.
inline cost viterbi_min(const GraphicalModel& model, const Reparametrization& phi, const Block& chain)
{
  if (!chain.is_chain())
    throw usage_error("viterbi_min needs a chain");
  const auto& x = chain.nodes();
  std::vector<cost> score = reparametrized_unary(model, phi, x[0]);
  for (index i = 1; i < x.size(); ++i) {
    const auto unary = reparametrized_unary(model, phi, x[i]);
    std::vector<cost> next(unary.size(), std::numeric_limits<cost>::infinity());
    for (index t = 0; t < unary.size(); ++t)
      for (index s = 0; s < score.size(); ++s)
        next[t] = std::min(next[t], score[s] + reparametrized_pairwise(model, phi, x[i - 1], x[i], s, t));
    for (index t = 0; t < unary.size(); ++t)
      next[t] += unary[t];
    score = std::move(next);
  }
  return detail::min_of(score);
}

/// Dual bound restricted to a block: Σ_{u∈V'} min θ^φ_u + Σ_{uv∈E'} min θ^φ_uv.
inline cost block_dual(const GraphicalModel& model, const Reparametrization& phi, const Block& block)
{
  cost total = 0;
  for (index u : block.nodes())
    total += detail::min_of(reparametrized_unary(model, phi, u));
  for (index e : block.edges())
    total += detail::edge_min(model, phi, e);
  return total;
}

enum class MinorantCheck {
  holds,
  fails,
  /// θ^φ infeasible on the block or its pairwise minima do not sum to zero
  hypothesis_violated,
};

/// Whether g(y) = Σ_{u∈V'} θ^φ_u(y_u) is a tight minorant of the block
/// restricted energy, checked by enumeration.
inline MinorantCheck check_minorant(const GraphicalModel& model, const Block& block, const Reparametrization& phi,
                                    cost tol = default_tolerance)
{
  cost pairwise_minima = 0;
  for (index e : block.edges()) {
    const cost m = detail::edge_min(model, phi, e);
    if (m < -tol)
      return MinorantCheck::hypothesis_violated;
    pairwise_minima += m;
  }
  if (std::abs(pairwise_minima) > tol)
    return MinorantCheck::hypothesis_violated;

  cost min_g = std::numeric_limits<cost>::infinity();
  cost min_e = std::numeric_limits<cost>::infinity();
  bool below = true;
  detail::enumerate(model, block.nodes(), [&](const Labeling& y) {
    cost g = 0;
    for (index u : block.nodes())
      g += reparametrized_unary(model, phi, u, y[u]);
    const cost e = block_energy(model, phi, block, y);
    below = below && g <= e + tol;
    min_g = std::min(min_g, g);
    min_e = std::min(min_e, e);
  });
  return below && std::abs(min_g - min_e) <= tol ? MinorantCheck::holds : MinorantCheck::fails;
}

/// Edge-wise maximality conditions: every row minimum and every column
/// minimum of θ^φ_uv is zero.
inline bool edge_is_maximal(const GraphicalModel& model, const Reparametrization& phi, index e,
                            cost tol = default_tolerance)
{
  const auto& ed = model.edge(e);
  const index nu = model.label_count(ed.u);
  const index nv = model.label_count(ed.v);
  for (index s = 0; s < nu; ++s) {
    cost m = std::numeric_limits<cost>::infinity();
    for (index t = 0; t < nv; ++t)
      m = std::min(m, detail::edge_cost(model, phi, e, s, t));
    if (std::abs(m) > tol)
      return false;
  }
  for (index t = 0; t < nv; ++t) {
    cost m = std::numeric_limits<cost>::infinity();
    for (index s = 0; s < nu; ++s)
      m = std::min(m, detail::edge_cost(model, phi, e, s, t));
    if (std::abs(m) > tol)
      return false;
  }
  return true;
}

/// True iff g is a minorant and every block edge satisfies the maximality
/// conditions.
inline bool check_maximal_minorant(const GraphicalModel& model, const Block& block, const Reparametrization& phi,
                                   cost tol = default_tolerance)
{
  if (check_minorant(model, block, phi, tol) != MinorantCheck::holds)
    return false;
  for (index e : block.edges())
    if (!edge_is_maximal(model, phi, e, tol))
      return false;
  return true;
}

/// Constructive witness of non-maximality: finds a block edge and a label
/// whose row or column minimum λ is positive and moves λ into the adjacent
/// node. Returns false when every block edge is maximal.
inline bool improve_minorant(const GraphicalModel& model, const Block& block, Reparametrization& phi,
                             cost tol = default_tolerance)
{
  for (index e : block.edges()) {
    const auto& ed = model.edge(e);
    const index nu = model.label_count(ed.u);
    const index nv = model.label_count(ed.v);
    for (index t = 0; t < nv; ++t) {
      cost lambda = std::numeric_limits<cost>::infinity();
      for (index s = 0; s < nu; ++s)
        lambda = std::min(lambda, detail::edge_cost(model, phi, e, s, t));
      if (lambda > tol) {
        phi.slot(e, 1)[t] -= lambda;
        return true;
      }
    }
    for (index s = 0; s < nu; ++s) {
      cost lambda = std::numeric_limits<cost>::infinity();
      for (index t = 0; t < nv; ++t)
        lambda = std::min(lambda, detail::edge_cost(model, phi, e, s, t));
      if (lambda > tol) {
        phi.slot(e, 0)[s] -= lambda;
        return true;
      }
    }
  }
  return false;
}

/// Plain adjacency-list graph for the path-counting oracle.
using AdjacencyList = std::vector<std::vector<index>>;

inline AdjacencyList adjacency_of(const GraphicalModel& model)
{
  AdjacencyList g(model.node_count());
  for (const auto& ed : model.edges()) {
    g[ed.u].push_back(ed.v);
    g[ed.v].push_back(ed.u);
  }
  return g;
}

/// Number of distinct shortest src→dst paths (BFS layer counting); 0 when dst
/// is unreachable.
inline std::uint64_t count_shortest_paths(const AdjacencyList& graph, index src, index dst)
{
  if (src >= graph.size() || dst >= graph.size())
    throw usage_error("node out of range");
  const index unreached = graph.size();
  std::vector<index> dist(graph.size(), unreached);
  std::vector<std::uint64_t> paths(graph.size(), 0);
  std::queue<index> queue;
  dist[src] = 0;
  paths[src] = 1;
  queue.push(src);
  while (!queue.empty()) {
    const index u = queue.front();
    queue.pop();
    for (index v : graph[u]) {
      if (dist[v] == unreached) {
        dist[v] = dist[u] + 1;
        queue.push(v);
      }
      if (dist[v] == dist[u] + 1)
        paths[v] += paths[u];
    }
  }
  return paths[dst];
}

/// BFS distance, or graph.size() when unreachable.
inline index shortest_distance(const AdjacencyList& graph, index src, index dst)
{
  const index unreached = graph.size();
  std::vector<index> dist(graph.size(), unreached);
  std::queue<index> queue;
  dist[src] = 0;
  queue.push(src);
  while (!queue.empty()) {
    const index u = queue.front();
    queue.pop();
    for (index v : graph[u])
      if (dist[v] == unreached) {
        dist[v] = dist[u] + 1;
        queue.push(v);
      }
  }
  return dist[dst];
}

} // namespace bcamap
