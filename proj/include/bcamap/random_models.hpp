#pragma once

// Small random models and reparametrizations for property checks.

#include <algorithm>
#include <random>
#include <utility>
#include <vector>

#include "model.hpp"

namespace bcamap {

using EdgeList = std::vector<std::pair<index, index>>;

/// Path 0-1-…-(n−1).
inline EdgeList chain_edges(index n)
{
  EdgeList edges;
  for (index u = 0; u + 1 < n; ++u)
    edges.emplace_back(u, u + 1);
  return edges;
}

/// Uniform random recursive tree: node k attaches to a random earlier node.
template<typename Rng>
EdgeList random_tree_edges(index n, Rng& rng)
{
  EdgeList edges;
  for (index v = 1; v < n; ++v) {
    std::uniform_int_distribution<index> parent(0, v - 1);
    const index u = parent(rng);
    edges.emplace_back(u, v);
  }
  return edges;
}

/// Erdős–Rényi graph with edge probability p.
template<typename Rng>
EdgeList random_graph_edges(index n, double p, Rng& rng)
{
  std::bernoulli_distribution keep(p);
  EdgeList edges;
  for (index u = 0; u < n; ++u)
    for (index v = u + 1; v < n; ++v)
      if (keep(rng))
        edges.emplace_back(u, v);
  return edges;
}

inline EdgeList complete_edges(index n)
{
  EdgeList edges;
  for (index u = 0; u < n; ++u)
    for (index v = u + 1; v < n; ++v)
      edges.emplace_back(u, v);
  return edges;
}

/// Random label counts in [min_labels, max_labels] and costs uniform in
/// [0, scale).
template<typename Rng>
GraphicalModel random_model(index n, const EdgeList& edges, index min_labels, index max_labels, Rng& rng,
                            cost scale = 10)
{
  std::uniform_int_distribution<index> label_count(min_labels, max_labels);
  std::uniform_real_distribution<cost> value(0, scale);
  std::vector<index> labels(n);
  for (auto& l : labels)
    l = label_count(rng);
  ModelBuilder b(labels);
  for (index u = 0; u < n; ++u) {
    std::vector<cost> th(labels[u]);
    for (auto& x : th)
      x = value(rng);
    b.set_unary(u, std::move(th));
  }
  for (const auto& [u, v] : edges) {
    std::vector<cost> table(labels[u] * labels[v]);
    for (auto& x : table)
      x = value(rng);
    b.add_edge(u, v, std::move(table));
  }
  return b.build();
}

/// φ with entries uniform in [−scale, scale); generally infeasible.
template<typename Rng>
Reparametrization random_reparametrization(const GraphicalModel& model, Rng& rng, cost scale = 5)
{
  std::uniform_real_distribution<cost> value(-scale, scale);
  Reparametrization phi(model);
  for (index e = 0; e < model.edge_count(); ++e)
    for (int side = 0; side < 2; ++side)
      for (auto& x : phi.slot(e, side))
        x = value(rng);
  return phi;
}

} // namespace bcamap
