#pragma once

// Block collections the solvers iterate over: maximal monotonic chains,
// strictly-shortest-path chains, grid rows/columns, greedy static spanning
// trees and gap-driven dynamic spanning trees.

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

#include "blocks.hpp"
#include "model.hpp"

namespace bcamap {

enum class CoverOrigin { MMC, SSP, StaticTrees, DynamicTrees, AllEdges, RowsColumns };

struct BlockSchedule {
  std::vector<Block> blocks;
  CoverOrigin origin;

  /// covered[e] counts the blocks containing edge e.
  std::vector<index> coverage(const GraphicalModel& model) const
  {
    std::vector<index> covered(model.edge_count(), 0);
    for (const auto& b : blocks)
      for (index e : b.edges())
        ++covered[e];
    return covered;
  }

  bool covers_all(const GraphicalModel& model) const
  {
    const auto c = coverage(model);
    return std::all_of(c.begin(), c.end(), [](index k) { return k > 0; });
  }
};

inline std::vector<index> identity_order(index n)
{
  std::vector<index> order(n);
  std::iota(order.begin(), order.end(), index{0});
  return order;
}

namespace detail {

class DisjointSets {
public:
  explicit DisjointSets(index n)
    : parent_(n)
  {
    std::iota(parent_.begin(), parent_.end(), index{0});
  }

  index find(index x)
  {
    while (parent_[x] != x)
      x = parent_[x] = parent_[parent_[x]];
    return x;
  }

  bool unite(index a, index b)
  {
    a = find(a);
    b = find(b);
    if (a == b)
      return false;
    parent_[a] = b;
    return true;
  }

private:
  std::vector<index> parent_;
};

/// Splits a spanning forest (edge ids) into one tree block per component,
/// each rooted at its smallest node.
inline std::vector<Block> forest_blocks(const GraphicalModel& model, const std::vector<index>& forest)
{
  DisjointSets sets(model.node_count());
  for (index e : forest)
    sets.unite(model.edge(e).u, model.edge(e).v);
  std::vector<std::vector<std::pair<index, index>>> links(model.node_count());
  for (index e : forest)
    links[sets.find(model.edge(e).u)].emplace_back(model.edge(e).u, model.edge(e).v);

  std::vector<index> root(model.node_count(), model.node_count());
  for (index u = 0; u < model.node_count(); ++u) {
    const index c = sets.find(u);
    root[c] = std::min(root[c], u);
  }
  std::vector<std::pair<index, index>> order; // (root node, component) sorted by root
  for (index c = 0; c < model.node_count(); ++c)
    if (!links[c].empty())
      order.emplace_back(root[c], c);
  std::sort(order.begin(), order.end());

  std::vector<Block> blocks;
  for (const auto& [r, c] : order)
    blocks.push_back(Block::tree(model, r, links[c]));
  return blocks;
}

/// Kruskal over edges sorted by (weight, edge index); `greater` selects a
/// maximum-weight forest instead of a minimum-weight one.
template<typename Weight>
std::vector<index> kruskal(const GraphicalModel& model, const std::vector<Weight>& weight, bool greater)
{
  std::vector<index> ids(model.edge_count());
  std::iota(ids.begin(), ids.end(), index{0});
  std::stable_sort(ids.begin(), ids.end(), [&](index a, index b) {
    return greater ? weight[a] > weight[b] : weight[a] < weight[b];
  });
  DisjointSets sets(model.node_count());
  std::vector<index> forest;
  for (index e : ids)
    if (sets.unite(model.edge(e).u, model.edge(e).v))
      forest.push_back(e);
  std::sort(forest.begin(), forest.end());
  return forest;
}

} // namespace detail

/// Greedy cover with edge-disjoint maximal monotonic chains: start at the
/// first node (in `order`) that still has an uncovered edge to a later node
/// and keep following the first such edge.
inline BlockSchedule compute_mmc_cover(const GraphicalModel& model, const std::vector<index>& order)
{
  const WeightScheme ranks(WeightKind::TRWS, order);
  if (order.size() != model.node_count())
    throw usage_error("node order must list every node exactly once");

  // forward adjacency, sorted by rank
  std::vector<std::vector<index>> forward(model.node_count());
  for (const auto& ed : model.edges()) {
    if (ranks.rank(ed.u) < ranks.rank(ed.v))
      forward[ed.u].push_back(ed.v);
    else
      forward[ed.v].push_back(ed.u);
  }
  for (auto& list : forward)
    std::sort(list.begin(), list.end(), [&](index a, index b) { return ranks.rank(a) < ranks.rank(b); });
  std::vector<index> next(model.node_count(), 0); // consumed prefix of forward[u]

  BlockSchedule schedule{{}, CoverOrigin::MMC};
  index cursor = 0;
  while (true) {
    while (cursor < order.size() && next[order[cursor]] == forward[order[cursor]].size())
      ++cursor;
    if (cursor == order.size())
      break;
    std::vector<index> chain{order[cursor]};
    index tail = order[cursor];
    while (next[tail] < forward[tail].size()) {
      const index j = forward[tail][next[tail]++];
      chain.push_back(j);
      tail = j;
    }
    schedule.blocks.push_back(Block::chain(model, std::move(chain)));
  }
  return schedule;
}

/// Extracts one chain from `src`: the path to the most distant node (ties by
/// lowest index) that is reached by a unique shortest path of the model graph
/// running only through uncovered edges. Such a path is also the unique
/// shortest path between its ends in the uncovered subgraph.
inline std::vector<index> extract_strict_path(const GraphicalModel& model, const std::vector<char>& covered,
                                              index src)
{
  model.check_node(src);
  const index n = model.node_count();
  const index unreached = n;
  std::vector<index> dist(n, unreached);
  std::vector<std::uint8_t> paths(n, 0); // shortest-path count, saturating at 2
  std::vector<index> prev(n, unreached);
  std::vector<char> usable(n, 0); // unique shortest path, all edges uncovered

  dist[src] = 0;
  paths[src] = 1;
  usable[src] = 1;
  std::vector<index> layer{src};
  index best = src;
  while (!layer.empty()) {
    std::vector<index> next_layer;
    for (index u : layer)
      for (const auto& inc : model.neighbors(u)) {
        const index v = inc.neighbor;
        if (dist[v] == unreached) {
          dist[v] = dist[u] + 1;
          prev[v] = u;
          paths[v] = paths[u];
          next_layer.push_back(v);
        } else if (dist[v] == dist[u] + 1) {
          paths[v] = static_cast<std::uint8_t>(std::min(2, paths[v] + paths[u]));
        }
      }
    bool any = false;
    for (index v : next_layer) {
      const auto e = model.find_edge(prev[v], v);
      usable[v] = paths[v] == 1 && usable[prev[v]] && !covered[*e];
      if (usable[v]) {
        any = true;
        if (dist[v] > dist[best] || (dist[v] == dist[best] && v < best))
          best = v;
      }
    }
    // nodes beyond a layer without usable nodes cannot be usable
    if (!any)
      break;
    layer = std::move(next_layer);
  }

  std::vector<index> path;
  for (index x = best; x != src; x = prev[x])
    path.push_back(x);
  path.push_back(src);
  std::reverse(path.begin(), path.end());
  return path;
}

/// Graph-adaptive chain cover: repeatedly pick a random node with an
/// uncovered edge and extract its longest strict shortest path, until every
/// edge is covered. Chains are edge-disjoint.
inline BlockSchedule compute_ssp_cover(const GraphicalModel& model, std::uint64_t seed)
{
  std::mt19937_64 rng(seed);
  std::vector<char> covered(model.edge_count(), 0);
  std::vector<index> open_degree(model.node_count(), 0);
  for (const auto& ed : model.edges()) {
    ++open_degree[ed.u];
    ++open_degree[ed.v];
  }
  std::vector<index> candidates;
  for (index u = 0; u < model.node_count(); ++u)
    if (open_degree[u] > 0)
      candidates.push_back(u);

  BlockSchedule schedule{{}, CoverOrigin::SSP};
  while (!candidates.empty()) {
    std::uniform_int_distribution<index> pick(0, candidates.size() - 1);
    const index src = candidates[pick(rng)];
    auto path = extract_strict_path(model, covered, src);
    for (index k = 0; k + 1 < path.size(); ++k) {
      const index e = *model.find_edge(path[k], path[k + 1]);
      covered[e] = 1;
      --open_degree[path[k]];
      --open_degree[path[k + 1]];
    }
    schedule.blocks.push_back(Block::chain(model, std::move(path)));
    std::erase_if(candidates, [&](index u) { return open_degree[u] == 0; });
  }
  return schedule;
}

/// Rows and columns of a model built as a 4-connected grid.
inline BlockSchedule compute_rows_columns_cover(const GraphicalModel& model)
{
  if (!model.grid_shape())
    throw usage_error("model carries no grid shape");
  const auto [rows, cols] = *model.grid_shape();
  if (rows * cols != model.node_count() || model.edge_count() != rows * (cols - 1) + cols * (rows - 1))
    throw usage_error("model is not a 4-connected grid of the declared shape");

  BlockSchedule schedule{{}, CoverOrigin::RowsColumns};
  if (cols > 1)
    for (index r = 0; r < rows; ++r) {
      std::vector<index> chain(cols);
      for (index c = 0; c < cols; ++c)
        chain[c] = r * cols + c;
      schedule.blocks.push_back(Block::chain(model, std::move(chain)));
    }
  if (rows > 1)
    for (index c = 0; c < cols; ++c) {
      std::vector<index> chain(rows);
      for (index r = 0; r < rows; ++r)
        chain[r] = r * cols + c;
      schedule.blocks.push_back(Block::chain(model, std::move(chain)));
    }
  return schedule;
}

/// One single-edge block per model edge, in edge order.
inline BlockSchedule compute_all_edges(const GraphicalModel& model)
{
  BlockSchedule schedule{{}, CoverOrigin::AllEdges};
  for (const auto& ed : model.edges())
    schedule.blocks.push_back(Block::edge(model, ed.u, ed.v));
  return schedule;
}

/// Sequence of minimum-weight spanning forests, the weight of an edge being
/// the number of earlier forests containing it; stops once every edge has
/// been used. Each component of a forest becomes one tree block.
inline BlockSchedule compute_static_trees(const GraphicalModel& model)
{
  BlockSchedule schedule{{}, CoverOrigin::StaticTrees};
  std::vector<index> used(model.edge_count(), 0);
  index uncovered = model.edge_count();
  while (uncovered > 0) {
    const auto forest = detail::kruskal(model, used, false);
    for (index e : forest)
      if (used[e]++ == 0)
        --uncovered;
    for (auto& b : detail::forest_blocks(model, forest))
      schedule.blocks.push_back(std::move(b));
  }
  return schedule;
}

/// Local primal-dual gap of node u at labeling y.
inline cost node_gap(const GraphicalModel& model, const Reparametrization& phi, const Labeling& y, index u)
{
  const auto th = reparametrized_unary(model, phi, u);
  return th[y[u]] - detail::min_of(th);
}

/// Local primal-dual gap of edge e at labeling y.
inline cost edge_gap(const GraphicalModel& model, const Reparametrization& phi, const Labeling& y, index e)
{
  const auto& ed = model.edge(e);
  return detail::edge_cost(model, phi, e, y[ed.u], y[ed.v]) - detail::edge_min(model, phi, e);
}

/// Score of edge e in a dynamic tree: its own gap plus the gaps of both
/// endpoints.
inline std::vector<cost> dynamic_edge_scores(const GraphicalModel& model, const Reparametrization& phi,
                                             const Labeling& y)
{
  check_labeling(model, y);
  std::vector<cost> node(model.node_count());
  for (index u = 0; u < model.node_count(); ++u)
    node[u] = node_gap(model, phi, y, u);
  std::vector<cost> score(model.edge_count());
  for (index e = 0; e < model.edge_count(); ++e)
    score[e] = edge_gap(model, phi, y, e) + node[model.edge(e).u] + node[model.edge(e).v];
  return score;
}

inline cost tree_gap_score(const GraphicalModel& model, const Reparametrization& phi, const Labeling& y,
                           const std::vector<index>& tree_edges)
{
  const auto score = dynamic_edge_scores(model, phi, y);
  cost total = 0;
  for (index e : tree_edges)
    total += score[e];
  return total;
}

/// Maximum-score spanning forest under dynamic_edge_scores, one tree block
/// per component.
inline BlockSchedule compute_dynamic_forest(const GraphicalModel& model, const Reparametrization& phi,
                                            const Labeling& y)
{
  const auto score = dynamic_edge_scores(model, phi, y);
  return {detail::forest_blocks(model, detail::kruskal(model, score, true)), CoverOrigin::DynamicTrees};
}

/// Maximum-score spanning tree of a connected model.
inline Block compute_dynamic_tree(const GraphicalModel& model, const Reparametrization& phi, const Labeling& y)
{
  auto forest = compute_dynamic_forest(model, phi, y);
  if (forest.blocks.size() != 1 || forest.blocks.front().size() != model.node_count())
    throw usage_error("dynamic spanning tree needs a connected model");
  return std::move(forest.blocks.front());
}

} // namespace bcamap
