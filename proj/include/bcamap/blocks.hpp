#pragma once

// Subgraph blocks (edges, chains, trees) and the composite updates that
// optimize the dual over one block: TBCA, TBCA++ and the hierarchical
// minorant on chains and trees.

#include <algorithm>
#include <functional>
#include <string>
#include <unordered_map>
#include <vector>

#include "model.hpp"
#include "updates.hpp"

namespace bcamap {

enum class BlockKind { Edge, Chain, Tree };

/// A connected acyclic subgraph. Chains keep their node order; trees keep
/// their root in nodes().front(). links()[k] is a pair of model nodes joined
/// by model edge edges()[k].
class Block {
public:
  static Block chain(const GraphicalModel& model, std::vector<index> nodes)
  {
    if (nodes.empty())
      throw usage_error("a chain needs at least one node");
    std::vector<std::pair<index, index>> links;
    for (index i = 0; i + 1 < nodes.size(); ++i)
      links.emplace_back(nodes[i], nodes[i + 1]);
    const auto kind = nodes.size() == 2 ? BlockKind::Edge : BlockKind::Chain;
    return Block(model, kind, std::move(nodes), std::move(links));
  }

  static Block edge(const GraphicalModel& model, index u, index v) { return chain(model, {u, v}); }

  /// Tree spanned by `links`, rooted at `root`.
  static Block tree(const GraphicalModel& model, index root, const std::vector<std::pair<index, index>>& links)
  {
    std::vector<index> nodes{root};
    for (const auto& [a, b] : links) {
      nodes.push_back(a);
      nodes.push_back(b);
    }
    std::sort(nodes.begin() + 1, nodes.end());
    nodes.erase(std::unique(nodes.begin() + 1, nodes.end()), nodes.end());
    if (auto it = std::find(nodes.begin() + 1, nodes.end(), root); it != nodes.end())
      nodes.erase(it);
    return Block(model, BlockKind::Tree, std::move(nodes), links);
  }

  BlockKind kind() const { return kind_; }
  bool is_chain() const { return kind_ != BlockKind::Tree; }
  const std::vector<index>& nodes() const { return nodes_; }
  const std::vector<std::pair<index, index>>& links() const { return links_; }
  const std::vector<index>& edges() const { return edges_; }
  index size() const { return nodes_.size(); }

private:
  Block(const GraphicalModel& model, BlockKind kind, std::vector<index> nodes,
        std::vector<std::pair<index, index>> links)
    : kind_(kind)
    , nodes_(std::move(nodes))
    , links_(std::move(links))
  {
    std::unordered_map<index, index> local;
    for (index u : nodes_) {
      model.check_node(u);
      if (!local.emplace(u, local.size()).second)
        throw usage_error("block repeats node " + std::to_string(u));
    }
    if (links_.size() + 1 != nodes_.size())
      throw usage_error("block is not a tree (wrong edge count)");

    // union-find over local indices detects cycles; with |E| = |V| - 1 an
    // acyclic graph is connected
    std::vector<index> parent(nodes_.size());
    for (index i = 0; i < parent.size(); ++i)
      parent[i] = i;
    const std::function<index(index)> find = [&](index x) {
      while (parent[x] != x)
        x = parent[x] = parent[parent[x]];
      return x;
    };
    std::vector<index> degree(nodes_.size(), 0);
    for (const auto& [a, b] : links_) {
      const auto ia = local.find(a);
      const auto ib = local.find(b);
      if (ia == local.end() || ib == local.end())
        throw usage_error("block link references a node outside the block");
      const auto e = model.find_edge(a, b);
      if (!e)
        throw usage_error("(" + std::to_string(a) + "," + std::to_string(b) + ") is not a model edge");
      const index ra = find(ia->second);
      const index rb = find(ib->second);
      if (ra == rb)
        throw usage_error("block contains a cycle");
      parent[ra] = rb;
      ++degree[ia->second];
      ++degree[ib->second];
      edges_.push_back(*e);
    }
    if (kind_ != BlockKind::Tree)
      for (index d : degree)
        if (d > 2)
          throw usage_error("chain block has a node of degree > 2");
  }

  BlockKind kind_;
  std::vector<index> nodes_;
  std::vector<std::pair<index, index>> links_;
  std::vector<index> edges_;
};

namespace detail {

inline void require_chain(const Block& block)
{
  if (!block.is_chain())
    throw usage_error("operation requires a chain block");
}

/// Local adjacency of a block, nodes addressed by their position in
/// block.nodes().
struct BlockGraph {
  std::vector<index> nodes;
  std::vector<std::vector<index>> adj;

  explicit BlockGraph(const Block& block)
    : nodes(block.nodes())
    , adj(block.size())
  {
    std::unordered_map<index, index> local;
    for (index i = 0; i < nodes.size(); ++i)
      local.emplace(nodes[i], i);
    for (const auto& [a, b] : block.links()) {
      adj[local.at(a)].push_back(local.at(b));
      adj[local.at(b)].push_back(local.at(a));
    }
    for (auto& list : adj)
      std::sort(list.begin(), list.end(), [&](index x, index y) { return nodes[x] < nodes[y]; });
  }
};

/// BFS order, parents and depths of the tree rooted at local node `root`,
/// restricted to nodes with in_set[x] == true.
struct Rooted {
  std::vector<index> order;
  std::vector<index> parent;
  std::vector<index> depth;
};

inline Rooted root_at(const BlockGraph& g, index root, const std::vector<char>& in_set)
{
  const index none = g.nodes.size();
  Rooted r{{}, std::vector<index>(g.nodes.size(), none), std::vector<index>(g.nodes.size(), 0)};
  r.order.push_back(root);
  r.parent[root] = root;
  for (index k = 0; k < r.order.size(); ++k) {
    const index x = r.order[k];
    for (index y : g.adj[x]) {
      if (!in_set[y] || r.parent[y] != none)
        continue;
      r.parent[y] = x;
      r.depth[y] = r.depth[x] + 1;
      r.order.push_back(y);
    }
  }
  return r;
}

inline std::vector<index> subtree_sizes(const Rooted& r, index n)
{
  std::vector<index> size(n, 0);
  for (auto it = r.order.rbegin(); it != r.order.rend(); ++it) {
    size[*it] += 1;
    if (r.parent[*it] != *it)
      size[r.parent[*it]] += size[*it];
  }
  return size;
}

inline void tbca_chain_impl(const GraphicalModel& model, Reparametrization& phi, const Block& chain,
                            bool maximal, MessageCounter* counter)
{
  require_chain(chain);
  const auto& x = chain.nodes();
  const index n = x.size();
  for (index i = 0; i + 1 < n; ++i)
    dp_update(model, phi, x[i], x[i + 1], counter);
  // k-th backward step: rDP from x[n-k] to x[n-k-1] with r = (n-k)/n
  for (index k = 1; k < n; ++k) {
    const cost r = static_cast<cost>(n - k) / static_cast<cost>(n);
    rdp_update(model, phi, x[n - k], x[n - k - 1], r, counter);
    if (maximal)
      collect_into(model, phi, x[n - k], x[n - k - 1], counter);
  }
}

inline void tbca_tree_impl(const GraphicalModel& model, Reparametrization& phi, const Block& tree,
                           bool maximal, MessageCounter* counter)
{
  const BlockGraph g(tree);
  const index n = g.nodes.size();
  const Rooted r = root_at(g, 0, std::vector<char>(n, 1));
  const auto sizes = subtree_sizes(r, n);

  for (auto it = r.order.rbegin(); it != r.order.rend(); ++it)
    if (*it != 0)
      dp_update(model, phi, g.nodes[*it], g.nodes[r.parent[*it]], counter);

  for (index p : r.order) {
    std::vector<index> children;
    for (index c : g.adj[p])
      if (c != r.parent[p] && r.parent[c] == p)
        children.push_back(c);
    // child c receives the fraction size(c)/n of p's excess
    cost handed = 0;
    for (index c : children) {
      const cost share = static_cast<cost>(sizes[c]) / static_cast<cost>(n);
      const cost fraction = std::clamp(share / (1.0 - handed), 0.0, 1.0);
      handed += share;
      rdp_update(model, phi, g.nodes[p], g.nodes[c], fraction, counter);
      if (maximal)
        collect_into(model, phi, g.nodes[p], g.nodes[c], counter);
    }
  }
}

class HierarchicalTree {
public:
  HierarchicalTree(const GraphicalModel& model, Reparametrization& phi, const Block& block,
                   MessageCounter* counter)
    : model_(model)
    , phi_(phi)
    , g_(block)
    , counter_(counter)
  {
  }

  void run()
  {
    std::vector<char> all(g_.nodes.size(), 1);
    solve(all, g_.nodes.size());
  }

private:
  void solve(const std::vector<char>& in_set, index entry)
  {
    const index none = g_.nodes.size();
    index start = none;
    index count = 0;
    for (index x = 0; x < in_set.size(); ++x)
      if (in_set[x]) {
        ++count;
        if (start == none)
          start = x;
      }
    if (count < 2)
      return;

    const Rooted r = root_at(g_, start, in_set);
    const auto sizes = subtree_sizes(r, none);

    // centroid: smallest largest remaining component, ties by node id
    index centroid = none;
    index centroid_worst = none + 1;
    for (index x : r.order) {
      index worst = count - sizes[x];
      for (index y : g_.adj[x])
        if (in_set[y] && r.parent[y] == x && y != x)
          worst = std::max(worst, sizes[y]);
      if (worst < centroid_worst || (worst == centroid_worst && g_.nodes[x] < g_.nodes[centroid])) {
        centroid = x;
        centroid_worst = worst;
      }
    }

    // partner: neighbor whose side is largest, i.e. the most balanced split
    const Rooted rc = root_at(g_, centroid, in_set);
    const auto csizes = subtree_sizes(rc, none);
    index partner = none;
    for (index y : g_.adj[centroid]) {
      if (!in_set[y])
        continue;
      if (partner == none || csizes[y] > csizes[partner] ||
          (csizes[y] == csizes[partner] && g_.nodes[y] < g_.nodes[partner]))
        partner = y;
    }

    std::vector<char> side_c(in_set.size(), 0);
    std::vector<char> side_p(in_set.size(), 0);
    for (index x : rc.order) {
      // x lies on the partner side iff its path to the centroid passes partner
      index y = x;
      while (y != centroid && y != partner)
        y = rc.parent[y];
      (y == partner ? side_p : side_c)[x] = 1;
    }

    if (entry == none) {
      push_towards(side_c, centroid);
      push_towards(side_p, partner);
    } else {
      // everything already points at the entry node; only the path from the
      // entry to the central edge changes direction
      const index target = side_c[entry] ? centroid : partner;
      const Rooted re = root_at(g_, target, side_c[entry] ? side_c : side_p);
      for (index x = entry; x != target; x = re.parent[x])
        dp_update(model_, phi_, g_.nodes[x], g_.nodes[re.parent[x]], counter_);
    }

    const index a = g_.nodes[centroid] < g_.nodes[partner] ? centroid : partner;
    const index b = a == centroid ? partner : centroid;
    handshake_update(model_, phi_, g_.nodes[a], g_.nodes[b], counter_);

    solve(side_c, centroid);
    solve(side_p, partner);
  }

  void push_towards(const std::vector<char>& in_set, index root)
  {
    const Rooted r = root_at(g_, root, in_set);
    for (auto it = r.order.rbegin(); it != r.order.rend(); ++it)
      if (*it != root)
        dp_update(model_, phi_, g_.nodes[*it], g_.nodes[r.parent[*it]], counter_);
  }

  const GraphicalModel& model_;
  Reparametrization& phi_;
  BlockGraph g_;
  MessageCounter* counter_;
};

inline void hm_segment(const GraphicalModel& model, Reparametrization& phi, const std::vector<index>& x,
                       index lo, index hi, bool fresh_left, bool fresh_right, MessageCounter* counter)
{
  const index n = hi - lo + 1;
  if (n < 2)
    return;
  const index left_mid = lo + n / 2 - 1;
  const index right_mid = left_mid + 1;
  if (fresh_left)
    for (index i = lo; i < left_mid; ++i)
      dp_update(model, phi, x[i], x[i + 1], counter);
  if (fresh_right)
    for (index i = hi; i > right_mid; --i)
      dp_update(model, phi, x[i], x[i - 1], counter);
  handshake_update(model, phi, x[left_mid], x[right_mid], counter);
  // pushes toward the outer ends of both halves were made above and are
  // still valid; only the side next to the handshaked edge is new
  hm_segment(model, phi, x, lo, left_mid, false, true, counter);
  hm_segment(model, phi, x, right_mid, hi, true, false, counter);
}

} // namespace detail

/// Tree-BCA on a chain: forward DP sweep to the chain end, then a backward
/// sweep where the k-th rDP pushes the fraction r = (n−k)/n of node n−k+1
/// on to node n−k. Uses 2(n−1) messages.
inline void tbca_chain(const GraphicalModel& model, Reparametrization& phi, const Block& chain,
                       MessageCounter* counter = nullptr)
{
  detail::tbca_chain_impl(model, phi, chain, false, counter);
}

/// TBCA followed, after every rDP on an edge, by pushing the edge's remaining
/// row minima back into the sending node, which makes every chain edge
/// satisfy the maximal-minorant conditions. Uses 3(n−1) messages.
inline void tbca_pp_chain(const GraphicalModel& model, Reparametrization& phi, const Block& chain,
                          MessageCounter* counter = nullptr)
{
  detail::tbca_chain_impl(model, phi, chain, true, counter);
}

/// TBCA on a tree rooted at block.nodes().front(): DP from the leaves to the
/// root, then rDP pushes from the root outward. Each child receives the
/// fraction (its subtree size)/n of its parent's excess; on a chain rooted at
/// its last node this is exactly tbca_chain.
inline void tbca_tree(const GraphicalModel& model, Reparametrization& phi, const Block& tree,
                      MessageCounter* counter = nullptr)
{
  detail::tbca_tree_impl(model, phi, tree, false, counter);
}

inline void tbca_pp_tree(const GraphicalModel& model, Reparametrization& phi, const Block& tree,
                         MessageCounter* counter = nullptr)
{
  detail::tbca_tree_impl(model, phi, tree, true, counter);
}

/// Hierarchical minorant on a chain: DP pushes from both ends to the middle
/// edge (i_L = ⌊n/2⌋), a handshake there, then recursion on both halves.
/// Leaves the chain block-optimal with every edge satisfying the
/// maximal-minorant conditions.
inline void hm_chain(const GraphicalModel& model, Reparametrization& phi, const Block& chain,
                     MessageCounter* counter = nullptr)
{
  detail::require_chain(chain);
  const auto& x = chain.nodes();
  if (x.size() < 2)
    return;
  detail::hm_segment(model, phi, x, 0, x.size() - 1, true, true, counter);
}

/// Hierarchical minorant on a tree: DP from the leaves towards the central
/// edge (the centroid and its most balanced neighbor), a handshake there and
/// recursion on the two subtrees.
inline void hm_tree(const GraphicalModel& model, Reparametrization& phi, const Block& tree,
                    MessageCounter* counter = nullptr)
{
  detail::HierarchicalTree(model, phi, tree, counter).run();
}

} // namespace bcamap
