#pragma once

// Pairwise discrete energies, reparametrizations and the quantities derived
// from them (energy, reparametrized costs, dual bound, feasibility).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace bcamap {

using index = std::size_t;
using cost = double;

/// Absolute tolerance shared by every "is zero" / "is non-negative" test.
inline constexpr cost default_tolerance = 1e-9;

/// Finite stand-in for forbidden label (pair) assignments.
inline constexpr cost default_forbidden_cost = 1e12;

/// Raised on contract violations by the caller (bad indices, bad weights...).
class usage_error : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

struct Edge {
  index u;
  index v;
};

/// One entry of a node's adjacency list. `side` is 0 when the node is the
/// first endpoint of `edge`, 1 otherwise; it selects the directed slot of the
/// reparametrization that belongs to this node.
struct Incidence {
  index neighbor;
  index edge;
  int side;
};

/// A labeling assigns one label index to every node.
using Labeling = std::vector<index>;

class ModelBuilder;

/// Immutable pairwise model. Pairwise tables of edge (u,v) are stored row-major
/// with the label of u as the row.
class GraphicalModel {
public:
  GraphicalModel() = default;

  index node_count() const { return labels_.size(); }
  index edge_count() const { return edges_.size(); }
  index label_count(index u) const
  {
    check_node(u);
    return labels_[u];
  }
  const std::vector<index>& label_counts() const { return labels_; }

  const Edge& edge(index e) const
  {
    check_edge(e);
    return edges_[e];
  }
  const std::vector<Edge>& edges() const { return edges_; }

  std::span<const cost> unary(index u) const
  {
    check_node(u);
    return {unary_.data() + unary_offset_[u], labels_[u]};
  }

  std::span<const cost> pairwise(index e) const
  {
    check_edge(e);
    const auto& ed = edges_[e];
    return {pairwise_.data() + pairwise_offset_[e], labels_[ed.u] * labels_[ed.v]};
  }

  cost pairwise(index e, index s, index t) const
  {
    return pairwise_[pairwise_offset_[e] + s * labels_[edges_[e].v] + t];
  }

  /// Sorted by neighbor index.
  std::span<const Incidence> neighbors(index u) const
  {
    check_node(u);
    return adjacency_[u];
  }

  std::optional<index> find_edge(index u, index v) const
  {
    if (u >= node_count() || v >= node_count())
      return std::nullopt;
    const auto& adj = adjacency_[u];
    auto it = std::lower_bound(adj.begin(), adj.end(), v,
                               [](const Incidence& a, index x) { return a.neighbor < x; });
    if (it == adj.end() || it->neighbor != v)
      return std::nullopt;
    return it->edge;
  }

  cost forbidden_cost() const { return forbidden_; }

  /// Set for 4-connected grids (rows, cols) with node id = row * cols + col.
  const std::optional<std::pair<index, index>>& grid_shape() const { return grid_; }

  /// Size of the directed slot φ_{u,v} for (edge, side).
  index slot_size(index e, int side) const
  {
    return side == 0 ? labels_[edges_[e].u] : labels_[edges_[e].v];
  }

  void check_node(index u) const
  {
    if (u >= labels_.size())
      throw usage_error("node index " + std::to_string(u) + " out of range");
  }

  void check_edge(index e) const
  {
    if (e >= edges_.size())
      throw usage_error("edge index " + std::to_string(e) + " out of range");
  }

  void check_label(index u, index s) const
  {
    check_node(u);
    if (s >= labels_[u])
      throw usage_error("label " + std::to_string(s) + " out of range for node " + std::to_string(u));
  }

private:
  friend class ModelBuilder;

  std::vector<index> labels_;
  std::vector<index> unary_offset_;
  std::vector<cost> unary_;
  std::vector<Edge> edges_;
  std::vector<index> pairwise_offset_;
  std::vector<cost> pairwise_;
  std::vector<std::vector<Incidence>> adjacency_;
  cost forbidden_ = default_forbidden_cost;
  std::optional<std::pair<index, index>> grid_;
};

/// Collects costs and validates them into a GraphicalModel. Costs equal to
/// +infinity or above the forbidden cap are clamped to the cap; negative or
/// NaN costs are rejected.
class ModelBuilder {
public:
  explicit ModelBuilder(std::vector<index> labels_per_node)
    : labels_(std::move(labels_per_node))
    , unary_(labels_.size())
  {
    for (index u = 0; u < labels_.size(); ++u) {
      if (labels_[u] == 0)
        throw usage_error("node " + std::to_string(u) + " has no labels");
      unary_[u].assign(labels_[u], 0.0);
    }
  }

  ModelBuilder& set_forbidden_cost(cost cap)
  {
    if (!(cap > 0) || !std::isfinite(cap))
      throw usage_error("forbidden cost cap must be positive and finite");
    forbidden_ = cap;
    return *this;
  }

  ModelBuilder& set_unary(index u, std::vector<cost> costs)
  {
    if (u >= labels_.size())
      throw usage_error("node index " + std::to_string(u) + " out of range");
    if (costs.size() != labels_[u])
      throw usage_error("unary table of node " + std::to_string(u) + " has wrong size");
    unary_[u] = std::move(costs);
    return *this;
  }

  /// `table` is row-major with the label of u as the row.
  ModelBuilder& add_edge(index u, index v, std::vector<cost> table)
  {
    if (u >= labels_.size() || v >= labels_.size())
      throw usage_error("edge endpoint out of range");
    if (u == v)
      throw usage_error("self-loop on node " + std::to_string(u));
    if (table.size() != labels_[u] * labels_[v])
      throw usage_error("pairwise table of edge (" + std::to_string(u) + "," + std::to_string(v) +
                        ") has wrong size");
    edges_.push_back({u, v});
    tables_.push_back(std::move(table));
    return *this;
  }

  ModelBuilder& set_grid_shape(index rows, index cols)
  {
    grid_ = std::make_pair(rows, cols);
    return *this;
  }

  GraphicalModel build() const
  {
    GraphicalModel m;
    m.labels_ = labels_;
    m.forbidden_ = forbidden_;
    m.grid_ = grid_;
    const index n = labels_.size();

    m.unary_offset_.resize(n);
    for (index u = 0; u < n; ++u) {
      m.unary_offset_[u] = m.unary_.size();
      for (cost c : unary_[u])
        m.unary_.push_back(sanitize(c));
    }

    m.adjacency_.assign(n, {});
    m.edges_ = edges_;
    for (index e = 0; e < edges_.size(); ++e) {
      const auto [u, v] = edges_[e];
      m.pairwise_offset_.push_back(m.pairwise_.size());
      for (cost c : tables_[e])
        m.pairwise_.push_back(sanitize(c));
      m.adjacency_[u].push_back({v, e, 0});
      m.adjacency_[v].push_back({u, e, 1});
    }
    for (index u = 0; u < n; ++u) {
      auto& adj = m.adjacency_[u];
      std::sort(adj.begin(), adj.end(),
                [](const Incidence& a, const Incidence& b) { return a.neighbor < b.neighbor; });
      for (index k = 1; k < adj.size(); ++k)
        if (adj[k].neighbor == adj[k - 1].neighbor)
          throw usage_error("duplicate edge (" + std::to_string(u) + "," +
                            std::to_string(adj[k].neighbor) + ")");
    }
    return m;
  }

private:
  cost sanitize(cost c) const
  {
    if (std::isnan(c) || c < 0)
      throw usage_error("costs must be non-negative (shift the input first)");
    return std::min(c, forbidden_);
  }

  std::vector<index> labels_;
  std::vector<std::vector<cost>> unary_;
  std::vector<Edge> edges_;
  std::vector<std::vector<cost>> tables_;
  cost forbidden_ = default_forbidden_cost;
  std::optional<std::pair<index, index>> grid_;
};

/// The dual vector φ: two directed slots per edge, slot (e,0) = φ_{u,v} over
/// the labels of u and slot (e,1) = φ_{v,u} over the labels of v.
class Reparametrization {
public:
  Reparametrization() = default;

  explicit Reparametrization(const GraphicalModel& model)
  {
    offsets_.clear();
    offsets_.reserve(2 * model.edge_count() + 1);
    index total = 0;
    for (index e = 0; e < model.edge_count(); ++e) {
      for (int side = 0; side < 2; ++side) {
        offsets_.push_back(total);
        total += model.slot_size(e, side);
      }
    }
    offsets_.push_back(total);
    values_.assign(total, 0.0);
  }

  std::span<cost> slot(index e, int side)
  {
    const index k = 2 * e + static_cast<index>(side);
    return {values_.data() + offsets_[k], offsets_[k + 1] - offsets_[k]};
  }

  std::span<const cost> slot(index e, int side) const
  {
    const index k = 2 * e + static_cast<index>(side);
    return {values_.data() + offsets_[k], offsets_[k + 1] - offsets_[k]};
  }

  std::vector<cost>& values() { return values_; }
  const std::vector<cost>& values() const { return values_; }

  bool matches(const GraphicalModel& model) const
  {
    return offsets_.size() == 2 * model.edge_count() + 1;
  }

  friend bool operator==(const Reparametrization&, const Reparametrization&) = default;

private:
  std::vector<index> offsets_{0};
  std::vector<cost> values_;
};

namespace detail {

/// Directed slot of φ owned by `u` on the edge to `v`.
struct DirectedEdge {
  index edge;
  int side_u;
};

inline DirectedEdge directed(const GraphicalModel& model, index u, index v)
{
  model.check_node(u);
  model.check_node(v);
  const auto e = model.find_edge(u, v);
  if (!e)
    throw usage_error("(" + std::to_string(u) + "," + std::to_string(v) + ") is not an edge");
  return {*e, model.edge(*e).u == u ? 0 : 1};
}

/// θ^φ_e(s,t) with s a label of the first endpoint.
inline cost edge_cost(const GraphicalModel& model, const Reparametrization& phi, index e, index s, index t)
{
  return model.pairwise(e, s, t) + phi.slot(e, 0)[s] + phi.slot(e, 1)[t];
}

inline void fill_unary(const GraphicalModel& model, const Reparametrization& phi, index u, std::span<cost> out)
{
  const auto base = model.unary(u);
  std::copy(base.begin(), base.end(), out.begin());
  for (const auto& inc : model.neighbors(u)) {
    const auto p = phi.slot(inc.edge, inc.side);
    for (index s = 0; s < out.size(); ++s)
      out[s] -= p[s];
  }
}

inline cost min_of(std::span<const cost> xs)
{
  return *std::min_element(xs.begin(), xs.end());
}

inline cost edge_min(const GraphicalModel& model, const Reparametrization& phi, index e)
{
  const auto& ed = model.edge(e);
  cost best = std::numeric_limits<cost>::infinity();
  for (index s = 0; s < model.label_count(ed.u); ++s)
    for (index t = 0; t < model.label_count(ed.v); ++t)
      best = std::min(best, edge_cost(model, phi, e, s, t));
  return best;
}

} // namespace detail

inline std::vector<cost> reparametrized_unary(const GraphicalModel& model, const Reparametrization& phi, index u)
{
  std::vector<cost> out(model.label_count(u));
  detail::fill_unary(model, phi, u, out);
  return out;
}

/// θ^φ_u(s) = θ_u(s) − Σ_{v∈nb(u)} φ_{u,v}(s)
inline cost reparametrized_unary(const GraphicalModel& model, const Reparametrization& phi, index u, index s)
{
  model.check_label(u, s);
  cost c = model.unary(u)[s];
  for (const auto& inc : model.neighbors(u))
    c -= phi.slot(inc.edge, inc.side)[s];
  return c;
}

/// θ^φ_uv(s,t) = θ_uv(s,t) + φ_{u,v}(s) + φ_{v,u}(t); (u,v) may be given in
/// either orientation, s is always the label of u.
inline cost reparametrized_pairwise(const GraphicalModel& model, const Reparametrization& phi,
                                    index u, index v, index s, index t)
{
  const auto d = detail::directed(model, u, v);
  model.check_label(u, s);
  model.check_label(v, t);
  return d.side_u == 0 ? detail::edge_cost(model, phi, d.edge, s, t)
                       : detail::edge_cost(model, phi, d.edge, t, s);
}

inline void check_labeling(const GraphicalModel& model, const Labeling& y)
{
  if (y.size() != model.node_count())
    throw usage_error("labeling has " + std::to_string(y.size()) + " entries, model has " +
                      std::to_string(model.node_count()) + " nodes");
  for (index u = 0; u < y.size(); ++u)
    model.check_label(u, y[u]);
}

/// E(y | θ)
inline cost energy(const GraphicalModel& model, const Labeling& y)
{
  check_labeling(model, y);
  cost total = 0;
  for (index u = 0; u < model.node_count(); ++u)
    total += model.unary(u)[y[u]];
  for (index e = 0; e < model.edge_count(); ++e) {
    const auto& ed = model.edge(e);
    total += model.pairwise(e, y[ed.u], y[ed.v]);
  }
  return total;
}

/// E(y | θ^φ)
inline cost energy(const GraphicalModel& model, const Reparametrization& phi, const Labeling& y)
{
  check_labeling(model, y);
  cost total = 0;
  for (index u = 0; u < model.node_count(); ++u)
    total += reparametrized_unary(model, phi, u, y[u]);
  for (index e = 0; e < model.edge_count(); ++e) {
    const auto& ed = model.edge(e);
    total += detail::edge_cost(model, phi, e, y[ed.u], y[ed.v]);
  }
  return total;
}

/// D(φ): sum of node-wise and edge-wise minima of θ^φ. A lower bound on the
/// minimal energy for every φ.
inline cost dual_value(const GraphicalModel& model, const Reparametrization& phi)
{
  cost total = 0;
  std::vector<cost> buf;
  for (index u = 0; u < model.node_count(); ++u) {
    buf.resize(model.label_count(u));
    detail::fill_unary(model, phi, u, buf);
    total += detail::min_of(buf);
  }
  for (index e = 0; e < model.edge_count(); ++e)
    total += detail::edge_min(model, phi, e);
  return total;
}

/// True iff θ^φ ≥ −tol everywhere (feasibility for the constrained dual).
inline bool check_feasible(const GraphicalModel& model, const Reparametrization& phi,
                           cost tol = default_tolerance)
{
  if (tol < 0)
    throw usage_error("tolerance must be non-negative");
  std::vector<cost> buf;
  for (index u = 0; u < model.node_count(); ++u) {
    buf.resize(model.label_count(u));
    detail::fill_unary(model, phi, u, buf);
    if (detail::min_of(buf) < -tol)
      return false;
  }
  for (index e = 0; e < model.edge_count(); ++e)
    if (detail::edge_min(model, phi, e) < -tol)
      return false;
  return true;
}

/// Node-wise argmin of θ^φ_u, lowest label on ties.
inline Labeling primal_round(const GraphicalModel& model, const Reparametrization& phi)
{
  Labeling y(model.node_count());
  std::vector<cost> buf;
  for (index u = 0; u < model.node_count(); ++u) {
    buf.resize(model.label_count(u));
    detail::fill_unary(model, phi, u, buf);
    y[u] = static_cast<index>(std::min_element(buf.begin(), buf.end()) - buf.begin());
  }
  return y;
}

} // namespace bcamap
