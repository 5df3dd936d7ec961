#pragma once

// Elementary in-place updates of the reparametrization: node-adjacent
// aggregation / distribution, the MPLP and Handshake edge updates and the
// (redistribution) dynamic-programming pushes. All of them keep θ^φ ≥ 0 when
// started from a feasible φ and never decrease the dual.

#include <cstdint>
#include <string>
#include <vector>

#include "model.hpp"

namespace bcamap {

/// Counts messages: one message is one directed min-marginal
/// min_t (θ^φ_uv(s,t)) computed for all labels s of one endpoint.
class MessageCounter {
public:
  void add(std::uint64_t n = 1) { count_ += n; }
  std::uint64_t count() const { return count_; }
  void reset() { count_ = 0; }

private:
  std::uint64_t count_ = 0;
};

namespace detail {

inline void count(MessageCounter* counter, std::uint64_t n)
{
  if (counter)
    counter->add(n);
}

/// out(x) = min over the other endpoint's labels of θ^φ_e, for every label x
/// of the endpoint on `side`.
inline void side_minima(const GraphicalModel& model, const Reparametrization& phi, index e, int side,
                        std::vector<cost>& out)
{
  const auto& ed = model.edge(e);
  const index nu = model.label_count(ed.u);
  const index nv = model.label_count(ed.v);
  const auto pu = phi.slot(e, 0);
  const auto pv = phi.slot(e, 1);
  const auto table = model.pairwise(e);
  if (side == 0) {
    out.assign(nu, std::numeric_limits<cost>::infinity());
    for (index s = 0; s < nu; ++s) {
      cost best = out[s];
      for (index t = 0; t < nv; ++t)
        best = std::min(best, table[s * nv + t] + pv[t]);
      out[s] = best + pu[s];
    }
  } else {
    out.assign(nv, std::numeric_limits<cost>::infinity());
    for (index s = 0; s < nu; ++s)
      for (index t = 0; t < nv; ++t)
        out[t] = std::min(out[t], table[s * nv + t] + pu[s]);
    for (index t = 0; t < nv; ++t)
      out[t] += pv[t];
  }
}

/// Moves the side minima of edge e into the endpoint on `side`.
inline void collect(const GraphicalModel& model, Reparametrization& phi, index e, int side,
                    MessageCounter* counter)
{
  std::vector<cost> mins;
  side_minima(model, phi, e, side, mins);
  auto slot = phi.slot(e, side);
  for (index x = 0; x < slot.size(); ++x)
    slot[x] -= mins[x];
  count(counter, 1);
}

/// φ(e,side) += r · θ^φ_u, u being the endpoint on `side`.
inline void push_fraction(const GraphicalModel& model, Reparametrization& phi, index u, index e, int side,
                          cost r)
{
  const auto th = reparametrized_unary(model, phi, u);
  auto slot = phi.slot(e, side);
  for (index s = 0; s < slot.size(); ++s)
    slot[s] += r * th[s];
}

} // namespace detail

/// Moves min_t θ^φ_uv(s,t) from edge uv into node u (one message).
inline void collect_into(const GraphicalModel& model, Reparametrization& phi, index u, index v,
                         MessageCounter* counter = nullptr)
{
  const auto d = detail::directed(model, u, v);
  detail::collect(model, phi, d.edge, d.side_u, counter);
}

/// Node-adjacent aggregation restricted to neighbors accepted by `keep`.
template<typename Predicate>
void node_aggregate_if(const GraphicalModel& model, Reparametrization& phi, index u, Predicate keep,
                       MessageCounter* counter = nullptr)
{
  for (const auto& inc : model.neighbors(u))
    if (keep(inc.neighbor))
      detail::collect(model, phi, inc.edge, inc.side, counter);
}

/// Aggregation: φ_{u,v}(s) −= min_l θ^φ_uv(s,l) for every neighbor v.
/// Reaches the block maximum over the node-adjacent block of u.
inline void node_aggregate(const GraphicalModel& model, Reparametrization& phi, index u,
                           MessageCounter* counter = nullptr)
{
  node_aggregate_if(model, phi, u, [](index) { return true; }, counter);
}

/// Distribution: φ_{u,v}(s) += w_{u,v} θ^φ_u(s). `weights` is aligned with
/// model.neighbors(u); they must be non-negative and sum to at most one.
inline void node_distribute(const GraphicalModel& model, Reparametrization& phi, index u,
                            const std::vector<cost>& weights)
{
  const auto adj = model.neighbors(u);
  if (weights.size() != adj.size())
    throw usage_error("expected " + std::to_string(adj.size()) + " weights for node " + std::to_string(u));
  cost sum = 0;
  for (cost w : weights) {
    if (!(w >= 0))
      throw usage_error("distribution weights must be non-negative");
    sum += w;
  }
  if (sum > 1 + 1e-12)
    throw usage_error("distribution weights of node " + std::to_string(u) + " sum to more than one");

  const auto th = reparametrized_unary(model, phi, u);
  for (index k = 0; k < adj.size(); ++k) {
    if (weights[k] == 0)
      continue;
    auto slot = phi.slot(adj[k].edge, adj[k].side);
    for (index s = 0; s < slot.size(); ++s)
      slot[s] += weights[k] * th[s];
  }
}

enum class WeightKind { MSD, CMP, DP, TRWS };

/// Selects the distribution weights; DP and TRWS additionally need a node
/// order (a permutation listing the nodes first to last).
class WeightScheme {
public:
  explicit WeightScheme(WeightKind kind)
    : kind_(kind)
  {
  }

  WeightScheme(WeightKind kind, const std::vector<index>& order)
    : kind_(kind)
    , rank_(order.size(), order.size())
  {
    for (index k = 0; k < order.size(); ++k) {
      if (order[k] >= order.size() || rank_[order[k]] != order.size())
        throw usage_error("node order is not a permutation");
      rank_[order[k]] = k;
    }
  }

  WeightKind kind() const { return kind_; }
  index order_size() const { return rank_.size(); }
  index rank(index u) const { return rank_.at(u); }

private:
  WeightKind kind_;
  std::vector<index> rank_;
};

/// Distribution weights of node u, aligned with model.neighbors(u).
inline std::vector<cost> weights_for(const WeightScheme& scheme, const GraphicalModel& model, index u)
{
  const auto adj = model.neighbors(u);
  std::vector<cost> w(adj.size(), 0.0);
  if (adj.empty())
    return w;
  switch (scheme.kind()) {
  case WeightKind::MSD:
    std::fill(w.begin(), w.end(), 1.0 / static_cast<cost>(adj.size()));
    return w;
  case WeightKind::CMP:
    std::fill(w.begin(), w.end(), 1.0 / static_cast<cost>(adj.size() + 1));
    return w;
  case WeightKind::DP:
  case WeightKind::TRWS:
    break;
  }
  if (scheme.order_size() != model.node_count())
    throw usage_error("DP and TRWS weights need a node order covering the model");

  index n_in = 0;
  index n_out = 0;
  for (const auto& inc : adj)
    (scheme.rank(inc.neighbor) > scheme.rank(u) ? n_out : n_in) += 1;
  const cost later = scheme.kind() == WeightKind::DP ? 1.0 : 1.0 / static_cast<cost>(std::max(n_in, n_out));
  for (index k = 0; k < adj.size(); ++k)
    if (scheme.rank(adj[k].neighbor) > scheme.rank(u))
      w[k] = later;
  return w;
}

/// MPLP edge update. Aggregates θ^φ_u and θ^φ_v into the edge, then pushes
/// half of the row minima back to u and afterwards half of the column minima
/// of the updated edge back to v (two messages).
inline void mplp_update(const GraphicalModel& model, Reparametrization& phi, index u, index v,
                        MessageCounter* counter = nullptr)
{
  const auto d = detail::directed(model, u, v);
  const int su = d.side_u;
  const int sv = 1 - su;
  detail::push_fraction(model, phi, u, d.edge, su, 1.0);
  detail::push_fraction(model, phi, v, d.edge, sv, 1.0);

  std::vector<cost> mins;
  detail::side_minima(model, phi, d.edge, su, mins);
  auto pu = phi.slot(d.edge, su);
  for (index s = 0; s < pu.size(); ++s)
    pu[s] -= 0.5 * mins[s];

  detail::side_minima(model, phi, d.edge, sv, mins);
  auto pv = phi.slot(d.edge, sv);
  for (index t = 0; t < pv.size(); ++t)
    pv[t] -= 0.5 * mins[t];
  detail::count(counter, 2);
}

/// Handshake edge update: MPLP aggregation and the half push to u, then the
/// whole remaining column minima to v and the remaining row minima to u
/// (three messages). Leaves every row and column minimum of θ^φ_uv at zero;
/// the result does not depend on the incoming φ_{v,u}.
inline void handshake_update(const GraphicalModel& model, Reparametrization& phi, index u, index v,
                             MessageCounter* counter = nullptr)
{
  const auto d = detail::directed(model, u, v);
  const int su = d.side_u;
  const int sv = 1 - su;
  detail::push_fraction(model, phi, u, d.edge, su, 1.0);
  detail::push_fraction(model, phi, v, d.edge, sv, 1.0);

  std::vector<cost> mins;
  detail::side_minima(model, phi, d.edge, su, mins);
  auto pu = phi.slot(d.edge, su);
  for (index s = 0; s < pu.size(); ++s)
    pu[s] -= 0.5 * mins[s];

  detail::collect(model, phi, d.edge, sv, nullptr);
  detail::collect(model, phi, d.edge, su, nullptr);
  detail::count(counter, 3);
}

/// DP push u→v: all of θ^φ_u into the edge, then the column minima into v.
inline void dp_update(const GraphicalModel& model, Reparametrization& phi, index u, index v,
                      MessageCounter* counter = nullptr)
{
  const auto d = detail::directed(model, u, v);
  detail::push_fraction(model, phi, u, d.edge, d.side_u, 1.0);
  detail::collect(model, phi, d.edge, 1 - d.side_u, counter);
}

/// Redistribution DP push u→v: fraction r of θ^φ_u into the edge (1−r stays
/// at u), then the column minima into v.
inline void rdp_update(const GraphicalModel& model, Reparametrization& phi, index u, index v, cost r,
                       MessageCounter* counter = nullptr)
{
  if (!(r >= 0 && r <= 1))
    throw usage_error("rDP fraction must lie in [0,1]");
  const auto d = detail::directed(model, u, v);
  detail::push_fraction(model, phi, u, d.edge, d.side_u, r);
  detail::collect(model, phi, d.edge, 1 - d.side_u, counter);
}

} // namespace bcamap
