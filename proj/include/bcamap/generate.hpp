#pragma once

// Seeded synthetic instances in three connectivity regimes: sparse 4-connected
// grids, grids with extra long-range edges, and complete graphs.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <random>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "model.hpp"

namespace bcamap {

enum class Regime { SparseGrid, Denser, Complete };

struct InstanceSpec {
  Regime regime = Regime::SparseGrid;
  index rows = 0;
  index cols = 0;
  /// node count for complete graphs
  index nodes = 0;
  index labels = 2;
  /// fraction of all n(n−1)/2 node pairs that are edges (denser only)
  double connectivity = 0;
};

struct CostOptions {
  /// unaries uniform in [0, unary_scale)
  cost unary_scale = 10;
  /// truncated-linear weights uniform in [weight_low, weight_high)
  cost weight_low = 0.5;
  cost weight_high = 3;
  /// truncation of |s − t|; 0 picks max(1, labels / 3)
  index truncation = 0;
  /// complete-graph tables uniform in [0, complete_scale)
  cost complete_scale = 10;
};

namespace detail {

inline std::vector<std::string_view> split(std::string_view text, char sep)
{
  std::vector<std::string_view> parts;
  while (true) {
    const auto pos = text.find(sep);
    parts.push_back(text.substr(0, pos));
    if (pos == std::string_view::npos)
      return parts;
    text.remove_prefix(pos + 1);
  }
}

template<typename T>
T parse_number(std::string_view text, std::string_view what)
{
  T value{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size())
    throw usage_error("bad " + std::string(what) + " '" + std::string(text) + "'");
  return value;
}

inline std::vector<cost> truncated_linear(index labels, cost weight, index truncation)
{
  std::vector<cost> table(labels * labels);
  for (index s = 0; s < labels; ++s)
    for (index t = 0; t < labels; ++t) {
      const index d = s > t ? s - t : t - s;
      table[s * labels + t] = weight * static_cast<cost>(std::min(d, truncation));
    }
  return table;
}

} // namespace detail

/// Parses "sparse_grid:H,W,L", "denser:H,W,L,conn" or "complete:n,L".
inline InstanceSpec parse_instance_spec(std::string_view text)
{
  const auto colon = text.find(':');
  if (colon == std::string_view::npos)
    throw usage_error("instance spec must look like regime:params");
  const auto name = text.substr(0, colon);
  const auto args = detail::split(text.substr(colon + 1), ',');
  InstanceSpec spec;
  auto size = [](std::string_view s) { return detail::parse_number<index>(s, "size"); };
  if (name == "sparse_grid" && args.size() == 3) {
    spec = {Regime::SparseGrid, size(args[0]), size(args[1]), 0, size(args[2]), 0};
  } else if (name == "denser" && args.size() == 4) {
    spec = {Regime::Denser, size(args[0]), size(args[1]), 0, size(args[2]),
            detail::parse_number<double>(args[3], "connectivity")};
  } else if (name == "complete" && args.size() == 2) {
    spec = {Regime::Complete, 0, 0, size(args[0]), size(args[1]), 0};
  } else {
    throw usage_error("unknown instance spec '" + std::string(text) +
                      "' (expected sparse_grid:H,W,L, denser:H,W,L,conn or complete:n,L)");
  }
  return spec;
}

inline GraphicalModel generate_instance(const InstanceSpec& spec, std::uint64_t seed, const CostOptions& costs = {})
{
  if (spec.labels == 0)
    throw usage_error("label count must be positive");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<cost> unit(0.0, 1.0);
  const index L = spec.labels;

  if (spec.regime == Regime::Complete) {
    if (spec.nodes == 0)
      throw usage_error("complete graph needs at least one node");
    ModelBuilder b(std::vector<index>(spec.nodes, L));
    for (index u = 0; u < spec.nodes; ++u) {
      std::vector<cost> th(L);
      for (auto& x : th)
        x = costs.complete_scale * unit(rng);
      b.set_unary(u, std::move(th));
    }
    for (index u = 0; u < spec.nodes; ++u)
      for (index v = u + 1; v < spec.nodes; ++v) {
        std::vector<cost> table(L * L);
        for (auto& x : table)
          x = costs.complete_scale * unit(rng);
        b.add_edge(u, v, std::move(table));
      }
    return b.build();
  }

  if (spec.rows == 0 || spec.cols == 0)
    throw usage_error("grid needs positive height and width");
  const index n = spec.rows * spec.cols;
  const index trunc = costs.truncation ? costs.truncation : std::max<index>(1, L / 3);
  auto weight = [&] { return costs.weight_low + (costs.weight_high - costs.weight_low) * unit(rng); };

  ModelBuilder b(std::vector<index>(n, L));
  for (index u = 0; u < n; ++u) {
    std::vector<cost> th(L);
    for (auto& x : th)
      x = costs.unary_scale * unit(rng);
    b.set_unary(u, std::move(th));
  }
  std::set<std::pair<index, index>> present;
  for (index r = 0; r < spec.rows; ++r)
    for (index c = 0; c < spec.cols; ++c) {
      const index u = r * spec.cols + c;
      if (c + 1 < spec.cols) {
        b.add_edge(u, u + 1, detail::truncated_linear(L, weight(), trunc));
        present.emplace(u, u + 1);
      }
      if (r + 1 < spec.rows) {
        b.add_edge(u, u + spec.cols, detail::truncated_linear(L, weight(), trunc));
        present.emplace(u, u + spec.cols);
      }
    }

  if (spec.regime == Regime::SparseGrid) {
    b.set_grid_shape(spec.rows, spec.cols);
    return b.build();
  }

  if (!(spec.connectivity >= 0 && spec.connectivity <= 1))
    throw usage_error("connectivity must lie in [0, 1]");
  const index pairs = n * (n - 1) / 2;
  const auto target = static_cast<index>(std::llround(spec.connectivity * static_cast<double>(pairs)));
  if (target > present.size()) {
    std::vector<std::pair<index, index>> candidates;
    for (index u = 0; u < n; ++u)
      for (index v = u + 1; v < n; ++v)
        if (!present.count({u, v}))
          candidates.emplace_back(u, v);
    std::shuffle(candidates.begin(), candidates.end(), rng);
    candidates.resize(target - present.size());
    std::sort(candidates.begin(), candidates.end());
    for (const auto& [u, v] : candidates)
      b.add_edge(u, v, detail::truncated_linear(L, weight(), trunc));
  }
  return b.build();
}

inline GraphicalModel generate_instance(std::string_view spec, std::uint64_t seed, const CostOptions& costs = {})
{
  return generate_instance(parse_instance_spec(spec), seed, costs);
}

} // namespace bcamap
