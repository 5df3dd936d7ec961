#pragma once

// Full block-coordinate-ascent solvers on the shared constrained dual, with
// message accounting and per-pass convergence traces.

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "blocks.hpp"
#include "model.hpp"
#include "selection.hpp"
#include "updates.hpp"

namespace bcamap {

enum class Method { MSD, CMP, TRWS, MPLP, MPLPPP, DMM, TBCA, TBCAPP, SPAM };

enum class TreeMode { Static, Dynamic };

/// Blocks used by the subgraph methods. Auto picks the method's own
/// default: rows/columns (grids) or MMC for DMM, strict shortest paths for
/// SPAM, spanning trees for TBCA/TBCA++.
enum class BlockChoice { Auto, MMC, SSP, RowsColumns, Trees };

inline std::string_view method_name(Method m)
{
  switch (m) {
  case Method::MSD: return "msd";
  case Method::CMP: return "cmp";
  case Method::TRWS: return "trws";
  case Method::MPLP: return "mplp";
  case Method::MPLPPP: return "mplp++";
  case Method::DMM: return "dmm";
  case Method::TBCA: return "tbca";
  case Method::TBCAPP: return "tbca++";
  case Method::SPAM: return "spam";
  }
  return "?";
}

inline std::optional<Method> parse_method(std::string_view name)
{
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  for (Method m : {Method::MSD, Method::CMP, Method::TRWS, Method::MPLP, Method::MPLPPP, Method::DMM, Method::TBCA,
                   Method::TBCAPP, Method::SPAM})
    if (lower == method_name(m))
      return m;
  if (lower == "mplppp")
    return Method::MPLPPP;
  if (lower == "tbcapp")
    return Method::TBCAPP;
  return std::nullopt;
}

struct SolverConfig {
  Method method = Method::SPAM;
  std::optional<std::uint64_t> max_messages;
  std::optional<std::uint64_t> max_passes = 1000;
  std::optional<double> max_seconds;
  /// Stop once the relative dual improvement stays below tol for
  /// `stall_passes` consecutive passes.
  double tol = 1e-9;
  std::uint64_t stall_passes = 5;
  std::uint64_t seed = 0;
  TreeMode tree_mode = TreeMode::Static;
  /// Node processing order; identity when empty.
  std::vector<index> node_order;
  BlockChoice blocks = BlockChoice::Auto;
  /// Mean |E| of the dataset the instance belongs to; messages are reported
  /// unscaled when absent.
  std::optional<double> dataset_mean_edges;
};

struct TraceRecord {
  std::uint64_t pass;
  std::uint64_t messages;
  double normalized_messages;
  cost dual;
  cost primal_energy;
  double wall_seconds;

  friend bool operator==(const TraceRecord&, const TraceRecord&) = default;
};

struct SolverResult {
  Reparametrization phi;
  Labeling labeling;
  std::vector<TraceRecord> trace;
  std::uint64_t messages = 0;
};

/// raw · dataset_mean_edges / instance_edges; raw itself for edge-free
/// instances.
inline double normalize_messages(std::uint64_t raw, index instance_edges, double dataset_mean_edges)
{
  if (instance_edges == 0)
    return static_cast<double>(raw);
  return static_cast<double>(raw) * dataset_mean_edges / static_cast<double>(instance_edges);
}

namespace detail {

class Solver {
public:
  Solver(const GraphicalModel& model, const SolverConfig& config)
    : model_(model)
    , config_(config)
    , phi_(model)
    , order_(config.node_order.empty() ? identity_order(model.node_count()) : config.node_order)
    , start_(std::chrono::steady_clock::now())
  {
    validate();
  }

  SolverResult run()
  {
    SolverResult result;
    record(0, result.trace);
    if (model_.edge_count() > 0) {
      prepare();
      std::uint64_t stalled = 0;
      for (std::uint64_t pass = 1;; ++pass) {
        const bool complete = run_pass();
        record(pass, result.trace);
        if (!complete || budget_exhausted())
          break;
        if (config_.max_passes && pass >= *config_.max_passes)
          break;
        if (config_.max_seconds && elapsed() >= *config_.max_seconds)
          break;
        const cost before = result.trace[result.trace.size() - 2].dual;
        const cost after = result.trace.back().dual;
        const double rel = (after - before) / std::max(1.0, std::abs(after));
        stalled = rel < config_.tol ? stalled + 1 : 0;
        if (stalled >= config_.stall_passes)
          break;
      }
    }
    result.labeling = primal_round(model_, phi_);
    result.messages = counter_.count();
    result.phi = std::move(phi_);
    return result;
  }

private:
  void validate() const
  {
    if (!(config_.tol > 0))
      throw usage_error("tol must be positive");
    if (!config_.max_messages && !config_.max_passes && !config_.max_seconds)
      throw usage_error("at least one stopping criterion is required");
    if (model_.node_count() == 0)
      throw usage_error("model has no nodes");
    if (order_.size() != model_.node_count())
      throw usage_error("node order must list every node exactly once");
    WeightScheme check(WeightKind::TRWS, order_);
    if (config_.tree_mode == TreeMode::Dynamic &&
        ((config_.method != Method::TBCA && config_.method != Method::TBCAPP) ||
         (config_.blocks != BlockChoice::Auto && config_.blocks != BlockChoice::Trees)))
      throw usage_error("dynamic trees are only available for TBCA and TBCA++ on tree blocks");
    if (config_.blocks != BlockChoice::Auto) {
      const bool chains = config_.method == Method::DMM || config_.method == Method::SPAM;
      const bool tbca = config_.method == Method::TBCA || config_.method == Method::TBCAPP;
      if (!chains && !tbca)
        throw usage_error("block choice only applies to DMM, SPAM, TBCA and TBCA++");
      if (chains && config_.blocks == BlockChoice::Trees)
        throw usage_error("DMM and SPAM run on chains");
    }
  }

  void prepare()
  {
    switch (config_.method) {
    case Method::MSD:
    case Method::CMP:
    case Method::MPLP:
    case Method::MPLPPP:
      break;
    case Method::TRWS:
      forward_ = WeightScheme(WeightKind::TRWS, order_);
      reversed_ = order_;
      std::reverse(reversed_.begin(), reversed_.end());
      backward_ = WeightScheme(WeightKind::TRWS, reversed_);
      break;
    case Method::DMM:
    case Method::SPAM:
    case Method::TBCA:
    case Method::TBCAPP:
      if (config_.tree_mode == TreeMode::Static)
        schedule_ = make_schedule();
      break;
    }
  }

  BlockSchedule make_schedule() const
  {
    BlockChoice choice = config_.blocks;
    if (choice == BlockChoice::Auto) {
      switch (config_.method) {
      case Method::DMM:
        choice = is_grid() ? BlockChoice::RowsColumns : BlockChoice::MMC;
        break;
      case Method::SPAM:
        choice = BlockChoice::SSP;
        break;
      default:
        choice = BlockChoice::Trees;
        break;
      }
    }
    switch (choice) {
    case BlockChoice::MMC: return compute_mmc_cover(model_, order_);
    case BlockChoice::SSP: return compute_ssp_cover(model_, config_.seed);
    case BlockChoice::RowsColumns: return compute_rows_columns_cover(model_);
    case BlockChoice::Trees:
    case BlockChoice::Auto: break;
    }
    return compute_static_trees(model_);
  }

  bool is_grid() const
  {
    if (!model_.grid_shape())
      return false;
    const auto [rows, cols] = *model_.grid_shape();
    return rows * cols == model_.node_count() &&
           model_.edge_count() == rows * (cols - 1) + cols * (rows - 1);
  }

  /// One pass; false when the message budget ran out part-way.
  bool run_pass()
  {
    switch (config_.method) {
    case Method::MSD: return node_pass(WeightScheme(WeightKind::MSD));
    case Method::CMP: return node_pass(WeightScheme(WeightKind::CMP));
    case Method::TRWS: return trws_sweep(order_, *forward_) && trws_sweep(reversed_, *backward_);
    case Method::MPLP:
    case Method::MPLPPP:
      for (const auto& ed : model_.edges()) {
        if (config_.method == Method::MPLP)
          mplp_update(model_, phi_, ed.u, ed.v, &counter_);
        else
          handshake_update(model_, phi_, ed.u, ed.v, &counter_);
        if (budget_exhausted())
          return false;
      }
      return true;
    case Method::DMM:
    case Method::SPAM:
    case Method::TBCA:
    case Method::TBCAPP:
      break;
    }
    if (!schedule_) {
      // dynamic trees, rebuilt from the current rounding every pass
      const auto y = primal_round(model_, phi_);
      return block_pass(compute_dynamic_forest(model_, phi_, y));
    }
    return block_pass(*schedule_);
  }

  bool node_pass(const WeightScheme& scheme)
  {
    for (index u : order_) {
      node_aggregate(model_, phi_, u, &counter_);
      node_distribute(model_, phi_, u, weights_for(scheme, model_, u));
      if (budget_exhausted())
        return false;
    }
    return true;
  }

  /// Each node collects the messages of its predecessors in the sweep order
  /// and hands its excess on to its successors with TRWS weights.
  bool trws_sweep(const std::vector<index>& order, const WeightScheme& scheme)
  {
    for (index u : order) {
      node_aggregate_if(
        model_, phi_, u, [&](index v) { return scheme.rank(v) < scheme.rank(u); }, &counter_);
      node_distribute(model_, phi_, u, weights_for(scheme, model_, u));
      if (budget_exhausted())
        return false;
    }
    return true;
  }

  bool block_pass(const BlockSchedule& schedule)
  {
    for (const auto& block : schedule.blocks) {
      switch (config_.method) {
      case Method::DMM:
      case Method::SPAM:
        hm_chain(model_, phi_, block, &counter_);
        break;
      case Method::TBCA:
        if (block.is_chain())
          tbca_chain(model_, phi_, block, &counter_);
        else
          tbca_tree(model_, phi_, block, &counter_);
        break;
      case Method::TBCAPP:
        if (block.is_chain())
          tbca_pp_chain(model_, phi_, block, &counter_);
        else
          tbca_pp_tree(model_, phi_, block, &counter_);
        break;
      default:
        break;
      }
      if (budget_exhausted())
        return false;
    }
    return true;
  }

  bool budget_exhausted() const { return config_.max_messages && counter_.count() >= *config_.max_messages; }

  double elapsed() const
  {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

  void record(std::uint64_t pass, std::vector<TraceRecord>& trace) const
  {
    const auto y = primal_round(model_, phi_);
    const double mean = config_.dataset_mean_edges.value_or(static_cast<double>(model_.edge_count()));
    trace.push_back({pass, counter_.count(), normalize_messages(counter_.count(), model_.edge_count(), mean),
                     dual_value(model_, phi_), energy(model_, y), elapsed()});
  }

  const GraphicalModel& model_;
  const SolverConfig& config_;
  Reparametrization phi_;
  std::vector<index> order_;
  std::vector<index> reversed_;
  std::optional<WeightScheme> forward_;
  std::optional<WeightScheme> backward_;
  std::optional<BlockSchedule> schedule_;
  MessageCounter counter_;
  std::chrono::steady_clock::time_point start_;
};

} // namespace detail

/// Runs one solver from φ = 0. The trace has one record before the first
/// pass and one after every (possibly budget-truncated) pass.
inline SolverResult run(const GraphicalModel& model, const SolverConfig& config)
{
  return detail::Solver(model, config).run();
}

} // namespace bcamap
