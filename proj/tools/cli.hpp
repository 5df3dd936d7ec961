#pragma once

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include <bcamap/generate.hpp>
#include <bcamap/report.hpp>
#include <bcamap/solvers.hpp>
#include <bcamap/uai.hpp>
#include <bcamap/verify_suite.hpp>

namespace bcamap::cli {

enum ExitCode : int { ok = 0, failure = 1, usage = 2 };

struct RunOptions {
  std::string method = "spam";
  std::optional<std::uint64_t> max_messages;
  std::optional<std::uint64_t> max_passes;
  std::optional<double> max_seconds;
  double tol = 1e-9;
  std::uint64_t seed = 0;
  std::string order = "input";
  std::string blocks = "auto";
  bool dynamic_trees = false;
  bool probabilities = false;
  bool no_wall_time = false;
};

struct Instance {
  std::string name;
  GraphicalModel model;
  cost offset = 0;
};

inline void add_run_options(CLI::App& app, RunOptions& o)
{
  app.add_option("--max-messages", o.max_messages, "Message budget");
  app.add_option("--max-passes", o.max_passes, "Pass limit (default 1000 when no budget is given)");
  app.add_option("--max-seconds", o.max_seconds, "Wall-time limit");
  app.add_option("--tol", o.tol, "Relative improvement threshold for stalling");
  app.add_option("--seed", o.seed, "Seed for generation, orders and SSP covers");
  app.add_option("--order", o.order, "Node order")->check(CLI::IsMember({"input", "random"}));
  app.add_option("--blocks", o.blocks, "Block cover for DMM/SPAM/TBCA")
    ->check(CLI::IsMember({"auto", "mmc", "ssp", "rows", "trees"}));
  app.add_flag("--dynamic-trees", o.dynamic_trees, "Rebuild TBCA trees from local gaps each pass");
  app.add_flag("--probabilities", o.probabilities, "Read UAI tables as probabilities");
  app.add_flag("--no-wall-time", o.no_wall_time, "Write 0 for wall time so traces are reproducible");
}

inline SolverConfig make_config(Method method, const RunOptions& o, const GraphicalModel& model)
{
  SolverConfig c;
  c.method = method;
  c.max_messages = o.max_messages;
  c.max_seconds = o.max_seconds;
  c.max_passes = o.max_passes;
  if (!o.max_passes && !o.max_messages && !o.max_seconds)
    c.max_passes = 1000;
  c.tol = o.tol;
  c.seed = o.seed;
  c.tree_mode = o.dynamic_trees ? TreeMode::Dynamic : TreeMode::Static;
  if (o.order == "random") {
    c.node_order = identity_order(model.node_count());
    std::mt19937_64 rng(o.seed);
    std::shuffle(c.node_order.begin(), c.node_order.end(), rng);
  }
  if (o.blocks == "mmc")
    c.blocks = BlockChoice::MMC;
  else if (o.blocks == "ssp")
    c.blocks = BlockChoice::SSP;
  else if (o.blocks == "rows")
    c.blocks = BlockChoice::RowsColumns;
  else if (o.blocks == "trees")
    c.blocks = BlockChoice::Trees;
  return c;
}

/// A path to a UAI file or a generator spec such as complete:8,5.
inline Instance load_instance(const std::string& source, bool generated, const RunOptions& o)
{
  if (generated)
    return {source, generate_instance(source, o.seed), 0};
  UaiOptions uo;
  uo.probabilities = o.probabilities;
  auto loaded = parse_uai_file(source, uo);
  return {std::filesystem::path(source).filename().string(), std::move(loaded.model), loaded.energy_offset};
}

inline std::optional<Method> method_or_complain(const std::string& name, const CLI::App& app)
{
  const auto m = parse_method(name);
  if (!m)
    std::cerr << "unknown method '" << name << "'\n\n" << app.help();
  return m;
}

inline void write_trace_file(const std::string& path, const SolverResult& result, bool wall_time)
{
  std::ofstream out(path);
  if (!out)
    throw std::runtime_error("cannot write " + path);
  write_trace_csv(out, result.trace, wall_time);
}

inline int solve(const CLI::App& app, const std::string& model_path, const std::string& generate,
                 const std::string& trace, const std::string& summary, const RunOptions& o)
{
  const auto method = method_or_complain(o.method, app);
  if (!method)
    return usage;
  if (model_path.empty() == generate.empty()) {
    std::cerr << "exactly one of --model and --generate is required\n\n" << app.help();
    return usage;
  }
  Instance inst;
  try {
    inst = load_instance(generate.empty() ? model_path : generate, !generate.empty(), o);
  } catch (const usage_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return usage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return failure;
  }
  try {
    const auto result = run(inst.model, make_config(*method, o, inst.model));
    if (!trace.empty())
      write_trace_file(trace, result, !o.no_wall_time);
    auto s = summarize(inst.name, *method, result, inst.offset);
    if (o.no_wall_time)
      s.wall_seconds = 0;
    const auto json = to_json(s);
    if (!summary.empty()) {
      std::ofstream out(summary);
      if (!out)
        throw std::runtime_error("cannot write " + summary);
      out << json.dump(2) << "\n";
    }
    std::cout << json.dump() << "\n";
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return failure;
  }
  return ok;
}

inline unsigned worker_count(std::size_t jobs)
{
  unsigned n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("BCA_MAP_THREADS")) {
    const long cap = std::strtol(env, nullptr, 10);
    if (cap > 0)
      n = std::min<unsigned>(n, static_cast<unsigned>(cap));
  }
  return static_cast<unsigned>(std::min<std::size_t>(n, std::max<std::size_t>(jobs, 1)));
}

inline std::string safe_name(std::string s)
{
  for (auto& c : s)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '.' && c != '-' && c != '+' && c != '_')
      c = '_';
  return s;
}

inline int bench(const CLI::App& app, const std::vector<std::string>& models, const std::vector<std::string>& generated,
                 const std::vector<std::string>& method_names, const std::string& out_dir, const RunOptions& o)
{
  std::vector<Method> methods;
  for (const auto& name : method_names) {
    const auto m = method_or_complain(name, app);
    if (!m)
      return usage;
    methods.push_back(*m);
  }
  if (models.empty() && generated.empty()) {
    std::cerr << "bench needs at least one --model or --generate\n\n" << app.help();
    return usage;
  }

  std::vector<Instance> instances;
  try {
    for (const auto& path : models)
      instances.push_back(load_instance(path, false, o));
    for (const auto& spec : generated)
      instances.push_back(load_instance(spec, true, o));
  } catch (const usage_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return usage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return failure;
  }
  double mean_edges = 0;
  for (const auto& inst : instances)
    mean_edges += static_cast<double>(inst.model.edge_count());
  mean_edges /= static_cast<double>(instances.size());

  std::filesystem::create_directories(out_dir);
  struct Job {
    std::size_t instance;
    Method method;
    std::vector<TraceRecord> trace;
    std::string error;
  };
  std::vector<Job> jobs;
  for (std::size_t i = 0; i < instances.size(); ++i)
    for (Method m : methods)
      jobs.push_back({i, m, {}, {}});

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t j; (j = next++) < jobs.size();) {
      auto& job = jobs[j];
      const auto& inst = instances[job.instance];
      try {
        auto config = make_config(job.method, o, inst.model);
        config.dataset_mean_edges = mean_edges;
        const auto result = run(inst.model, config);
        job.trace = result.trace;
        const auto name = std::to_string(job.instance) + "_" + safe_name(inst.name) + "_" +
                          std::string(method_name(job.method)) + ".csv";
        write_trace_file((std::filesystem::path(out_dir) / name).string(), result, !o.no_wall_time);
      } catch (const std::exception& e) {
        job.error = e.what();
      }
    }
  };
  std::vector<std::jthread> pool;
  const unsigned workers = worker_count(jobs.size());
  for (unsigned w = 0; w < workers; ++w)
    pool.emplace_back(worker);
  pool.clear();

  std::ofstream agg(std::filesystem::path(out_dir) / "aggregate.csv");
  agg << "instance,method,pass,messages,normalized_messages,dual,primal\n";
  int status = ok;
  for (const auto& job : jobs) {
    if (!job.error.empty()) {
      std::cerr << "error: " << instances[job.instance].name << " " << method_name(job.method) << ": " << job.error
                << "\n";
      status = failure;
      continue;
    }
    for (const auto& r : job.trace) {
      agg << csv_field(instances[job.instance].name) << ',' << method_name(job.method) << ',' << r.pass << ',' << r.messages
          << ',';
      detail::put_real(agg, r.normalized_messages);
      agg << ',';
      detail::put_real(agg, r.dual);
      agg << ',';
      detail::put_real(agg, r.primal_energy);
      agg << '\n';
    }
  }
  return status;
}

inline int cli_main(int argc, const char* const* argv)
{
  CLI::App app{"Block-coordinate-ascent MAP inference for pairwise graphical models", "bcamap"};
  app.require_subcommand(1);

  RunOptions solve_opts;
  std::string model_path;
  std::string generate;
  std::string trace;
  std::string summary;
  auto* solve_cmd = app.add_subcommand("solve", "Run one solver on one instance");
  solve_cmd->add_option("--model", model_path, "UAI MARKOV file");
  solve_cmd->add_option("--generate", generate, "sparse_grid:H,W,L | denser:H,W,L,conn | complete:n,L");
  solve_cmd->add_option("--method", solve_opts.method,
                        "msd, cmp, trws, mplp, mplp++, dmm, tbca, tbca++ or spam");
  solve_cmd->add_option("--trace", trace, "Per-pass trace CSV");
  solve_cmd->add_option("--summary", summary, "Run summary JSON");
  add_run_options(*solve_cmd, solve_opts);

  RunOptions bench_opts;
  std::vector<std::string> bench_models;
  std::vector<std::string> bench_generated;
  std::vector<std::string> bench_methods{"trws", "mplp++", "dmm", "spam"};
  std::string out_dir = "bench_out";
  auto* bench_cmd = app.add_subcommand("bench", "Run a method matrix over several instances");
  bench_cmd->add_option("--model", bench_models, "UAI MARKOV files");
  bench_cmd->add_option("--generate", bench_generated, "Generator specs");
  bench_cmd->add_option("--methods", bench_methods, "Methods to run")->delimiter(',');
  bench_cmd->add_option("--out-dir", out_dir, "Directory for traces and aggregate.csv");
  add_run_options(*bench_cmd, bench_opts);

  std::uint64_t verify_seed = 0;
  auto* verify_cmd = app.add_subcommand("verify", "Run the property suite on small generated instances");
  verify_cmd->add_option("--seed", verify_seed, "Seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << "\n" << app.help();
    return usage;
  }

  if (*solve_cmd)
    return solve(*solve_cmd, model_path, generate, trace, summary, solve_opts);
  if (*bench_cmd)
    return bench(*bench_cmd, bench_models, bench_generated, bench_methods, out_dir, bench_opts);
  return run_verification_suite(verify_seed, std::cout) ? ok : failure;
}

} // namespace bcamap::cli
