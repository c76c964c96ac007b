#include <CLI11.hpp>
#include <iostream>

#include "commands.hpp"
#include "motifmix/util.hpp"
#include "motifmix/version.hpp"

using namespace motifmix;
using namespace motifmix::cli;

int main(int argc, char** argv) {
  CLI::App app{"motifmix: motif-discovery Gibbs sampler and mixing analysis"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path, out_dir, data_file;
  std::uint64_t seed_override = 0;
  bool has_seed = false;
  int workers = 0;

  app.add_option("--config", config_path, "experiment config JSON")
      ->required()
      ->check(CLI::ExistingFile);
  app.add_option("--out", out_dir, "output directory (overrides config)");
  app.add_option("--seed", seed_override, "master seed override")
      ->each([&](const std::string&) { has_seed = true; });
  app.add_option("--workers", workers,
                 "worker threads (default: MOTIFMIX_WORKERS or hardware)");

  auto* simulate = app.add_subcommand("simulate", "write a simulated dataset");
  auto* sample = app.add_subcommand("sample", "run Gibbs chains, record traces");
  auto* exact_gap = app.add_subcommand("exact-gap", "exact spectral gap of T");
  auto* collapsed =
      app.add_subcommand("collapsed", "collapsed chain: pi-bar, T-bar, gap");
  auto* bottleneck =
      app.add_subcommand("bottleneck", "bottleneck statistic d of T-bar");
  auto* landscape = app.add_subcommand("landscape", "eta landscape mode scan");
  auto* table1 = app.add_subcommand("table1", "Gelman-Rubin convergence cell");
  auto* calibrate =
      app.add_subcommand("calibrate", "Dirichlet concentration calibration");
  for (auto* sc : {sample, exact_gap, collapsed, bottleneck})
    sc->add_option("--data", data_file, "sequence file instead of simulation")
        ->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    RunContext ctx;
    ctx.config = load_config_file(config_path);
    if (has_seed) ctx.config.master_seed = seed_override;
    ctx.out_dir = !out_dir.empty()       ? out_dir
                  : !ctx.config.output_dir.empty() ? ctx.config.output_dir
                                                   : std::string("motifmix-run");
    ctx.workers = workers > 0 ? workers : default_worker_count();

    if (simulate->parsed()) return cmd_simulate(ctx);
    if (sample->parsed()) return cmd_sample(ctx, data_file);
    if (exact_gap->parsed()) return cmd_exact_gap(ctx, data_file);
    if (collapsed->parsed()) return cmd_collapsed(ctx, data_file);
    if (bottleneck->parsed()) return cmd_bottleneck(ctx, data_file);
    if (landscape->parsed()) return cmd_landscape(ctx);
    if (table1->parsed()) return cmd_table1(ctx);
    if (calibrate->parsed()) return cmd_calibrate(ctx);
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for_current_exception();
  }
}
