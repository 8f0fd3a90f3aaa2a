#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "evasion/commands.hpp"
#include "evasion/config.hpp"
#include "evasion/errors.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Pursuit-evasion guidance laboratory"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<int> workers;
  app.add_option("--config", config_path, "Run configuration file");
  app.add_option("--seed", seed, "Override run.seed");
  app.add_option("--out", out_dir, "Override run.output_dir");
  app.add_option("--workers", workers, "Override run.workers")
      ->check(CLI::PositiveNumber);

  std::string policy = "zero";
  std::string checkpoint;
  auto* simulate = app.add_subcommand("simulate", "Run one engagement");
  simulate->add_option("--policy", policy, "zero | checkpoint")
      ->check(CLI::IsMember({"zero", "checkpoint"}));
  simulate->add_option("--checkpoint", checkpoint, "Policy checkpoint");

  auto* train = app.add_subcommand("train", "Train a policy with PPO");
  auto* sweep = app.add_subcommand("sweep", "Train every cell of the sweep grid");

  auto* refine = app.add_subcommand("refine", "Refine a checkpoint with ES");
  refine->add_option("--checkpoint", checkpoint,
                     "Policy checkpoint (default: <out>/final.ckpt)");

  std::string run_dir;
  auto* plotdata = app.add_subcommand("plotdata", "Emit figure CSVs for a run");
  plotdata->add_option("run_dir", run_dir, "Run directory (default: --out)");

  CLI11_PARSE(app, argc, argv);

  const evasion::CommandIo io{std::cout, std::cerr};
  evasion::RunConfig cfg;
  try {
    if (!config_path.empty()) cfg = evasion::load_config(config_path);
  } catch (const evasion::Error& e) {
    std::cerr << "error: " << config_path << ": " << e.what() << '\n';
    return evasion::kExitError;
  }
  if (seed) cfg.seed = *seed;
  if (out_dir) cfg.output_dir = *out_dir;
  if (workers) cfg.workers = *workers;

  if (*simulate) return evasion::cmd_simulate(cfg, policy, checkpoint, io);
  if (*train) return evasion::cmd_train(cfg, io);
  if (*sweep) return evasion::cmd_sweep(cfg, io);
  if (*refine) return evasion::cmd_refine(cfg, checkpoint, io);
  if (*plotdata) {
    return evasion::cmd_plotdata(run_dir.empty() ? cfg.output_dir : run_dir, io);
  }
  return evasion::kExitError;
}
