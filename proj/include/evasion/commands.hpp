#ifndef EVASION_COMMANDS_HPP_
#define EVASION_COMMANDS_HPP_

#include <iosfwd>
#include <string>

#include "evasion/config.hpp"

namespace evasion {

inline constexpr int kExitEvaded = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitCaptured = 2;

// Shared streams for progress and diagnostics.
struct CommandIo {
  std::ostream& log;
  std::ostream& err;
};

// Every command writes `<name>.config.ini` into cfg.output_dir first and
// returns 1 with a diagnostic on any failure.

// policy is "zero" or "checkpoint". Writes trajectory.csv and outcome.txt.
// Exit 0 on evasion, 2 on capture.
int cmd_simulate(const RunConfig& cfg, const std::string& policy,
                 const std::string& checkpoint, const CommandIo& io);

// training_log.csv, update_stats.csv, checkpoints/, final.ckpt,
// evaluation.csv, evaluation_summary.txt, final_trajectory.csv.
int cmd_train(const RunConfig& cfg, const CommandIo& io);

// sweep.csv plus one checkpoint per cell under sweep/.
int cmd_sweep(const RunConfig& cfg, const CommandIo& io);

// evolution_record.csv, refined.ckpt, refined_trajectory.csv.
int cmd_refine(const RunConfig& cfg, const std::string& checkpoint,
               const CommandIo& io);

// fig9_training_curves.csv, fig10_evolution_steps.csv and
// fig11_commands.csv from whatever the run directory holds.
int cmd_plotdata(const std::string& run_dir, const CommandIo& io);

}  // namespace evasion

#endif  // EVASION_COMMANDS_HPP_
