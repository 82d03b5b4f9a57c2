#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace acrobot {

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitDivergence = 2,
  kExitNotConverged = 3,
};

struct CommandOptions {
  std::optional<std::string> config_path;
  std::optional<std::string> out_dir;
  std::optional<double> dt;
  std::optional<double> duration;
  std::optional<int> frames;
  std::optional<std::vector<double>> initial_state;
  // rollout: solution file; render: trajectory file.
  std::optional<std::string> input_path;
  bool verbose = false;
};

/**
 * Each command writes into the resolved output directory and prints a short
 * key=value summary to `out`. Errors propagate as exceptions; run_command
 * maps them to exit codes.
 *
 *   simulate: trajectory.csv [+ frames/], energy drift summary
 *   optimize: solution.csv, joint_angles.csv, report.txt; kExitNotConverged
 *             unless the solver converged
 *   rollout:  rollout.csv (reference and simulated side by side),
 *             rollout_report.txt
 *   render:   frames/frame_NNN.svg
 */
int cmd_simulate(const CommandOptions& opts, std::ostream& out,
                 std::ostream& log);
int cmd_optimize(const CommandOptions& opts, std::ostream& out,
                 std::ostream& log);
int cmd_rollout(const CommandOptions& opts, std::ostream& out,
                std::ostream& log);
int cmd_render(const CommandOptions& opts, std::ostream& out,
               std::ostream& log);

// Dispatches by name and turns exceptions into exit codes with a message on
// `log`.
int run_command(const std::string& name, const CommandOptions& opts,
                std::ostream& out, std::ostream& log);

}  // namespace acrobot
