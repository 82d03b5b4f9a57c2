#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "acrobot/dynamics.hpp"
#include "acrobot/nlp_solver.hpp"
#include "acrobot/transcription.hpp"

namespace acrobot {

// Environment variable naming the output directory when neither the config
// nor --out gives one.
inline constexpr const char* kOutputDirEnv = "ACROBOT_OUT_DIR";
inline constexpr const char* kDefaultOutputDir = "acrobot_out";

/**
 * Everything a command needs. YAML layout (all sections optional, unknown keys
 * rejected):
 *
 *   model: acrobot2 | acrobot3
 *   params:     {masses: [..], lengths: [..], gravity: g}
 *   task:       {t_final, n_knots, scheme: trapezoid|euler, u_max, q_max,
 *                qd_max, x_init: [..], x_final: [..]}
 *   integrator: {dt, duration, initial_state: [..]}
 *   solver:     {max_outer_iters, max_inner_iters, constraint_tol,
 *                optimality_tol, initial_penalty, penalty_growth,
 *                inner_step_tol, max_penalty}
 *   output:     {directory, frames}
 *
 * Scalars may be written as multiples of pi: "pi", "-pi/3", "2*pi".
 */
struct RunConfig {
  std::string model = "acrobot2";
  OcpSpec task;  // task.params holds the physical parameters
  double dt = 1e-3;
  double duration = 10.0;
  State initial;
  SolverOptions solver;
  std::optional<std::string> output_dir;
  int frames = 0;

  const LinkChainParams& params() const { return task.params; }

  // Throws ConfigError on any broken nested invariant.
  void validate() const;

  // Defaults for the model: unit masses and lengths, the swing-up task and
  // (pi/3, 0, ...) as the simulation start.
  static RunConfig defaults(const std::string& model);
};

// Throws ConfigError naming the source, line and key.
RunConfig parse_run_config(const std::string& text,
                           const std::string& source = "<config>");

RunConfig load_run_config(const std::filesystem::path& path);

// override_dir, then the config, then $ACROBOT_OUT_DIR, then ./acrobot_out.
std::filesystem::path resolve_output_dir(
    const RunConfig& config, const std::optional<std::string>& override_dir);

}  // namespace acrobot
