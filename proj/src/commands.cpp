#include "acrobot/commands.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <ostream>
#include <sstream>

#include "acrobot/errors.hpp"
#include "acrobot/integrator.hpp"
#include "acrobot/nlp_solver.hpp"
#include "acrobot/render.hpp"
#include "acrobot/run_config.hpp"
#include "acrobot/trajectory_io.hpp"
#include "acrobot/transcription.hpp"

namespace acrobot {

namespace {

namespace fs = std::filesystem;

std::string num(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

RunConfig load_config(const CommandOptions& opts) {
  return opts.config_path ? load_run_config(*opts.config_path)
                          : RunConfig::defaults("acrobot2");
}

fs::path prepare_output(const RunConfig& config, const CommandOptions& opts) {
  const fs::path dir = resolve_output_dir(config, opts.out_dir);
  fs::create_directories(dir);
  return dir;
}

int frame_count(const RunConfig& config, const CommandOptions& opts) {
  const int frames = opts.frames.value_or(config.frames);
  if (frames < 0) throw UsageError("--frames must be >= 0");
  return frames;
}

const std::string& require_input(const CommandOptions& opts, const char* what) {
  if (!opts.input_path) throw UsageError(std::string("missing ") + what);
  return *opts.input_path;
}

}  // namespace

int cmd_simulate(const CommandOptions& opts, std::ostream& out,
                 std::ostream& log) {
  RunConfig config = load_config(opts);
  if (opts.initial_state) {
    const auto& v = *opts.initial_state;
    if (static_cast<int>(v.size()) != config.params().n_states()) {
      throw UsageError("initial state needs " +
                       std::to_string(config.params().n_states()) +
                       " values, got " + std::to_string(v.size()));
    }
    config.initial = State::from_stacked(
        Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size())));
  }
  if (opts.dt) config.dt = *opts.dt;
  if (opts.duration) config.duration = *opts.duration;
  config.validate();
  const int frames = frame_count(config, opts);
  const fs::path dir = prepare_output(config, opts);

  RolloutConfig cfg;
  cfg.t_end = config.duration;
  cfg.dt = config.dt;
  if (opts.verbose) {
    log << "simulate: model=" << config.model << " dt=" << cfg.dt
        << " duration=" << cfg.t_end << '\n';
  }
  const Trajectory traj = simulate(config.params(), config.initial, cfg);
  write_trajectory_csv(dir / "trajectory.csv", traj);
  if (frames > 0) render_frames(config.params(), traj, dir / "frames", frames);

  const double e0 = total_energy(config.params(), traj.states.front());
  const double e1 = total_energy(config.params(), traj.states.back());
  double max_drift = 0.0;
  for (const auto& s : traj.states) {
    max_drift = std::max(max_drift, std::abs(total_energy(config.params(), s) - e0));
  }
  const double scale = std::max(std::abs(e0), 1e-300);
  out << "samples=" << traj.size() << '\n'
      << "energy_initial=" << num(e0) << '\n'
      << "energy_final=" << num(e1) << '\n'
      << "relative_drift_final=" << num(std::abs(e1 - e0) / scale) << '\n'
      << "relative_drift_max=" << num(max_drift / scale) << '\n'
      << "trajectory=" << (dir / "trajectory.csv").string() << '\n';
  return kExitOk;
}

int cmd_optimize(const CommandOptions& opts, std::ostream& out,
                 std::ostream& log) {
  const RunConfig config = load_config(opts);
  const int frames = frame_count(config, opts);
  const fs::path dir = prepare_output(config, opts);

  SolverOptions solver = config.solver;
  if (opts.verbose) solver.trace = &log;
  const NlpProblem problem = build_nlp(config.task);
  const SolveReport report = solve(problem, solver);

  const Trajectory solution = to_trajectory(config.task, report.y_star);
  write_trajectory_csv(dir / "solution.csv", solution);

  std::string angles = "t";
  const int n = config.params().n_links();
  for (int i = 1; i <= n; ++i) angles += ",q" + std::to_string(i);
  angles += '\n';
  for (std::size_t k = 0; k < solution.size(); ++k) {
    angles += num(solution.times[k]);
    for (int i = 0; i < n; ++i) angles += "," + num(solution.states[k].q(i));
    angles += '\n';
  }
  write_file_atomic(dir / "joint_angles.csv", angles);

  const Eigen::VectorXd zeta = defects(config.task, report.y_star);
  const Eigen::VectorXd psi = boundary_constraints(config.task, report.y_star);
  std::ostringstream summary;
  summary << "status=" << to_string(report.status) << '\n'
          << "final_constraint_violation="
          << num(report.final_constraint_violation) << '\n'
          << "final_cost=" << num(report.final_cost) << '\n'
          << "max_defect=" << num(zeta.lpNorm<Eigen::Infinity>()) << '\n'
          << "boundary_residual=" << num(psi.lpNorm<Eigen::Infinity>()) << '\n'
          << "outer_iterations=" << report.outer_iterations << '\n'
          << "inner_evaluations=" << report.inner_evaluations << '\n';
  write_file_atomic(dir / "report.txt", summary.str());
  if (frames > 0) render_frames(config.params(), solution, dir / "frames", frames);
  out << summary.str() << "solution=" << (dir / "solution.csv").string() << '\n';
  return report.status == SolveStatus::kConverged ? kExitOk : kExitNotConverged;
}

int cmd_rollout(const CommandOptions& opts, std::ostream& out,
                std::ostream& log) {
  RunConfig config = load_config(opts);
  if (opts.dt) config.dt = *opts.dt;
  config.validate();
  const Trajectory reference =
      read_trajectory_csv(require_input(opts, "solution file"));
  if (!reference.has_controls()) {
    throw UsageError("rollout: solution file has no control columns");
  }
  if (reference.n_links() != config.params().n_links() ||
      reference.n_controls() != config.params().n_controls()) {
    throw UsageError("rollout: solution file does not match the config model");
  }
  const fs::path dir = prepare_output(config, opts);
  if (opts.verbose) log << "rollout: dt=" << config.dt << '\n';

  const Trajectory sim = rollout_with_controls(
      config.params(), reference.states.front(), reference, config.dt);

  const int n = config.params().n_links();
  std::string table = "t";
  for (const char* side : {"ref_", "sim_"}) {
    for (int i = 1; i <= n; ++i) table += std::string(",") + side + "q" + std::to_string(i);
    for (int i = 1; i <= n; ++i) table += std::string(",") + side + "qd" + std::to_string(i);
  }
  table += '\n';
  double max_deviation = 0.0;
  std::size_t j = 0;
  for (std::size_t k = 0; k < reference.size(); ++k) {
    const double t = reference.times[k];
    while (j + 1 < sim.size() &&
           std::abs(sim.times[j + 1] - t) <= std::abs(sim.times[j] - t)) {
      ++j;
    }
    const Eigen::VectorXd ref_x = reference.states[k].stacked();
    const Eigen::VectorXd sim_x = sim.states[j].stacked();
    max_deviation = std::max(max_deviation, (sim_x - ref_x).lpNorm<Eigen::Infinity>());
    table += num(t);
    for (Eigen::Index i = 0; i < ref_x.size(); ++i) table += "," + num(ref_x(i));
    for (Eigen::Index i = 0; i < sim_x.size(); ++i) table += "," + num(sim_x(i));
    table += '\n';
  }
  write_file_atomic(dir / "rollout.csv", table);

  const Eigen::VectorXd final_dev =
      sim.states.back().stacked() - reference.states.back().stacked();
  std::ostringstream summary;
  summary << "max_knot_deviation=" << num(max_deviation) << '\n'
          << "final_angle_deviation="
          << num(final_dev.head(n).lpNorm<Eigen::Infinity>()) << '\n'
          << "final_rate_deviation="
          << num(final_dev.tail(n).lpNorm<Eigen::Infinity>()) << '\n';
  for (Eigen::Index i = 0; i < final_dev.size(); ++i) {
    summary << "final_deviation_" << (i < n ? "q" : "qd") << (i % n) + 1 << '='
            << num(final_dev(i)) << '\n';
  }
  write_file_atomic(dir / "rollout_report.txt", summary.str());
  out << summary.str();
  return kExitOk;
}

int cmd_render(const CommandOptions& opts, std::ostream& out,
               std::ostream& log) {
  const Trajectory traj =
      read_trajectory_csv(require_input(opts, "trajectory file"));
  RunConfig config =
      opts.config_path
          ? load_run_config(*opts.config_path)
          : RunConfig::defaults(traj.n_links() == 3 ? "acrobot3" : "acrobot2");
  const int frames = opts.frames.value_or(config.frames > 0 ? config.frames : 3);
  if (frames < 1) throw UsageError("render: --frames must be at least 1");
  const fs::path dir = prepare_output(config, opts);
  const auto written = render_frames(config.params(), traj, dir / "frames", frames);
  if (opts.verbose) log << "render: " << written.size() << " frames\n";
  for (const auto& path : written) out << "frame=" << path.string() << '\n';
  return kExitOk;
}

int run_command(const std::string& name, const CommandOptions& opts,
                std::ostream& out, std::ostream& log) {
  try {
    if (name == "simulate") return cmd_simulate(opts, out, log);
    if (name == "optimize") return cmd_optimize(opts, out, log);
    if (name == "rollout") return cmd_rollout(opts, out, log);
    if (name == "render") return cmd_render(opts, out, log);
    log << "error: unknown command '" << name << "'\n";
    return kExitUsage;
  } catch (const DivergenceError& e) {
    log << "error: " << e.what() << " (t = " << e.time() << ")\n";
    return kExitDivergence;
  } catch (const Error& e) {
    log << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const fs::filesystem_error& e) {
    log << "error: " << e.what() << '\n';
    return kExitUsage;
  }
}

}  // namespace acrobot
