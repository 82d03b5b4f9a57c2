#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "acrobot/commands.hpp"

namespace {

struct Flags {
  std::string config;
  std::string out;
  double dt = 0.0;
  double duration = 0.0;
  int frames = 0;
  std::vector<double> initial;
  std::string input;
  bool verbose = false;
};

acrobot::CommandOptions to_options(CLI::App* sub, const Flags& f) {
  acrobot::CommandOptions opts;
  const auto given = [&](const char* name) {
    const auto* opt = sub->get_option_no_throw(name);
    return opt != nullptr && opt->count() > 0;
  };
  if (given("--config")) opts.config_path = f.config;
  if (given("--out")) opts.out_dir = f.out;
  if (given("--dt")) opts.dt = f.dt;
  if (given("--duration")) opts.duration = f.duration;
  if (given("--frames")) opts.frames = f.frames;
  if (given("--initial")) opts.initial_state = f.initial;
  if (given("input")) opts.input_path = f.input;
  opts.verbose = f.verbose;
  return opts;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acrobot simulation and swing-up trajectory optimization"};
  app.require_subcommand(1);
  Flags f;

  const auto common = [&](CLI::App* sub) {
    sub->add_option("--config", f.config, "YAML run configuration");
    sub->add_option("--out", f.out,
                    "Output directory (default $ACROBOT_OUT_DIR or ./acrobot_out)");
    sub->add_flag("--verbose", f.verbose, "Progress and solver trace on stderr");
  };

  auto* simulate = app.add_subcommand("simulate", "Passive simulation");
  common(simulate);
  simulate->add_option("--dt", f.dt, "Integrator step [s]");
  simulate->add_option("--duration", f.duration, "Simulated time [s]");
  simulate->add_option("--frames", f.frames, "SVG frames to render");
  simulate->add_option("--initial", f.initial, "Initial state q..., qd...")
      ->delimiter(',');

  auto* optimize = app.add_subcommand("optimize", "Swing-up trajectory optimization");
  common(optimize);
  optimize->add_option("--frames", f.frames, "SVG frames to render");

  auto* rollout = app.add_subcommand("rollout", "Replay a solution's controls");
  common(rollout);
  rollout->add_option("input", f.input, "Solution CSV from optimize")->required();
  rollout->add_option("--dt", f.dt, "Integrator step [s]");

  auto* render = app.add_subcommand("render", "Render SVG frames");
  common(render);
  render->add_option("input", f.input, "Trajectory CSV")->required();
  render->add_option("--frames", f.frames, "Number of frames (default 3)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? acrobot::kExitOk : acrobot::kExitUsage;
  }

  CLI::App* chosen = app.get_subcommands().front();
  return acrobot::run_command(chosen->get_name(), to_options(chosen, f),
                              std::cout, std::cerr);
}
