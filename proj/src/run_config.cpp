#include "acrobot/run_config.hpp"

#include <cstdlib>
#include <fstream>
#include <numbers>
#include <regex>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "acrobot/errors.hpp"

namespace acrobot {

namespace {

class Reader {
 public:
  explicit Reader(std::string source) : source_(std::move(source)) {}

  [[noreturn]] void fail(const YAML::Node& node, const std::string& what) const {
    std::ostringstream msg;
    msg << source_;
    if (node.Mark().line >= 0) msg << ":" << node.Mark().line + 1;
    msg << ": " << what;
    throw ConfigError(msg.str());
  }

  void require_map(const YAML::Node& node, const std::string& name,
                   const std::set<std::string>& allowed) const {
    if (!node.IsMap()) fail(node, "'" + name + "' must be a mapping");
    for (const auto& entry : node) {
      const auto key = entry.first.as<std::string>();
      if (!allowed.contains(key)) {
        fail(entry.first, "unknown key '" + key + "' in '" + name + "'");
      }
    }
  }

  double number(const YAML::Node& node, const std::string& key) const {
    if (!node.IsScalar()) fail(node, "'" + key + "' must be a number");
    const std::string text = node.Scalar();
    static const std::regex kPiForm(
        R"(^\s*([+-]?)\s*((?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)?\s*(\*?\s*pi)?\s*(?:/\s*(\d+\.?\d*))?\s*$)");
    std::smatch match;
    if (text.find("pi") != std::string::npos &&
        std::regex_match(text, match, kPiForm) && match[3].matched) {
      double value = match[2].matched ? std::stod(match[2].str()) : 1.0;
      value *= std::numbers::pi;
      if (match[4].matched) value /= std::stod(match[4].str());
      return match[1].str() == "-" ? -value : value;
    }
    try {
      std::size_t used = 0;
      const double value = std::stod(text, &used);
      if (used == text.size()) return value;
    } catch (const std::exception&) {
    }
    fail(node, "'" + key + "' must be a number, got '" + text + "'");
  }

  int count(const YAML::Node& node, const std::string& key) const {
    const double value = number(node, key);
    if (value != static_cast<double>(static_cast<int>(value))) {
      fail(node, "'" + key + "' must be an integer");
    }
    return static_cast<int>(value);
  }

  std::vector<double> numbers(const YAML::Node& node,
                              const std::string& key) const {
    if (!node.IsSequence()) fail(node, "'" + key + "' must be a list");
    std::vector<double> out;
    for (const auto& item : node) out.push_back(number(item, key));
    return out;
  }

  Eigen::VectorXd vector(const YAML::Node& node, const std::string& key,
                         int expected) const {
    const auto values = numbers(node, key);
    if (static_cast<int>(values.size()) != expected) {
      fail(node, "'" + key + "' must have " + std::to_string(expected) +
                     " entries, got " + std::to_string(values.size()));
    }
    return Eigen::Map<const Eigen::VectorXd>(values.data(), expected);
  }

  std::string text(const YAML::Node& node, const std::string& key) const {
    if (!node.IsScalar()) fail(node, "'" + key + "' must be a string");
    return node.Scalar();
  }

  const std::string& source() const { return source_; }

 private:
  std::string source_;
};

void apply_params(const Reader& r, const YAML::Node& node,
                  LinkChainParams& params) {
  r.require_map(node, "params", {"masses", "lengths", "gravity"});
  if (node["masses"]) {
    const auto v = r.numbers(node["masses"], "masses");
    if (static_cast<int>(v.size()) != params.n_links()) {
      r.fail(node["masses"], "'masses' must have one entry per link");
    }
    params.masses = v;
  }
  if (node["lengths"]) {
    const auto v = r.numbers(node["lengths"], "lengths");
    if (static_cast<int>(v.size()) != params.n_links()) {
      r.fail(node["lengths"], "'lengths' must have one entry per link");
    }
    params.lengths = v;
  }
  if (node["gravity"]) params.gravity = r.number(node["gravity"], "gravity");
}

void apply_task(const Reader& r, const YAML::Node& node, OcpSpec& task) {
  r.require_map(node, "task",
                {"t_final", "n_knots", "scheme", "u_max", "q_max", "qd_max",
                 "x_init", "x_final"});
  const int n = task.params.n_links();
  const int ns = task.params.n_states();
  const int nu = task.params.n_controls();
  if (node["t_final"]) task.t_final = r.number(node["t_final"], "t_final");
  if (node["n_knots"]) task.n_knots = r.count(node["n_knots"], "n_knots");
  if (node["scheme"]) {
    const auto scheme = r.text(node["scheme"], "scheme");
    if (scheme == "trapezoid") {
      task.scheme = CollocationScheme::kTrapezoid;
    } else if (scheme == "euler") {
      task.scheme = CollocationScheme::kEuler;
    } else {
      r.fail(node["scheme"], "'scheme' must be trapezoid or euler");
    }
  }
  if (node["u_max"]) {
    const double u = r.number(node["u_max"], "u_max");
    task.u_max = Eigen::VectorXd::Constant(nu, u);
    task.u_min = -task.u_max;
  }
  if (node["q_max"]) {
    const double q = r.number(node["q_max"], "q_max");
    task.x_max.head(n).setConstant(q);
    task.x_min.head(n).setConstant(-q);
  }
  if (node["qd_max"]) {
    const double qd = r.number(node["qd_max"], "qd_max");
    task.x_max.tail(n).setConstant(qd);
    task.x_min.tail(n).setConstant(-qd);
  }
  if (node["x_init"]) task.x_init = r.vector(node["x_init"], "x_init", ns);
  if (node["x_final"]) task.x_final = r.vector(node["x_final"], "x_final", ns);
}

void apply_solver(const Reader& r, const YAML::Node& node,
                  SolverOptions& opts) {
  r.require_map(node, "solver",
                {"max_outer_iters", "max_inner_iters", "constraint_tol",
                 "optimality_tol", "initial_penalty", "penalty_growth",
                 "inner_step_tol", "max_penalty"});
  const auto set_count = [&](const char* key, int& field) {
    if (node[key]) field = r.count(node[key], key);
  };
  const auto set_number = [&](const char* key, double& field) {
    if (node[key]) field = r.number(node[key], key);
  };
  set_count("max_outer_iters", opts.max_outer_iters);
  set_count("max_inner_iters", opts.max_inner_iters);
  set_number("constraint_tol", opts.constraint_tol);
  set_number("optimality_tol", opts.optimality_tol);
  set_number("initial_penalty", opts.initial_penalty);
  set_number("penalty_growth", opts.penalty_growth);
  set_number("inner_step_tol", opts.inner_step_tol);
  set_number("max_penalty", opts.max_penalty);
}

}  // namespace

RunConfig RunConfig::defaults(const std::string& model) {
  int n = 0;
  if (model == "acrobot2") {
    n = 2;
  } else if (model == "acrobot3") {
    n = 3;
  } else {
    throw ConfigError("config: model must be acrobot2 or acrobot3, got '" +
                      model + "'");
  }
  RunConfig config;
  config.model = model;
  config.task = OcpSpec::swing_up(LinkChainParams::acrobot(n));
  config.initial = State::zero(n);
  config.initial.q(0) = std::numbers::pi / 3.0;
  return config;
}

void RunConfig::validate() const {
  try {
    task.params.validate_acrobot();
    task.validate();
    solver.validate();
  } catch (const Error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    throw ConfigError("config: integrator dt must be positive");
  }
  if (!(duration > 0.0) || !std::isfinite(duration)) {
    throw ConfigError("config: integrator duration must be positive");
  }
  if (initial.n_links() != task.params.n_links() || !initial.is_finite()) {
    throw ConfigError("config: initial_state must hold 2n finite values");
  }
  if (frames < 0) throw ConfigError("config: output frames must be >= 0");
}

RunConfig parse_run_config(const std::string& text, const std::string& source) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    std::ostringstream msg;
    msg << source << ":" << e.mark.line + 1 << ": " << e.msg;
    throw ConfigError(msg.str());
  }
  const Reader r(source);
  if (root.IsNull()) return RunConfig::defaults("acrobot2");
  r.require_map(root, "<root>",
                {"model", "params", "task", "integrator", "solver", "output"});

  RunConfig config = RunConfig::defaults(
      root["model"] ? r.text(root["model"], "model") : std::string("acrobot2"));
  if (root["params"]) apply_params(r, root["params"], config.task.params);
  if (root["task"]) apply_task(r, root["task"], config.task);
  if (const auto node = root["integrator"]) {
    r.require_map(node, "integrator", {"dt", "duration", "initial_state"});
    if (node["dt"]) config.dt = r.number(node["dt"], "dt");
    if (node["duration"]) config.duration = r.number(node["duration"], "duration");
    if (node["initial_state"]) {
      config.initial = State::from_stacked(r.vector(
          node["initial_state"], "initial_state", config.params().n_states()));
    }
  }
  if (root["solver"]) apply_solver(r, root["solver"], config.solver);
  if (const auto node = root["output"]) {
    r.require_map(node, "output", {"directory", "frames"});
    if (node["directory"]) config.output_dir = r.text(node["directory"], "directory");
    if (node["frames"]) config.frames = r.count(node["frames"], "frames");
  }
  config.validate();
  return config;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_run_config(text.str(), path.string());
}

std::filesystem::path resolve_output_dir(
    const RunConfig& config, const std::optional<std::string>& override_dir) {
  if (override_dir) return *override_dir;
  if (config.output_dir) return *config.output_dir;
  if (const char* env = std::getenv(kOutputDirEnv); env != nullptr && *env) {
    return env;
  }
  return kDefaultOutputDir;
}

}  // namespace acrobot
