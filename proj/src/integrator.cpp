#include "acrobot/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "acrobot/errors.hpp"
#include "acrobot/linear_solve.hpp"

namespace acrobot {

namespace {

constexpr double kDivergenceBound = 1e6;

Eigen::VectorXd stage_derivative(const MassMatrixOde& ode,
                                 const Eigen::VectorXd& x,
                                 const Eigen::VectorXd& u, double t) {
  return lu_solve(ode.mass_of(x, t), ode.rhs_of(x, u, t));
}

void check_finite_bounded(const Eigen::VectorXd& x, double t) {
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x(i)) || std::abs(x(i)) > kDivergenceBound) {
      std::ostringstream msg;
      msg << "simulation diverged at t = " << t << " (state component " << i
          << " = " << x(i) << ")";
      throw DivergenceError(msg.str(), t);
    }
  }
}

}  // namespace

MassMatrixOde make_manipulator_ode(const LinkChainParams& params) {
  params.validate();
  const int n = params.n_links();
  MassMatrixOde ode;
  ode.dimension = 2 * n;
  ode.mass_of = [params, n](const Eigen::VectorXd& x, double) {
    const ManipulatorTerms t = manipulator_terms(params, State::from_stacked(x));
    Eigen::MatrixXd mass = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    mass.topLeftCorner(n, n).setIdentity();
    mass.bottomLeftCorner(n, n) = t.C;
    mass.bottomRightCorner(n, n) = t.M;
    return mass;
  };
  ode.rhs_of = [params, n](const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                           double) {
    const State s = State::from_stacked(x);
    Eigen::VectorXd rhs(2 * n);
    rhs.head(n) = s.qdot;
    Eigen::VectorXd force = gravity_torque(params, s.q);
    if (u.size() > 0) force += actuation_matrix(params) * u;
    rhs.tail(n) = force;
    return rhs;
  };
  return ode;
}

int Trajectory::n_links() const {
  return states.empty() ? 0 : states.front().n_links();
}

int Trajectory::n_controls() const {
  return controls.empty() ? 0 : static_cast<int>(controls.front().size());
}

void Trajectory::validate() const {
  if (times.empty()) throw UsageError("trajectory: no samples");
  if (states.size() != times.size()) {
    throw UsageError("trajectory: states and times differ in length");
  }
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (!(times[i] > times[i - 1])) {
      std::ostringstream msg;
      msg << "trajectory: times not strictly increasing at sample " << i;
      throw UsageError(msg.str());
    }
  }
  const int n = n_links();
  for (std::size_t i = 0; i < states.size(); ++i) {
    if (states[i].n_links() != n || states[i].qdot.size() != n) {
      throw UsageError("trajectory: ragged states");
    }
    if (!std::isfinite(times[i]) || !states[i].is_finite()) {
      std::ostringstream msg;
      msg << "trajectory: non-finite value at sample " << i;
      throw UsageError(msg.str());
    }
  }
  std::size_t expected = 0;
  switch (sampling) {
    case ControlSampling::kNone: expected = 0; break;
    case ControlSampling::kKnot: expected = times.size(); break;
    case ControlSampling::kInterval: expected = times.size() - 1; break;
  }
  if (controls.size() != expected) {
    throw UsageError("trajectory: control count does not match sampling mode");
  }
  const int m = n_controls();
  for (const auto& u : controls) {
    if (u.size() != m) throw UsageError("trajectory: ragged controls");
    if (!u.allFinite()) throw UsageError("trajectory: non-finite control");
  }
}

void RolloutConfig::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    throw UsageError("rollout: dt must be positive");
  }
  if (!(t_end > t_start) || !std::isfinite(t_end) || !std::isfinite(t_start)) {
    throw UsageError("rollout: t_end must exceed t_start");
  }
}

Eigen::VectorXd rk4_step(const MassMatrixOde& ode, const Eigen::VectorXd& x,
                         const ControlFn& control, double t, double dt) {
  if (!(dt > 0.0)) throw UsageError("rk4_step: dt must be positive");
  const auto u_at = [&](double time) -> Eigen::VectorXd {
    return control ? control(time) : Eigen::VectorXd();
  };
  const double half = 0.5 * dt;
  const Eigen::VectorXd u_mid = u_at(t + half);
  const Eigen::VectorXd k1 = stage_derivative(ode, x, u_at(t), t);
  const Eigen::VectorXd k2 =
      stage_derivative(ode, x + half * k1, u_mid, t + half);
  const Eigen::VectorXd k3 =
      stage_derivative(ode, x + half * k2, u_mid, t + half);
  const Eigen::VectorXd k4 =
      stage_derivative(ode, x + dt * k3, u_at(t + dt), t + dt);
  return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

Eigen::VectorXd rk4_step(const MassMatrixOde& ode, const Eigen::VectorXd& x,
                         const Eigen::VectorXd& control, double t, double dt) {
  return rk4_step(ode, x, [&control](double) { return control; }, t, dt);
}

Trajectory simulate(const LinkChainParams& params, const State& initial,
                    const RolloutConfig& cfg) {
  params.validate();
  cfg.validate();
  if (initial.n_links() != params.n_links() ||
      initial.qdot.size() != params.n_links()) {
    throw UsageError("simulate: initial state does not match the link count");
  }
  const MassMatrixOde ode = make_manipulator_ode(params);

  // Grid t_start + k dt; a remainder smaller than 1e-9 dt is absorbed.
  const double span = cfg.t_end - cfg.t_start;
  auto n_full = static_cast<long long>(std::floor(span / cfg.dt));
  std::vector<double> times;
  times.reserve(static_cast<std::size_t>(n_full) + 2);
  for (long long k = 0; k <= n_full; ++k) {
    times.push_back(cfg.t_start + static_cast<double>(k) * cfg.dt);
  }
  if (cfg.t_end - times.back() > 1e-9 * cfg.dt) {
    times.push_back(cfg.t_end);
  } else {
    times.back() = cfg.t_end;
  }
  if (times.size() == 1) times.push_back(cfg.t_end);

  Trajectory traj;
  traj.times = times;
  traj.states.reserve(times.size());
  const bool controlled = static_cast<bool>(cfg.control);
  traj.sampling = controlled ? ControlSampling::kKnot : ControlSampling::kNone;

  Eigen::VectorXd x = initial.stacked();
  check_finite_bounded(x, times.front());
  traj.states.push_back(initial);
  if (controlled) traj.controls.push_back(cfg.control(times.front()));
  for (std::size_t k = 0; k + 1 < times.size(); ++k) {
    const double h = times[k + 1] - times[k];
    x = rk4_step(ode, x, cfg.control, times[k], h);
    check_finite_bounded(x, times[k + 1]);
    traj.states.push_back(State::from_stacked(x));
    if (controlled) traj.controls.push_back(cfg.control(times[k + 1]));
  }
  return traj;
}

ControlFn first_order_hold(const Trajectory& reference) {
  if (!reference.has_controls() || reference.controls.empty()) {
    throw UsageError("first_order_hold: reference trajectory has no controls");
  }
  const std::vector<double> times = reference.times;
  const std::vector<Eigen::VectorXd> controls = reference.controls;
  const bool piecewise_constant =
      reference.sampling == ControlSampling::kInterval;
  return [times, controls, piecewise_constant](double t) -> Eigen::VectorXd {
    if (t <= times.front()) return controls.front();
    const auto upper = std::upper_bound(times.begin(), times.end(), t);
    const auto i = static_cast<std::size_t>(upper - times.begin()) - 1;
    if (piecewise_constant) {
      return controls[std::min(i, controls.size() - 1)];
    }
    if (i + 1 >= times.size()) return controls.back();
    const double w = (t - times[i]) / (times[i + 1] - times[i]);
    return (1.0 - w) * controls[i] + w * controls[i + 1];
  };
}

Trajectory rollout_with_controls(const LinkChainParams& params,
                                 const State& initial,
                                 const Trajectory& reference, double dt) {
  if (!reference.has_controls()) {
    throw UsageError("rollout: reference trajectory carries no controls");
  }
  reference.validate();
  RolloutConfig cfg;
  cfg.t_start = reference.times.front();
  cfg.t_end = reference.times.back();
  cfg.dt = dt;
  cfg.control = first_order_hold(reference);
  return simulate(params, initial, cfg);
}

}  // namespace acrobot
