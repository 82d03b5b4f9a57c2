#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "acrobot/dynamics.hpp"

namespace acrobot {

// First-order system written as  mass_of(x, t) * xdot = rhs_of(x, u, t).
struct MassMatrixOde {
  int dimension = 0;
  std::function<Eigen::MatrixXd(const Eigen::VectorXd& x, double t)> mass_of;
  std::function<Eigen::VectorXd(const Eigen::VectorXd& x,
                                const Eigen::VectorXd& u, double t)>
      rhs_of;
};

// Block form  [[I, 0], [C(q, qd), M(q)]] xdot = (qd, tau_g + B u).
MassMatrixOde make_manipulator_ode(const LinkChainParams& params);

// Control as a function of time. An empty function means a passive system.
using ControlFn = std::function<Eigen::VectorXd(double t)>;

enum class ControlSampling {
  kNone,      // passive, no control columns
  kKnot,      // one control per time sample
  kInterval,  // piecewise constant, one fewer control than times
};

struct Trajectory {
  std::vector<double> times;
  std::vector<State> states;
  std::vector<Eigen::VectorXd> controls;
  ControlSampling sampling = ControlSampling::kNone;

  int n_links() const;
  int n_controls() const;
  std::size_t size() const { return times.size(); }
  bool has_controls() const { return sampling != ControlSampling::kNone; }

  // Throws UsageError on a broken invariant: non-increasing times, length
  // mismatches for the sampling mode, ragged vectors, non-finite entries.
  void validate() const;
};

struct RolloutConfig {
  double t_start = 0.0;
  double t_end = 10.0;
  double dt = 1e-3;
  ControlFn control;  // empty: passive

  void validate() const;
};

// Classical RK4 with each stage derivative solved against that stage's mass
// matrix. The control callback is sampled at the stage times.
Eigen::VectorXd rk4_step(const MassMatrixOde& ode, const Eigen::VectorXd& x,
                         const ControlFn& control, double t, double dt);

// Same step with a control held constant across the stages.
Eigen::VectorXd rk4_step(const MassMatrixOde& ode, const Eigen::VectorXd& x,
                         const Eigen::VectorXd& control, double t, double dt);

/**
 * Fixed-step rollout from cfg.t_start to cfg.t_end. Sample times are
 * t_start + k*dt; the last step is shortened to land on t_end. Throws
 * DivergenceError when a state component becomes non-finite or exceeds 1e6
 * in magnitude.
 */
Trajectory simulate(const LinkChainParams& params, const State& initial,
                    const RolloutConfig& cfg);

// First-order hold over the reference knots, clamped at both ends.
ControlFn first_order_hold(const Trajectory& reference);

// Replays the reference controls through simulate over the reference's time
// span. Throws UsageError when the reference has no controls.
Trajectory rollout_with_controls(const LinkChainParams& params,
                                 const State& initial,
                                 const Trajectory& reference, double dt);

}  // namespace acrobot
