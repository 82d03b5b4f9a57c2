#pragma once

#include <Eigen/Dense>

#include "acrobot/dynamics.hpp"
#include "acrobot/integrator.hpp"
#include "acrobot/nlp_problem.hpp"

namespace acrobot {

enum class CollocationScheme { kEuler, kTrapezoid };

// Fixed-final-time swing-up problem on a uniform knot grid.
struct OcpSpec {
  LinkChainParams params;
  double t_final = 3.0;
  int n_knots = 25;
  Eigen::VectorXd x_init;
  Eigen::VectorXd x_final;
  Eigen::VectorXd u_min;
  Eigen::VectorXd u_max;
  Eigen::VectorXd x_min;
  Eigen::VectorXd x_max;
  CollocationScheme scheme = CollocationScheme::kTrapezoid;

  double step() const { return t_final / (n_knots - 1); }

  // Throws UsageError on any broken invariant (ModelError for params).
  void validate() const;

  // Hanging rest to upright rest with |u| <= 20, |q| <= 2 pi,
  // |qd| <= 4 pi, T = 3 s, N = 25, trapezoidal defects.
  static OcpSpec swing_up(const LinkChainParams& params);
};

/**
 * Decision-vector layout y = [x_1, u_1, x_2, u_2, ..., x_N, u_N] with
 * x_k in R^(2n) and u_k in R^m.
 */
class KnotLayout {
 public:
  KnotLayout(int n_knots, int n_states, int n_controls);
  explicit KnotLayout(const OcpSpec& spec);

  int n_knots() const { return n_knots_; }
  int n_states() const { return n_states_; }
  int n_controls() const { return n_controls_; }
  int stride() const { return n_states_ + n_controls_; }
  int dim() const { return n_knots_ * stride(); }

  int state_offset(int knot) const { return knot * stride(); }
  int control_offset(int knot) const { return knot * stride() + n_states_; }

  // Rows of states / controls are knots.
  Eigen::VectorXd pack(const Eigen::MatrixXd& states,
                       const Eigen::MatrixXd& controls) const;

  struct Unpacked {
    Eigen::MatrixXd states;    // N x 2n
    Eigen::MatrixXd controls;  // N x m
  };
  Unpacked unpack(const Eigen::VectorXd& y) const;

  Eigen::VectorXd state(const Eigen::VectorXd& y, int knot) const;
  Eigen::VectorXd control(const Eigen::VectorXd& y, int knot) const;

 private:
  void check(const Eigen::VectorXd& y) const;

  int n_knots_;
  int n_states_;
  int n_controls_;
};

// zeta_k stacked for k = 1..N-1; Euler uses h f_k, trapezoid (h/2)(f_k + f_k+1).
Eigen::VectorXd defects(const OcpSpec& spec, const Eigen::VectorXd& y);

// Trapezoidal quadrature of u(t).u(t) over [0, t_final].
double effort_cost(const OcpSpec& spec, const Eigen::VectorXd& y);
Eigen::VectorXd effort_cost_gradient(const OcpSpec& spec,
                                     const Eigen::VectorXd& y);
// Constant diagonal; nonzero only on control entries.
Eigen::MatrixXd effort_cost_hessian(const OcpSpec& spec);

// (x_1 - x_init, x_N - x_final)
Eigen::VectorXd boundary_constraints(const OcpSpec& spec,
                                     const Eigen::VectorXd& y);

// Defects followed by boundary rows.
Eigen::VectorXd collocation_constraints(const OcpSpec& spec,
                                        const Eigen::VectorXd& y);

// Jacobian of collocation_constraints, using state_derivative_jacobian at
// each knot.
Eigen::MatrixXd collocation_jacobian(const OcpSpec& spec,
                                     const Eigen::VectorXd& y);

/**
 * sum_i w_i * Hessian(c_i) for the collocation constraints. Only the defect
 * rows are nonlinear and each f_k touches only knot k, so the result is block
 * diagonal in the knots; blocks come from central differences, step
 * 1e-5 (1 + |z|), of the exact gradient of the w-weighted dynamics.
 */
Eigen::MatrixXd collocation_curvature(const OcpSpec& spec,
                                      const Eigen::VectorXd& y,
                                      const Eigen::VectorXd& w);

// Linear state interpolation between the boundary values, zero controls.
Eigen::VectorXd initial_guess(const OcpSpec& spec);

NlpProblem build_nlp(const OcpSpec& spec);

// Column-by-column central differences of problem.constraint_of with step
// 1e-6 (1 + |y_j|).
Eigen::MatrixXd constraint_jacobian_fd(const NlpProblem& problem,
                                       const Eigen::VectorXd& y);

// Knot times k h with the decision states and controls.
Trajectory to_trajectory(const OcpSpec& spec, const Eigen::VectorXd& y);

}  // namespace acrobot
