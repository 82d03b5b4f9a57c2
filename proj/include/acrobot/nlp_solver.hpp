#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "acrobot/nlp_problem.hpp"

namespace acrobot {

struct SolverOptions {
  int max_outer_iters = 50;
  int max_inner_iters = 200;
  double constraint_tol = 1e-6;
  double optimality_tol = 1e-6;
  double initial_penalty = 10.0;
  double penalty_growth = 10.0;
  double inner_step_tol = 1e-10;
  double max_penalty = 1e8;
  int lbfgs_memory = 10;
  // When set, one key=value line per outer iteration is written here.
  std::ostream* trace = nullptr;

  void validate() const;
};

enum class SolveStatus { kConverged, kMaxIterations, kLineSearchFailure };

std::string to_string(SolveStatus status);

struct SolveReport {
  Eigen::VectorXd y_star;
  SolveStatus status = SolveStatus::kMaxIterations;
  double final_constraint_violation = 0.0;  // infinity norm
  double final_cost = 0.0;
  int outer_iterations = 0;
  int inner_evaluations = 0;
  Eigen::VectorXd multipliers;
  // Violation after each outer iteration.
  std::vector<double> violation_history;
};

struct AugmentedValue {
  double value = 0.0;
  Eigen::VectorXd gradient;
};

/**
 * Augmented Lagrangian with ranged rows handled through clamped slacks:
 *
 *   v_i = c_i - clamp(c_i + lambda_i / rho, c_lower_i, c_upper_i)
 *   L_A = F + sum_i lambda_i v_i + rho/2 v_i^2
 *
 * With lambda = 0, v is the plain distance of c_i outside its range.
 */
AugmentedValue augmented_objective(const NlpProblem& problem,
                                   const Eigen::VectorXd& y,
                                   const Eigen::VectorXd& multipliers,
                                   double penalty);

Eigen::VectorXd project_to_box(const Eigen::VectorXd& y,
                               const Eigen::VectorXd& lower,
                               const Eigen::VectorXd& upper);

// Augmented Lagrangian outer loop around a projected L-BFGS inner solver.
SolveReport solve(const NlpProblem& problem, const SolverOptions& opts = {});

}  // namespace acrobot
