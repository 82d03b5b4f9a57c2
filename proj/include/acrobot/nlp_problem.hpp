#pragma once

#include <functional>

#include <Eigen/Dense>

namespace acrobot {

/**
 * Smooth nonlinear program
 *
 *   min F(y)   s.t.   c_lower <= c(y) <= c_upper,   y_lower <= y <= y_upper.
 *
 * Rows with c_lower == c_upper are equalities. Every callback must be pure.
 */
struct NlpProblem {
  int dim = 0;
  std::function<double(const Eigen::VectorXd&)> cost_of;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> cost_gradient_of;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> constraint_of;
  std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> constraint_jacobian_of;
  // Optional. Seeds the solver's quasi-Newton model when present.
  std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> cost_hessian_of;
  // Optional. sum_i w_i * Hessian(c_i) at y; adds constraint curvature to the
  // seed model when present.
  std::function<Eigen::MatrixXd(const Eigen::VectorXd& y,
                                const Eigen::VectorXd& w)>
      constraint_curvature_of;
  Eigen::VectorXd c_lower;
  Eigen::VectorXd c_upper;
  Eigen::VectorXd y_lower;
  Eigen::VectorXd y_upper;
  Eigen::VectorXd y_guess;

  int n_constraints() const { return static_cast<int>(c_lower.size()); }

  // Throws UsageError on mismatched sizes, missing callbacks or unordered
  // bounds.
  void validate() const;
};

// Infinity norm of the amount by which c leaves [lower, upper].
double constraint_violation(const Eigen::VectorXd& c,
                            const Eigen::VectorXd& lower,
                            const Eigen::VectorXd& upper);

}  // namespace acrobot
