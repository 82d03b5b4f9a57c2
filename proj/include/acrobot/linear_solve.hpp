#pragma once

#include <vector>

#include <Eigen/Dense>

namespace acrobot {

// Dense LU factorization with partial (row) pivoting, P A = L U.
class LuFactorization {
 public:
  // Throws SingularMatrixError when a pivot falls below 1e-14 times the
  // infinity norm of its original row, UsageError for non-square input.
  explicit LuFactorization(const Eigen::MatrixXd& A);

  Eigen::VectorXd solve(const Eigen::VectorXd& b) const;
  int size() const { return static_cast<int>(lu_.rows()); }

 private:
  Eigen::MatrixXd lu_;               // unit-lower L below diagonal, U on/above
  std::vector<int> row_of_;          // row_of_[i]: original row placed at i
};

Eigen::VectorXd lu_solve(const Eigen::MatrixXd& A, const Eigen::VectorXd& b);

}  // namespace acrobot
