#include "acrobot/linear_solve.hpp"

#include <cmath>
#include <numeric>
#include <sstream>
#include <utility>

#include "acrobot/errors.hpp"

namespace acrobot {

namespace {
constexpr double kPivotTolerance = 1e-14;
}

LuFactorization::LuFactorization(const Eigen::MatrixXd& A) : lu_(A) {
  if (A.rows() != A.cols()) {
    std::ostringstream msg;
    msg << "lu: matrix must be square, got " << A.rows() << "x" << A.cols();
    throw UsageError(msg.str());
  }
  const int n = static_cast<int>(A.rows());
  row_of_.resize(n);
  std::iota(row_of_.begin(), row_of_.end(), 0);

  Eigen::VectorXd row_norm(n);
  for (int i = 0; i < n; ++i) row_norm(i) = A.row(i).cwiseAbs().maxCoeff();

  for (int k = 0; k < n; ++k) {
    int pivot = k;
    double best = std::abs(lu_(k, k));
    for (int i = k + 1; i < n; ++i) {
      if (std::abs(lu_(i, k)) > best) {
        best = std::abs(lu_(i, k));
        pivot = i;
      }
    }
    if (pivot != k) {
      lu_.row(k).swap(lu_.row(pivot));
      std::swap(row_of_[k], row_of_[pivot]);
    }
    // Zero rows are singular too: 0 > 0 is false.
    if (!(best > kPivotTolerance * row_norm(row_of_[k]))) {
      std::ostringstream msg;
      msg << "lu: singular matrix (pivot " << best << " at column " << k << ")";
      throw SingularMatrixError(msg.str());
    }
    const double inv = 1.0 / lu_(k, k);
    for (int i = k + 1; i < n; ++i) {
      const double factor = lu_(i, k) * inv;
      lu_(i, k) = factor;
      if (factor == 0.0) continue;
      for (int j = k + 1; j < n; ++j) lu_(i, j) -= factor * lu_(k, j);
    }
  }
}

Eigen::VectorXd LuFactorization::solve(const Eigen::VectorXd& b) const {
  const int n = size();
  if (b.size() != n) {
    std::ostringstream msg;
    msg << "lu: right-hand side has length " << b.size() << ", expected " << n;
    throw UsageError(msg.str());
  }
  Eigen::VectorXd x(n);
  for (int i = 0; i < n; ++i) {
    double sum = b(row_of_[i]);
    for (int j = 0; j < i; ++j) sum -= lu_(i, j) * x(j);
    x(i) = sum;
  }
  for (int i = n - 1; i >= 0; --i) {
    double sum = x(i);
    for (int j = i + 1; j < n; ++j) sum -= lu_(i, j) * x(j);
    x(i) = sum / lu_(i, i);
  }
  return x;
}

Eigen::VectorXd lu_solve(const Eigen::MatrixXd& A, const Eigen::VectorXd& b) {
  return LuFactorization(A).solve(b);
}

}  // namespace acrobot
