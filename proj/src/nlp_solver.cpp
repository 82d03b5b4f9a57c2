#include "acrobot/nlp_solver.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <limits>
#include <ostream>
#include <sstream>

#include "acrobot/errors.hpp"

namespace acrobot {

namespace {

constexpr double kArmijo = 1e-4;
constexpr double kRoundingSlack = 1e-12;
constexpr double kActiveWidth = 1e-3;
constexpr double kEigenFloor = 1e-10;
constexpr double kInnerTolScale = 10.0;

[[noreturn]] void throw_evaluation(const char* what, const Eigen::VectorXd& y) {
  throw EvaluationError(std::string("solver: ") + what +
                            " returned a non-finite value",
                        std::vector<double>(y.data(), y.data() + y.size()));
}

Eigen::VectorXd clamp_to(const Eigen::VectorXd& v, const Eigen::VectorXd& lo,
                         const Eigen::VectorXd& hi) {
  return v.cwiseMax(lo).cwiseMin(hi);
}

// Augmented objective plus the pieces needed to build the quasi-Newton seed.
struct Evaluation {
  double value = 0.0;
  Eigen::VectorXd gradient;
  // Inputs to the curvature model  H_F + sum_i w_i H_ci + rho * J_p^T J_p.
  const NlpProblem* problem = nullptr;
  Eigen::VectorXd point;
  Eigen::VectorXd weights;
  Eigen::MatrixXd cost_hessian;
  Eigen::MatrixXd penalized_jacobian;
  double penalty = 0.0;

  Eigen::MatrixXd model() const {
    Eigen::MatrixXd B = cost_hessian;
    if (penalized_jacobian.rows() > 0) {
      B.noalias() +=
          penalty * (penalized_jacobian.transpose() * penalized_jacobian);
    }
    if (problem != nullptr && problem->constraint_curvature_of &&
        weights.size() > 0) {
      const Eigen::MatrixXd W =
          problem->constraint_curvature_of(point, weights);
      if (W.rows() != B.rows() || W.cols() != B.cols()) {
        throw UsageError("solver: constraint curvature has the wrong shape");
      }
      if (!W.allFinite()) throw_evaluation("constraint curvature", point);
      B += W;
    }
    return B;
  }
};

using Objective = std::function<Evaluation(const Eigen::VectorXd&)>;

enum class InnerStatus { kConverged, kMaxIterations, kStalled };

struct InnerResult {
  Eigen::VectorXd y;
  double value = 0.0;
  Eigen::VectorXd gradient;
  double projected_gradient = 0.0;
  InnerStatus status = InnerStatus::kMaxIterations;
  int evaluations = 0;
};

double projected_gradient_norm(const Eigen::VectorXd& y,
                               const Eigen::VectorXd& g,
                               const Eigen::VectorXd& lower,
                               const Eigen::VectorXd& upper) {
  if (y.size() == 0) return 0.0;
  return (clamp_to(y - g, lower, upper) - y).lpNorm<Eigen::Infinity>();
}

// Everything except the variables within eps of a bound whose gradient
// pushes outward.
std::vector<int> free_variables(const Eigen::VectorXd& y,
                                const Eigen::VectorXd& g,
                                const Eigen::VectorXd& lower,
                                const Eigen::VectorXd& upper, double eps) {
  std::vector<int> free;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const bool pinned = (y(i) <= lower(i) + eps && g(i) > 0.0) ||
                        (y(i) >= upper(i) - eps && g(i) < 0.0);
    if (!pinned) free.push_back(static_cast<int>(i));
  }
  return free;
}

struct CurvaturePair {
  Eigen::VectorXd s;
  Eigen::VectorXd y;
  double rho;
};

// Solves |model_ff| r = q on the free variables, where |.| replaces each
// eigenvalue by its magnitude, floored relative to the largest one.
class SeedSolver {
 public:
  SeedSolver(const Eigen::MatrixXd& model, const std::vector<int>& free)
      : free_(free) {
    const auto n = static_cast<Eigen::Index>(free.size());
    Eigen::MatrixXd sub(n, n);
    for (Eigen::Index a = 0; a < n; ++a) {
      for (Eigen::Index b = 0; b < n; ++b) sub(a, b) = model(free[a], free[b]);
    }
    if (n == 0) return;
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sub);
    if (eig.info() != Eigen::Success) {
      throw UsageError("solver: could not factor the curvature model");
    }
    vectors_ = eig.eigenvectors();
    const Eigen::VectorXd magnitude = eig.eigenvalues().cwiseAbs();
    const double floor = std::max(kEigenFloor * magnitude.maxCoeff(), 1e-300);
    inverse_values_ = magnitude.cwiseMax(floor).cwiseInverse();
  }

  Eigen::VectorXd apply(const Eigen::VectorXd& q) const {
    const auto n = static_cast<Eigen::Index>(free_.size());
    Eigen::VectorXd r = Eigen::VectorXd::Zero(q.size());
    if (n == 0) return r;
    Eigen::VectorXd qf(n);
    for (Eigen::Index a = 0; a < n; ++a) qf(a) = q(free_[a]);
    const Eigen::VectorXd rf =
        vectors_ * (inverse_values_.asDiagonal() * (vectors_.transpose() * qf));
    for (Eigen::Index a = 0; a < n; ++a) r(free_[a]) = rf(a);
    return r;
  }

 private:
  std::vector<int> free_;
  Eigen::MatrixXd vectors_;
  Eigen::VectorXd inverse_values_;
};

Eigen::VectorXd restrict_to(const Eigen::VectorXd& v,
                            const std::vector<int>& free) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(v.size());
  for (int i : free) out(i) = v(i);
  return out;
}

// L-BFGS two-loop recursion on the free variables with the seed solve in
// place of the usual scaled identity.
Eigen::VectorXd quasi_newton_direction(const Eigen::VectorXd& g,
                                       const std::deque<CurvaturePair>& history,
                                       const SeedSolver& seed,
                                       const std::vector<int>& free) {
  Eigen::VectorXd q = restrict_to(g, free);
  std::vector<double> alpha(history.size());
  for (std::size_t i = history.size(); i-- > 0;) {
    alpha[i] = history[i].rho * history[i].s.dot(q);
    q -= alpha[i] * history[i].y;
  }
  q = seed.apply(restrict_to(q, free));
  for (std::size_t i = 0; i < history.size(); ++i) {
    const double beta = history[i].rho * history[i].y.dot(q);
    q += (alpha[i] - beta) * history[i].s;
  }
  return -restrict_to(q, free);
}

InnerResult minimize_in_box(const Objective& objective, Eigen::VectorXd y,
                            const Eigen::VectorXd& lower,
                            const Eigen::VectorXd& upper,
                            const SolverOptions& opts, double tolerance,
                            bool use_history) {
  InnerResult out;
  Evaluation current = objective(y);
  ++out.evaluations;
  std::deque<CurvaturePair> history;

  for (int iter = 0; iter < opts.max_inner_iters; ++iter) {
    const Eigen::VectorXd& g = current.gradient;
    out.projected_gradient = projected_gradient_norm(y, g, lower, upper);
    if (out.projected_gradient <= tolerance) {
      out.status = InnerStatus::kConverged;
      break;
    }

    const double eps = std::min(kActiveWidth, out.projected_gradient);
    const auto free = free_variables(y, g, lower, upper, eps);
    const Eigen::MatrixXd model = current.model();
    const SeedSolver seed(model, free);
    // Pinned variables move straight to their bound along the scaled gradient.
    Eigen::VectorXd to_bound = Eigen::VectorXd::Zero(y.size());
    {
      std::vector<char> is_free(static_cast<std::size_t>(y.size()), 0);
      for (int i : free) is_free[static_cast<std::size_t>(i)] = 1;
      for (Eigen::Index i = 0; i < y.size(); ++i) {
        if (is_free[static_cast<std::size_t>(i)]) continue;
        to_bound(i) = -g(i) / std::max(model(i, i), 1e-12 * std::abs(g(i)) + 1e-300);
      }
    }
    const double pg_now = out.projected_gradient;
    bool accepted = false;
    // Quasi-Newton direction first; on failure retry once from the bare seed.
    for (int attempt = 0; attempt < 2 && !accepted; ++attempt) {
      if (attempt == 1) {
        if (history.empty()) break;
        history.clear();
      }
      Eigen::VectorXd d = quasi_newton_direction(g, history, seed, free);
      if (!(g.dot(d) < 0.0)) {
        history.clear();
        d = quasi_newton_direction(g, history, seed, free);
        if (!(g.dot(d) < 0.0)) d = -restrict_to(g, free);
      }
      d += to_bound;
      const double d_norm = d.lpNorm<Eigen::Infinity>();
      if (!(d_norm > 0.0)) break;

      double step = 1.0;
      while (step * d_norm >= opts.inner_step_tol) {
        const Eigen::VectorXd trial = clamp_to(y + step * d, lower, upper);
        const Eigen::VectorXd s = trial - y;
        const double decrease = g.dot(s);
        if (decrease < 0.0) {
          Evaluation next = objective(trial);
          ++out.evaluations;
          // Near convergence the decrease drops below rounding in the value;
          // then a step that keeps the value within rounding and shrinks the
          // projected gradient is accepted instead.
          const bool armijo = next.value <= current.value + kArmijo * decrease;
          const bool within_rounding =
              next.value - current.value <=
                  kRoundingSlack * (1.0 + std::abs(current.value)) &&
              projected_gradient_norm(trial, next.gradient, lower, upper) <
                  pg_now;
          if (armijo || within_rounding) {
            const Eigen::VectorXd yk = next.gradient - g;
            const double sy = s.dot(yk);
            if (use_history && sy > 1e-12 * s.norm() * yk.norm()) {
              history.push_back({s, yk, 1.0 / sy});
              if (static_cast<int>(history.size()) > opts.lbfgs_memory) {
                history.pop_front();
              }
            }
            y = trial;
            current = std::move(next);
            accepted = true;
            break;
          }
        }
        step *= 0.5;
      }
    }
    if (!accepted) {
      out.status = InnerStatus::kStalled;
      break;
    }
    out.projected_gradient =
        projected_gradient_norm(y, current.gradient, lower, upper);
    if (out.projected_gradient <= tolerance) {
      out.status = InnerStatus::kConverged;
      break;
    }
  }
  out.y = std::move(y);
  out.value = current.value;
  out.gradient = std::move(current.gradient);
  return out;
}

Eigen::VectorXd shifted_violation(const Eigen::VectorXd& c,
                                  const Eigen::VectorXd& lambda, double rho,
                                  const Eigen::VectorXd& lower,
                                  const Eigen::VectorXd& upper) {
  return c - clamp_to(c + lambda / rho, lower, upper);
}

// Shared body of augmented_objective. With build_model set, also keeps what
// the Gauss-Newton curvature  H_F + rho * J_p^T J_p  needs: J_p holds the
// rows whose slack is clamped (all equality rows), H_F is the identity when
// the problem supplies no cost Hessian.
Evaluation evaluate(const NlpProblem& problem, const Eigen::VectorXd& y,
                    const Eigen::VectorXd& multipliers, double penalty,
                    bool build_model) {
  if (!(penalty > 0.0)) throw UsageError("augmented_objective: penalty <= 0");
  if (y.size() != problem.dim) {
    throw UsageError("augmented_objective: y has the wrong length");
  }
  if (multipliers.size() != problem.n_constraints()) {
    throw UsageError("augmented_objective: multiplier count mismatch");
  }
  Evaluation out;
  out.value = problem.cost_of(y);
  if (!std::isfinite(out.value)) throw_evaluation("cost", y);
  out.gradient = problem.cost_gradient_of(y);
  if (out.gradient.size() != problem.dim) {
    throw UsageError("augmented_objective: cost gradient has the wrong length");
  }
  if (!out.gradient.allFinite()) throw_evaluation("cost gradient", y);
  if (build_model) {
    out.penalty = penalty;
    if (problem.cost_hessian_of) {
      out.cost_hessian = problem.cost_hessian_of(y);
      if (out.cost_hessian.rows() != problem.dim ||
          out.cost_hessian.cols() != problem.dim) {
        throw UsageError("augmented_objective: cost Hessian has the wrong shape");
      }
      if (!out.cost_hessian.allFinite()) throw_evaluation("cost Hessian", y);
    } else {
      out.cost_hessian = Eigen::MatrixXd::Identity(problem.dim, problem.dim);
    }
  }
  if (problem.n_constraints() == 0) return out;

  const Eigen::VectorXd c = problem.constraint_of(y);
  if (c.size() != problem.n_constraints()) {
    throw UsageError("augmented_objective: constraint count mismatch");
  }
  if (!c.allFinite()) throw_evaluation("constraints", y);
  const Eigen::VectorXd v = shifted_violation(c, multipliers, penalty,
                                              problem.c_lower, problem.c_upper);
  out.value += multipliers.dot(v) + 0.5 * penalty * v.squaredNorm();

  const Eigen::VectorXd weights = multipliers + penalty * v;
  if (weights.lpNorm<Eigen::Infinity>() == 0.0 && !build_model) return out;

  const Eigen::MatrixXd J = problem.constraint_jacobian_of(y);
  if (J.rows() != c.size() || J.cols() != problem.dim) {
    throw UsageError("augmented_objective: Jacobian has the wrong shape");
  }
  if (!J.allFinite()) throw_evaluation("constraint Jacobian", y);
  out.gradient.noalias() += J.transpose() * weights;

  if (build_model) {
    out.problem = &problem;
    out.point = y;
    out.weights = weights;
    const Eigen::VectorXd shifted = c + multipliers / penalty;
    std::vector<int> rows;
    for (Eigen::Index i = 0; i < c.size(); ++i) {
      if (problem.c_lower(i) == problem.c_upper(i) ||
          shifted(i) < problem.c_lower(i) || shifted(i) > problem.c_upper(i)) {
        rows.push_back(static_cast<int>(i));
      }
    }
    out.penalized_jacobian.resize(static_cast<Eigen::Index>(rows.size()),
                                  problem.dim);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      out.penalized_jacobian.row(static_cast<Eigen::Index>(r)) = J.row(rows[r]);
    }
  }
  return out;
}

}  // namespace

void NlpProblem::validate() const {
  if (dim < 0) throw UsageError("nlp: negative dimension");
  if (!cost_of || !cost_gradient_of) {
    throw UsageError("nlp: cost callbacks are required");
  }
  const auto m = c_lower.size();
  if (c_upper.size() != m) throw UsageError("nlp: c_lower/c_upper differ");
  if (m > 0 && (!constraint_of || !constraint_jacobian_of)) {
    throw UsageError("nlp: constraint callbacks are required");
  }
  if (y_lower.size() != dim || y_upper.size() != dim || y_guess.size() != dim) {
    std::ostringstream msg;
    msg << "nlp: bound/guess vectors must have length " << dim;
    throw UsageError(msg.str());
  }
  if ((c_lower.array() > c_upper.array()).any()) {
    throw UsageError("nlp: c_lower exceeds c_upper");
  }
  if ((y_lower.array() > y_upper.array()).any()) {
    throw UsageError("nlp: y_lower exceeds y_upper");
  }
}

double constraint_violation(const Eigen::VectorXd& c,
                            const Eigen::VectorXd& lower,
                            const Eigen::VectorXd& upper) {
  if (c.size() == 0) return 0.0;
  return (c - clamp_to(c, lower, upper)).lpNorm<Eigen::Infinity>();
}

void SolverOptions::validate() const {
  if (max_outer_iters <= 0 || max_inner_iters <= 0 || lbfgs_memory <= 0) {
    throw UsageError("solver: iteration limits must be positive");
  }
  if (!(constraint_tol > 0.0) || !(optimality_tol > 0.0) ||
      !(initial_penalty > 0.0) || !(inner_step_tol > 0.0) ||
      !(max_penalty >= initial_penalty)) {
    throw UsageError("solver: tolerances and penalty must be positive");
  }
  if (!(penalty_growth > 1.0)) {
    throw UsageError("solver: penalty_growth must exceed 1");
  }
}

std::string to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::kConverged: return "converged";
    case SolveStatus::kMaxIterations: return "max-iters";
    case SolveStatus::kLineSearchFailure: return "line-search-failure";
  }
  return "unknown";
}

Eigen::VectorXd project_to_box(const Eigen::VectorXd& y,
                               const Eigen::VectorXd& lower,
                               const Eigen::VectorXd& upper) {
  if (lower.size() != y.size() || upper.size() != y.size()) {
    throw UsageError("project_to_box: size mismatch");
  }
  return clamp_to(y, lower, upper);
}

AugmentedValue augmented_objective(const NlpProblem& problem,
                                   const Eigen::VectorXd& y,
                                   const Eigen::VectorXd& multipliers,
                                   double penalty) {
  Evaluation e = evaluate(problem, y, multipliers, penalty, false);
  return {e.value, std::move(e.gradient)};
}

SolveReport solve(const NlpProblem& problem, const SolverOptions& opts) {
  problem.validate();
  opts.validate();

  const int m = problem.n_constraints();
  SolveReport report;
  Eigen::VectorXd y =
      project_to_box(problem.y_guess, problem.y_lower, problem.y_upper);
  Eigen::VectorXd lambda = Eigen::VectorXd::Zero(m);
  double rho = opts.initial_penalty;

  const auto constraints_at = [&](const Eigen::VectorXd& point) {
    if (m == 0) return Eigen::VectorXd();
    Eigen::VectorXd c = problem.constraint_of(point);
    if (c.size() != m) throw UsageError("solver: constraint count mismatch");
    if (!c.allFinite()) throw_evaluation("constraints", point);
    return c;
  };

  Eigen::VectorXd c = constraints_at(y);
  double reference_violation =
      constraint_violation(c, problem.c_lower, problem.c_upper);

  Eigen::VectorXd best_y = y;
  double best_violation = std::numeric_limits<double>::infinity();
  bool converged = false;
  double previous_violation = reference_violation;
  // Secant pairs only help when the seed is an approximation; on top of an
  // exact Hessian seed they degrade the step.
  const bool exact_seed =
      problem.cost_hessian_of &&
      (m == 0 || static_cast<bool>(problem.constraint_curvature_of));
  InnerStatus last_inner = InnerStatus::kMaxIterations;

  for (int outer = 1; outer <= opts.max_outer_iters; ++outer) {
    const Objective objective = [&](const Eigen::VectorXd& point) {
      return evaluate(problem, point, lambda, rho, true);
    };
    // Loose inner solves while far from feasible, tightening with rho.
    const double inner_tol =
        std::max(opts.optimality_tol,
                 std::min(previous_violation, kInnerTolScale / rho));
    InnerResult inner = minimize_in_box(objective, y, problem.y_lower,
                                        problem.y_upper, opts, inner_tol,
                                        !exact_seed);
    report.inner_evaluations += inner.evaluations;
    last_inner = inner.status;
    y = std::move(inner.y);
    c = constraints_at(y);
    const double violation =
        constraint_violation(c, problem.c_lower, problem.c_upper);
    report.outer_iterations = outer;
    report.violation_history.push_back(violation);

    if (opts.trace != nullptr) {
      *opts.trace << "outer=" << outer << " cost=" << problem.cost_of(y)
                  << " violation=" << violation << " penalty=" << rho
                  << " inner_evals=" << inner.evaluations
                  << " projected_gradient=" << inner.projected_gradient
                  << '\n';
    }

    if (violation <= best_violation) {
      best_violation = violation;
      best_y = y;
    }
    if (violation <= opts.constraint_tol &&
        inner.projected_gradient <= opts.optimality_tol) {
      converged = true;
      break;
    }
    if (m == 0) continue;

    lambda += rho * shifted_violation(c, lambda, rho, problem.c_lower,
                                      problem.c_upper);
    // An inner solve cut off by its iteration limit says nothing about rho.
    const bool slow = violation > 0.25 * reference_violation &&
                      inner.status != InnerStatus::kMaxIterations;
    const bool stalled = inner.status == InnerStatus::kStalled;
    if (violation > opts.constraint_tol && (slow || stalled)) {
      rho = std::min(rho * opts.penalty_growth, opts.max_penalty);
    }
    if (!slow) reference_violation = violation;
    previous_violation = violation;
  }

  if (converged) {
    report.status = SolveStatus::kConverged;
    report.y_star = y;
  } else {
    report.status = last_inner == InnerStatus::kStalled
                        ? SolveStatus::kLineSearchFailure
                        : SolveStatus::kMaxIterations;
    report.y_star = best_y;
  }
  report.final_constraint_violation = constraint_violation(
      constraints_at(report.y_star), problem.c_lower, problem.c_upper);
  report.final_cost = problem.cost_of(report.y_star);
  report.multipliers = lambda;
  return report;
}

}  // namespace acrobot
