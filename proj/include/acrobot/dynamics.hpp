#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

namespace acrobot {

/**
 * Planar chain of massless links with a point mass at the far end of each
 * link. Joint 1 is pinned to the origin.
 *
 * Angle convention: q1 is measured from the straight-down vertical, every
 * later angle is relative to the previous link. The hanging rest state is
 * q = 0 and the inverted state is q = (pi, 0, ...).
 */
struct LinkChainParams {
  std::vector<double> masses;   // kg, one per link end
  std::vector<double> lengths;  // m
  double gravity = 9.81;        // m/s^2
  std::vector<bool> actuated;   // true where the joint torque is an input

  int n_links() const { return static_cast<int>(masses.size()); }
  int n_controls() const;
  int n_states() const { return 2 * n_links(); }

  // Throws ModelError when sizes disagree, masses/lengths are not strictly
  // positive, gravity is negative or a value is non-finite.
  void validate() const;

  // Additionally requires the first joint passive and some other joint active.
  void validate_acrobot() const;

  // 1 kg masses, 1 m links, g = 9.81, every joint but the first actuated.
  static LinkChainParams acrobot(int n_links);
};

struct State {
  Eigen::VectorXd q;     // rad
  Eigen::VectorXd qdot;  // rad/s

  State() = default;
  State(Eigen::VectorXd q_in, Eigen::VectorXd qdot_in)
      : q(std::move(q_in)), qdot(std::move(qdot_in)) {}

  static State zero(int n_links);
  // Splits x = (q, qdot); x must have even length.
  static State from_stacked(const Eigen::VectorXd& x);

  Eigen::VectorXd stacked() const;
  int n_links() const { return static_cast<int>(q.size()); }
  bool is_finite() const;
};

// M(q) qdd + C(q, qd) qd = tau_g(q) + B u
struct ManipulatorTerms {
  Eigen::MatrixXd M;
  Eigen::MatrixXd C;
  Eigen::VectorXd tau_g;
  Eigen::MatrixXd B;
};

// n x m selection matrix: one unit entry per actuated joint, in joint order.
Eigen::MatrixXd actuation_matrix(const LinkChainParams& params);

// Closed-form inertia matrix for the 2- and 3-link chains.
Eigen::MatrixXd mass_matrix(const LinkChainParams& params,
                            const Eigen::VectorXd& q);

// dM/dq_k for k = 0..n-1, differentiated by hand from mass_matrix.
std::vector<Eigen::MatrixXd> mass_matrix_partials(const LinkChainParams& params,
                                                  const Eigen::VectorXd& q);

Eigen::VectorXd gravity_torque(const LinkChainParams& params,
                               const Eigen::VectorXd& q);

/**
 * Coriolis matrix from Christoffel symbols of the first kind:
 *
 *   C_ij = sum_k 1/2 (dM_ij/dq_k + dM_ik/dq_j - dM_jk/dq_i) qdot_k
 *
 * dM_dq[k] holds dM/dq_k, analytic or finite-differenced. The result makes
 * Mdot - 2C skew-symmetric.
 */
Eigen::MatrixXd christoffel_coriolis(const Eigen::VectorXd& qdot,
                                     std::span<const Eigen::MatrixXd> dM_dq);

// 2-link terms with the closed-form C, whose entries differ from the
// Christoffel C while producing the same C qdot.
ManipulatorTerms manipulator_terms_2link(const LinkChainParams& params,
                                         const State& state);

// 3-link terms; C comes from christoffel_coriolis with analytic partials.
ManipulatorTerms manipulator_terms_3link(const LinkChainParams& params,
                                         const State& state);

// Dispatches on params.n_links().
ManipulatorTerms manipulator_terms(const LinkChainParams& params,
                                   const State& state);

/// Returns xdot = (qdot, qdd) with qdd = M^-1 (tau_g + B u - C qdot), solved
/// by LU rather than an explicit inverse.
Eigen::VectorXd state_derivative(const LinkChainParams& params,
                                 const State& state,
                                 const Eigen::VectorXd& control);

/**
 * d xdot / d (q, qdot, u), a 2n x (2n + m) matrix, from analytic partials of
 * M and tau_g. Uses C qdot = Mdot qdot - 1/2 d(qdot' M qdot)/dq, which holds
 * for the closed-form 2-link C as well as the Christoffel C.
 */
Eigen::MatrixXd state_derivative_jacobian(const LinkChainParams& params,
                                          const State& state,
                                          const Eigen::VectorXd& control);

double kinetic_energy(const LinkChainParams& params, const State& state);
double potential_energy(const LinkChainParams& params, const State& state);
double total_energy(const LinkChainParams& params, const State& state);

}  // namespace acrobot
