#include "acrobot/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "acrobot/errors.hpp"
#include "acrobot/linear_solve.hpp"

namespace acrobot {

namespace {

void require_links(const LinkChainParams& params, int expected,
                   const char* who) {
  if (params.n_links() != expected) {
    std::ostringstream msg;
    msg << who << ": model expects " << expected << " links, params have "
        << params.n_links();
    throw ModelError(msg.str());
  }
}

void require_size(const Eigen::VectorXd& v, int expected, const char* what) {
  if (v.size() != expected) {
    std::ostringstream msg;
    msg << what << " has length " << v.size() << ", expected " << expected;
    throw ModelError(msg.str());
  }
}

// Lumped coefficients shared by the closed forms.
struct Coeffs2 {
  double m1, m2, l1, l2, g;
};

Coeffs2 coeffs2(const LinkChainParams& p) {
  return {p.masses[0], p.masses[1], p.lengths[0], p.lengths[1], p.gravity};
}

struct Coeffs3 {
  double m1, m2, m3, l1, l2, l3, g;
};

Coeffs3 coeffs3(const LinkChainParams& p) {
  return {p.masses[0],  p.masses[1],  p.masses[2], p.lengths[0],
          p.lengths[1], p.lengths[2], p.gravity};
}

Eigen::MatrixXd mass_matrix_2link(const LinkChainParams& params,
                                  const Eigen::VectorXd& q) {
  const auto [m1, m2, l1, l2, g] = coeffs2(params);
  (void)g;
  const double c2 = std::cos(q(1));
  Eigen::MatrixXd M(2, 2);
  M(0, 0) = (m1 + m2) * l1 * l1 + m2 * l2 * l2 + 2.0 * m2 * l1 * l2 * c2;
  M(0, 1) = m2 * l2 * l2 + m2 * l1 * l2 * c2;
  M(1, 0) = M(0, 1);
  M(1, 1) = m2 * l2 * l2;
  return M;
}

// M_12 uses m3 on the l1 l3 c23 term, matching M_21 and the kinetic energy.
Eigen::MatrixXd mass_matrix_3link(const LinkChainParams& params,
                                  const Eigen::VectorXd& q) {
  const auto [m1, m2, m3, l1, l2, l3, g] = coeffs3(params);
  (void)g;
  const double c2 = std::cos(q(1));
  const double c3 = std::cos(q(2));
  const double c23 = std::cos(q(1) + q(2));
  const double m23 = m2 + m3;
  Eigen::MatrixXd M(3, 3);
  M(0, 0) = (m1 + m23) * l1 * l1 + m23 * l2 * l2 + m3 * l3 * l3 +
            2.0 * m23 * l1 * l2 * c2 + 2.0 * m3 * l1 * l3 * c23 +
            2.0 * m3 * l2 * l3 * c3;
  M(0, 1) = m23 * l2 * l2 + m3 * l3 * l3 + m23 * l1 * l2 * c2 +
            m3 * l1 * l3 * c23 + 2.0 * m3 * l2 * l3 * c3;
  M(0, 2) = m3 * l3 * l3 + m3 * l1 * l3 * c23 + m3 * l2 * l3 * c3;
  M(1, 1) = m23 * l2 * l2 + m3 * l3 * l3 + 2.0 * m3 * l2 * l3 * c3;
  M(1, 2) = m3 * l3 * l3 + m3 * l2 * l3 * c3;
  M(2, 2) = m3 * l3 * l3;
  M(1, 0) = M(0, 1);
  M(2, 0) = M(0, 2);
  M(2, 1) = M(1, 2);
  return M;
}

// M(q) = M0 + sum_t coef_t cos(phi_t) P_t with phi_t a sum of relative angles.
struct CosineTerm {
  double coef;
  std::vector<int> angles;
  Eigen::MatrixXd pattern;
};

std::vector<CosineTerm> mass_matrix_cosines(const LinkChainParams& params) {
  if (params.n_links() == 2) {
    const auto [m1, m2, l1, l2, g] = coeffs2(params);
    (void)m1;
    (void)g;
    Eigen::MatrixXd P(2, 2);
    P << 2, 1, 1, 0;
    return {{m2 * l1 * l2, {1}, P}};
  }
  const auto [m1, m2, m3, l1, l2, l3, g] = coeffs3(params);
  (void)m1;
  (void)g;
  Eigen::MatrixXd Pa(3, 3), Pb(3, 3), Pe(3, 3);
  Pa << 2, 1, 0, 1, 0, 0, 0, 0, 0;
  Pb << 2, 1, 1, 1, 0, 0, 1, 0, 0;
  Pe << 2, 2, 1, 2, 2, 1, 1, 1, 0;
  return {{(m2 + m3) * l1 * l2, {1}, Pa},
          {m3 * l1 * l3, {1, 2}, Pb},
          {m3 * l2 * l3, {2}, Pe}};
}

// d2M / dq_k dq_l, indexed [k][l].
std::vector<std::vector<Eigen::MatrixXd>> mass_matrix_second_partials(
    const LinkChainParams& params, const Eigen::VectorXd& q) {
  const int n = params.n_links();
  std::vector<std::vector<Eigen::MatrixXd>> d2M(
      n, std::vector<Eigen::MatrixXd>(n, Eigen::MatrixXd::Zero(n, n)));
  for (const auto& term : mass_matrix_cosines(params)) {
    double phi = 0.0;
    for (int a : term.angles) phi += q(a);
    const Eigen::MatrixXd block = -term.coef * std::cos(phi) * term.pattern;
    for (int k : term.angles) {
      for (int l : term.angles) d2M[k][l] += block;
    }
  }
  return d2M;
}

// d tau_g / dq with tau_i = -g sum_{j >= i} (sum_{r >= j} m_r) l_j sin(theta_j).
Eigen::MatrixXd gravity_torque_jacobian(const LinkChainParams& params,
                                        const Eigen::VectorXd& q) {
  const int n = params.n_links();
  Eigen::VectorXd link_term(n);
  double theta = 0.0;
  for (int j = 0; j < n; ++j) {
    theta += q(j);
    double outboard = 0.0;
    for (int r = j; r < n; ++r) outboard += params.masses[r];
    link_term(j) = -params.gravity * outboard * params.lengths[j] * std::cos(theta);
  }
  Eigen::MatrixXd G(n, n);
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < n; ++k) G(i, k) = link_term.tail(n - std::max(i, k)).sum();
  }
  return G;
}

}  // namespace

int LinkChainParams::n_controls() const {
  int count = 0;
  for (bool a : actuated) count += a ? 1 : 0;
  return count;
}

void LinkChainParams::validate() const {
  const auto n = masses.size();
  if (n < 2 || n > 3) {
    std::ostringstream msg;
    msg << "link chain: closed forms exist for 2 or 3 links, got " << n;
    throw ModelError(msg.str());
  }
  if (lengths.size() != n || actuated.size() != n) {
    throw ModelError(
        "link chain: masses, lengths and actuated must have equal length");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(masses[i]) || masses[i] <= 0.0) {
      std::ostringstream msg;
      msg << "link chain: mass " << i + 1 << " must be positive, got "
          << masses[i];
      throw ModelError(msg.str());
    }
    if (!std::isfinite(lengths[i]) || lengths[i] <= 0.0) {
      std::ostringstream msg;
      msg << "link chain: length " << i + 1 << " must be positive, got "
          << lengths[i];
      throw ModelError(msg.str());
    }
  }
  if (!std::isfinite(gravity) || gravity < 0.0) {
    throw ModelError("link chain: gravity must be finite and >= 0");
  }
}

void LinkChainParams::validate_acrobot() const {
  validate();
  if (actuated[0]) {
    throw ModelError("acrobot: the first joint must be passive");
  }
  if (n_controls() == 0) {
    throw ModelError("acrobot: at least one joint past the first must be "
                     "actuated");
  }
}

LinkChainParams LinkChainParams::acrobot(int n_links) {
  LinkChainParams p;
  p.masses.assign(n_links, 1.0);
  p.lengths.assign(n_links, 1.0);
  p.gravity = 9.81;
  p.actuated.assign(n_links, true);
  if (n_links > 0) p.actuated[0] = false;
  return p;
}

State State::zero(int n_links) {
  return State(Eigen::VectorXd::Zero(n_links), Eigen::VectorXd::Zero(n_links));
}

State State::from_stacked(const Eigen::VectorXd& x) {
  if (x.size() % 2 != 0) {
    throw ModelError("state: stacked vector must have even length");
  }
  const auto n = x.size() / 2;
  return State(x.head(n), x.tail(n));
}

Eigen::VectorXd State::stacked() const {
  Eigen::VectorXd x(q.size() + qdot.size());
  x << q, qdot;
  return x;
}

bool State::is_finite() const { return q.allFinite() && qdot.allFinite(); }

Eigen::MatrixXd actuation_matrix(const LinkChainParams& params) {
  const int n = params.n_links();
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(n, params.n_controls());
  int col = 0;
  for (int i = 0; i < n; ++i) {
    if (params.actuated[i]) B(i, col++) = 1.0;
  }
  return B;
}

Eigen::MatrixXd mass_matrix(const LinkChainParams& params,
                            const Eigen::VectorXd& q) {
  require_size(q, params.n_links(), "q");
  switch (params.n_links()) {
    case 2:
      return mass_matrix_2link(params, q);
    case 3:
      return mass_matrix_3link(params, q);
    default:
      require_links(params, 3, "mass_matrix");
      return {};
  }
}

std::vector<Eigen::MatrixXd> mass_matrix_partials(const LinkChainParams& params,
                                                  const Eigen::VectorXd& q) {
  require_size(q, params.n_links(), "q");
  const int n = params.n_links();
  std::vector<Eigen::MatrixXd> dM(n, Eigen::MatrixXd::Zero(n, n));
  if (n == 2) {
    const auto [m1, m2, l1, l2, g] = coeffs2(params);
    (void)m1;
    (void)g;
    const double a = m2 * l1 * l2 * std::sin(q(1));
    dM[1](0, 0) = -2.0 * a;
    dM[1](0, 1) = dM[1](1, 0) = -a;
    return dM;
  }
  if (n != 3) require_links(params, 3, "mass_matrix_partials");

  const auto [m1, m2, m3, l1, l2, l3, g] = coeffs3(params);
  (void)m1;
  (void)g;
  const double a = (m2 + m3) * l1 * l2 * std::sin(q(1));
  const double b = m3 * l1 * l3 * std::sin(q(1) + q(2));
  const double e = m3 * l2 * l3 * std::sin(q(2));

  auto& d2 = dM[1];
  d2(0, 0) = -2.0 * a - 2.0 * b;
  d2(0, 1) = d2(1, 0) = -a - b;
  d2(0, 2) = d2(2, 0) = -b;

  auto& d3 = dM[2];
  d3(0, 0) = -2.0 * b - 2.0 * e;
  d3(0, 1) = d3(1, 0) = -b - 2.0 * e;
  d3(0, 2) = d3(2, 0) = -b - e;
  d3(1, 1) = -2.0 * e;
  d3(1, 2) = d3(2, 1) = -e;
  return dM;
}

Eigen::VectorXd gravity_torque(const LinkChainParams& params,
                               const Eigen::VectorXd& q) {
  require_size(q, params.n_links(), "q");
  if (params.n_links() == 2) {
    const auto [m1, m2, l1, l2, g] = coeffs2(params);
    const double s1 = std::sin(q(0));
    const double s12 = std::sin(q(0) + q(1));
    Eigen::VectorXd tau(2);
    tau(0) = -g * ((m1 + m2) * l1 * s1 + m2 * l2 * s12);
    tau(1) = -g * m2 * l2 * s12;
    return tau;
  }
  if (params.n_links() != 3) require_links(params, 3, "gravity_torque");
  const auto [m1, m2, m3, l1, l2, l3, g] = coeffs3(params);
  const double s1 = std::sin(q(0));
  const double s12 = std::sin(q(0) + q(1));
  const double s123 = std::sin(q(0) + q(1) + q(2));
  Eigen::VectorXd tau(3);
  tau(0) = -g * ((m1 + m2 + m3) * l1 * s1 + (m2 + m3) * l2 * s12 +
                 m3 * l3 * s123);
  tau(1) = -g * ((m2 + m3) * l2 * s12 + m3 * l3 * s123);
  tau(2) = -g * m3 * l3 * s123;
  return tau;
}

Eigen::MatrixXd christoffel_coriolis(const Eigen::VectorXd& qdot,
                                     std::span<const Eigen::MatrixXd> dM_dq) {
  const int n = static_cast<int>(qdot.size());
  if (static_cast<int>(dM_dq.size()) != n) {
    throw UsageError("christoffel_coriolis: need one dM/dq slice per joint");
  }
  Eigen::MatrixXd C = Eigen::MatrixXd::Zero(n, n);
  for (int k = 0; k < n; ++k) {
    const double v = qdot(k);
    if (v == 0.0) continue;
    const auto& dk = dM_dq[k];
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        C(i, j) += 0.5 * (dk(i, j) + dM_dq[j](i, k) - dM_dq[i](j, k)) * v;
      }
    }
  }
  return C;
}

ManipulatorTerms manipulator_terms_2link(const LinkChainParams& params,
                                         const State& state) {
  require_links(params, 2, "manipulator_terms_2link");
  require_size(state.q, 2, "q");
  require_size(state.qdot, 2, "qdot");
  const auto [m1, m2, l1, l2, g] = coeffs2(params);
  (void)m1;
  (void)g;
  const double a = m2 * l1 * l2 * std::sin(state.q(1));
  const double qd1 = state.qdot(0);
  const double qd2 = state.qdot(1);

  ManipulatorTerms terms;
  terms.M = mass_matrix_2link(params, state.q);
  terms.C.resize(2, 2);
  terms.C << 0.0, -a * (2.0 * qd1 + qd2),
             a * qd1, 0.0;
  terms.tau_g = gravity_torque(params, state.q);
  terms.B = actuation_matrix(params);
  return terms;
}

ManipulatorTerms manipulator_terms_3link(const LinkChainParams& params,
                                         const State& state) {
  require_links(params, 3, "manipulator_terms_3link");
  require_size(state.q, 3, "q");
  require_size(state.qdot, 3, "qdot");
  ManipulatorTerms terms;
  terms.M = mass_matrix_3link(params, state.q);
  const auto partials = mass_matrix_partials(params, state.q);
  terms.C = christoffel_coriolis(state.qdot, partials);
  terms.tau_g = gravity_torque(params, state.q);
  terms.B = actuation_matrix(params);
  return terms;
}

ManipulatorTerms manipulator_terms(const LinkChainParams& params,
                                   const State& state) {
  if (params.n_links() == 2) return manipulator_terms_2link(params, state);
  return manipulator_terms_3link(params, state);
}

Eigen::VectorXd state_derivative(const LinkChainParams& params,
                                 const State& state,
                                 const Eigen::VectorXd& control) {
  if (control.size() != params.n_controls()) {
    std::ostringstream msg;
    msg << "state_derivative: control has length " << control.size()
        << ", model has " << params.n_controls() << " actuated joints";
    throw UsageError(msg.str());
  }
  const ManipulatorTerms t = manipulator_terms(params, state);
  const Eigen::VectorXd force = t.tau_g + t.B * control - t.C * state.qdot;
  const Eigen::VectorXd qdd = lu_solve(t.M, force);

  Eigen::VectorXd xdot(2 * state.n_links());
  xdot << state.qdot, qdd;
  return xdot;
}

Eigen::MatrixXd state_derivative_jacobian(const LinkChainParams& params,
                                          const State& state,
                                          const Eigen::VectorXd& control) {
  if (control.size() != params.n_controls()) {
    throw UsageError("state_derivative_jacobian: control length mismatch");
  }
  const int n = params.n_links();
  const int m = params.n_controls();
  require_size(state.q, n, "q");
  require_size(state.qdot, n, "qdot");
  const Eigen::VectorXd& qd = state.qdot;

  const ManipulatorTerms t = manipulator_terms(params, state);
  const LuFactorization lu(t.M);
  const Eigen::VectorXd qdd =
      lu.solve(t.tau_g + t.B * control - t.C * qd);
  const auto dM = mass_matrix_partials(params, state.q);
  const auto d2M = mass_matrix_second_partials(params, state.q);
  const Eigen::MatrixXd dtau = gravity_torque_jacobian(params, state.q);

  // h = C qdot, h_i = sum_k (dM_k qd)_i qd_k - 1/2 qd' dM_i qd.
  Eigen::MatrixXd Mdot = Eigen::MatrixXd::Zero(n, n);
  std::vector<Eigen::VectorXd> dM_qd(n);
  for (int k = 0; k < n; ++k) {
    Mdot += dM[k] * qd(k);
    dM_qd[k] = dM[k] * qd;
  }
  Eigen::MatrixXd dh_dq(n, n);
  Eigen::MatrixXd dh_dqd(n, n);
  for (int l = 0; l < n; ++l) {
    Eigen::VectorXd col = Eigen::VectorXd::Zero(n);
    for (int k = 0; k < n; ++k) col += d2M[l][k] * qd * qd(k);
    for (int i = 0; i < n; ++i) col(i) -= 0.5 * qd.dot(d2M[l][i] * qd);
    dh_dq.col(l) = col;
    for (int i = 0; i < n; ++i) {
      dh_dqd(i, l) = Mdot(i, l) + dM_qd[l](i) - dM_qd[i](l);
    }
  }

  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(2 * n, 2 * n + m);
  J.block(0, n, n, n).setIdentity();
  for (int k = 0; k < n; ++k) {
    J.block(n, k, n, 1) = lu.solve(dtau.col(k) - dh_dq.col(k) - dM[k] * qdd);
    J.block(n, n + k, n, 1) = lu.solve(-dh_dqd.col(k));
  }
  for (int j = 0; j < m; ++j) J.block(n, 2 * n + j, n, 1) = lu.solve(t.B.col(j));
  return J;
}

double kinetic_energy(const LinkChainParams& params, const State& state) {
  require_size(state.q, params.n_links(), "q");
  require_size(state.qdot, params.n_links(), "qdot");
  if (params.n_links() == 2) {
    const auto [m1, m2, l1, l2, g] = coeffs2(params);
    (void)g;
    const double w1 = state.qdot(0);
    const double w12 = state.qdot(0) + state.qdot(1);
    return 0.5 * (m1 + m2) * l1 * l1 * w1 * w1 + 0.5 * m2 * l2 * l2 * w12 * w12 +
           m2 * l1 * l2 * w1 * w12 * std::cos(state.q(1));
  }
  if (params.n_links() != 3) require_links(params, 3, "kinetic_energy");
  const auto [m1, m2, m3, l1, l2, l3, g] = coeffs3(params);
  (void)g;
  const double w1 = state.qdot(0);
  const double w12 = w1 + state.qdot(1);
  const double w123 = w12 + state.qdot(2);
  const double c2 = std::cos(state.q(1));
  const double c3 = std::cos(state.q(2));
  const double c23 = std::cos(state.q(1) + state.q(2));
  return 0.5 * (m1 + m2 + m3) * l1 * l1 * w1 * w1 +
         0.5 * (m2 + m3) * l2 * l2 * w12 * w12 +
         0.5 * m3 * l3 * l3 * w123 * w123 +
         (m2 + m3) * l1 * l2 * w1 * w12 * c2 + m3 * l1 * l3 * w1 * w123 * c23 +
         m3 * l2 * l3 * w12 * w123 * c3;
}

double potential_energy(const LinkChainParams& params, const State& state) {
  require_size(state.q, params.n_links(), "q");
  if (params.n_links() == 2) {
    const auto [m1, m2, l1, l2, g] = coeffs2(params);
    return -(m1 + m2) * g * l1 * std::cos(state.q(0)) -
           m2 * g * l2 * std::cos(state.q(0) + state.q(1));
  }
  if (params.n_links() != 3) require_links(params, 3, "potential_energy");
  const auto [m1, m2, m3, l1, l2, l3, g] = coeffs3(params);
  const double q1 = state.q(0);
  const double q12 = q1 + state.q(1);
  const double q123 = q12 + state.q(2);
  return -(m1 + m2 + m3) * l1 * g * std::cos(q1) -
         (m2 + m3) * l2 * g * std::cos(q12) - m3 * l3 * g * std::cos(q123);
}

double total_energy(const LinkChainParams& params, const State& state) {
  return kinetic_energy(params, state) + potential_energy(params, state);
}

}  // namespace acrobot
