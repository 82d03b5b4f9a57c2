#include "acrobot/transcription.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <utility>

#include "acrobot/errors.hpp"

namespace acrobot {

namespace {

void require_length(const Eigen::VectorXd& v, int n, const char* what) {
  if (v.size() != n) {
    std::ostringstream msg;
    msg << "ocp: " << what << " has length " << v.size() << ", expected " << n;
    throw UsageError(msg.str());
  }
}

Eigen::VectorXd knot_dynamics(const LinkChainParams& params,
                              const Eigen::VectorXd& x,
                              const Eigen::VectorXd& u) {
  return state_derivative(params, State::from_stacked(x), u);
}

// d f / d (x, u) at one knot.
Eigen::MatrixXd knot_dynamics_jacobian(const LinkChainParams& params,
                                       const Eigen::VectorXd& x,
                                       const Eigen::VectorXd& u) {
  return state_derivative_jacobian(params, State::from_stacked(x), u);
}

// Hessian of a . f(z) at one knot, z = (x, u): central differences of the
// exact gradient J(z)' a, symmetrized.
Eigen::MatrixXd weighted_dynamics_hessian(const LinkChainParams& params,
                                          const Eigen::VectorXd& x,
                                          const Eigen::VectorXd& u,
                                          const Eigen::VectorXd& a) {
  const auto ns = x.size();
  const auto nz = ns + u.size();
  Eigen::VectorXd z(nz);
  z << x, u;
  const auto gradient = [&](const Eigen::VectorXd& point) -> Eigen::VectorXd {
    return knot_dynamics_jacobian(params, point.head(ns), point.tail(nz - ns))
               .transpose() *
           a;
  };
  Eigen::MatrixXd H(nz, nz);
  Eigen::VectorXd p = z;
  for (Eigen::Index j = 0; j < nz; ++j) {
    const double step = 1e-5 * (1.0 + std::abs(z(j)));
    p(j) = z(j) + step;
    const Eigen::VectorXd plus = gradient(p);
    p(j) = z(j) - step;
    const Eigen::VectorXd minus = gradient(p);
    p(j) = z(j);
    H.col(j) = (plus - minus) / (2.0 * step);
  }
  return 0.5 * (H + H.transpose());
}

}  // namespace

void OcpSpec::validate() const {
  params.validate();
  const int ns = params.n_states();
  const int nu = params.n_controls();
  if (!(t_final > 0.0) || !std::isfinite(t_final)) {
    throw UsageError("ocp: t_final must be positive");
  }
  if (n_knots < 3) throw UsageError("ocp: n_knots must be at least 3");
  require_length(x_init, ns, "x_init");
  require_length(x_final, ns, "x_final");
  require_length(x_min, ns, "x_min");
  require_length(x_max, ns, "x_max");
  require_length(u_min, nu, "u_min");
  require_length(u_max, nu, "u_max");
  if ((x_min.array() > x_max.array()).any()) {
    throw UsageError("ocp: x_min exceeds x_max");
  }
  if ((u_min.array() > u_max.array()).any()) {
    throw UsageError("ocp: u_min exceeds u_max");
  }
  for (const auto* boundary : {&x_init, &x_final}) {
    if ((boundary->array() < x_min.array()).any() ||
        (boundary->array() > x_max.array()).any()) {
      throw UsageError("ocp: boundary state lies outside the state bounds");
    }
  }
}

OcpSpec OcpSpec::swing_up(const LinkChainParams& params) {
  constexpr double pi = std::numbers::pi;
  const int n = params.n_links();
  OcpSpec spec;
  spec.params = params;
  spec.x_init = Eigen::VectorXd::Zero(2 * n);
  spec.x_final = Eigen::VectorXd::Zero(2 * n);
  spec.x_final(0) = pi;
  spec.u_min = Eigen::VectorXd::Constant(params.n_controls(), -20.0);
  spec.u_max = Eigen::VectorXd::Constant(params.n_controls(), 20.0);
  spec.x_min.resize(2 * n);
  spec.x_max.resize(2 * n);
  spec.x_min << Eigen::VectorXd::Constant(n, -2.0 * pi),
      Eigen::VectorXd::Constant(n, -4.0 * pi);
  spec.x_max = -spec.x_min;
  return spec;
}

KnotLayout::KnotLayout(int n_knots, int n_states, int n_controls)
    : n_knots_(n_knots), n_states_(n_states), n_controls_(n_controls) {
  if (n_knots < 1 || n_states < 1 || n_controls < 0) {
    throw UsageError("knot layout: invalid dimensions");
  }
}

KnotLayout::KnotLayout(const OcpSpec& spec)
    : KnotLayout(spec.n_knots, spec.params.n_states(),
                 spec.params.n_controls()) {}

void KnotLayout::check(const Eigen::VectorXd& y) const {
  if (y.size() != dim()) {
    std::ostringstream msg;
    msg << "knot layout: decision vector has length " << y.size()
        << ", expected " << dim();
    throw UsageError(msg.str());
  }
}

Eigen::VectorXd KnotLayout::pack(const Eigen::MatrixXd& states,
                                 const Eigen::MatrixXd& controls) const {
  if (states.rows() != n_knots_ || states.cols() != n_states_ ||
      controls.rows() != n_knots_ || controls.cols() != n_controls_) {
    throw UsageError("knot layout: pack shape mismatch");
  }
  Eigen::VectorXd y(dim());
  for (int k = 0; k < n_knots_; ++k) {
    y.segment(state_offset(k), n_states_) = states.row(k).transpose();
    y.segment(control_offset(k), n_controls_) = controls.row(k).transpose();
  }
  return y;
}

KnotLayout::Unpacked KnotLayout::unpack(const Eigen::VectorXd& y) const {
  check(y);
  Unpacked out{Eigen::MatrixXd(n_knots_, n_states_),
               Eigen::MatrixXd(n_knots_, n_controls_)};
  for (int k = 0; k < n_knots_; ++k) {
    out.states.row(k) = y.segment(state_offset(k), n_states_).transpose();
    out.controls.row(k) = y.segment(control_offset(k), n_controls_).transpose();
  }
  return out;
}

Eigen::VectorXd KnotLayout::state(const Eigen::VectorXd& y, int knot) const {
  return y.segment(state_offset(knot), n_states_);
}

Eigen::VectorXd KnotLayout::control(const Eigen::VectorXd& y, int knot) const {
  return y.segment(control_offset(knot), n_controls_);
}

Eigen::VectorXd defects(const OcpSpec& spec, const Eigen::VectorXd& y) {
  const KnotLayout layout(spec);
  if (y.size() != layout.dim()) throw UsageError("defects: wrong y length");
  const int N = layout.n_knots();
  const int ns = layout.n_states();
  const double h = spec.step();

  std::vector<Eigen::VectorXd> f(N);
  const int needed = spec.scheme == CollocationScheme::kEuler ? N - 1 : N;
  for (int k = 0; k < needed; ++k) {
    f[k] = knot_dynamics(spec.params, layout.state(y, k), layout.control(y, k));
  }

  Eigen::VectorXd zeta((N - 1) * ns);
  for (int k = 0; k + 1 < N; ++k) {
    const Eigen::VectorXd step_term =
        spec.scheme == CollocationScheme::kEuler
            ? Eigen::VectorXd(h * f[k])
            : Eigen::VectorXd(0.5 * h * (f[k] + f[k + 1]));
    zeta.segment(k * ns, ns) =
        layout.state(y, k + 1) - layout.state(y, k) - step_term;
  }
  return zeta;
}

double effort_cost(const OcpSpec& spec, const Eigen::VectorXd& y) {
  const KnotLayout layout(spec);
  if (y.size() != layout.dim()) throw UsageError("effort_cost: wrong y length");
  const int N = layout.n_knots();
  double total = 0.0;
  for (int k = 0; k < N; ++k) {
    const double weight = (k == 0 || k == N - 1) ? 0.5 : 1.0;
    total += weight * layout.control(y, k).squaredNorm();
  }
  return total * spec.t_final / (N - 1);
}

Eigen::VectorXd effort_cost_gradient(const OcpSpec& spec,
                                     const Eigen::VectorXd& y) {
  const KnotLayout layout(spec);
  if (y.size() != layout.dim()) throw UsageError("effort_cost: wrong y length");
  const int N = layout.n_knots();
  const double h = spec.step();
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(layout.dim());
  for (int k = 0; k < N; ++k) {
    // End knots sit in one interval, interior knots in two.
    const double weight = (k == 0 || k == N - 1) ? h : 2.0 * h;
    grad.segment(layout.control_offset(k), layout.n_controls()) =
        weight * layout.control(y, k);
  }
  return grad;
}

Eigen::MatrixXd effort_cost_hessian(const OcpSpec& spec) {
  const KnotLayout layout(spec);
  const int N = layout.n_knots();
  const double h = spec.step();
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(layout.dim());
  for (int k = 0; k < N; ++k) {
    const double weight = (k == 0 || k == N - 1) ? h : 2.0 * h;
    diag.segment(layout.control_offset(k), layout.n_controls()).setConstant(weight);
  }
  return diag.asDiagonal();
}

Eigen::VectorXd boundary_constraints(const OcpSpec& spec,
                                     const Eigen::VectorXd& y) {
  const KnotLayout layout(spec);
  if (y.size() != layout.dim()) throw UsageError("boundary: wrong y length");
  const int ns = layout.n_states();
  Eigen::VectorXd r(2 * ns);
  r.head(ns) = layout.state(y, 0) - spec.x_init;
  r.tail(ns) = layout.state(y, layout.n_knots() - 1) - spec.x_final;
  return r;
}

Eigen::VectorXd collocation_constraints(const OcpSpec& spec,
                                        const Eigen::VectorXd& y) {
  const Eigen::VectorXd zeta = defects(spec, y);
  const Eigen::VectorXd psi = boundary_constraints(spec, y);
  Eigen::VectorXd c(zeta.size() + psi.size());
  c << zeta, psi;
  return c;
}

Eigen::MatrixXd collocation_jacobian(const OcpSpec& spec,
                                     const Eigen::VectorXd& y) {
  const KnotLayout layout(spec);
  if (y.size() != layout.dim()) throw UsageError("jacobian: wrong y length");
  const int N = layout.n_knots();
  const int ns = layout.n_states();
  const int stride = layout.stride();
  const double h = spec.step();
  const bool euler = spec.scheme == CollocationScheme::kEuler;

  std::vector<Eigen::MatrixXd> F(N);
  for (int k = 0; k < (euler ? N - 1 : N); ++k) {
    F[k] = knot_dynamics_jacobian(spec.params, layout.state(y, k),
                                  layout.control(y, k));
  }

  const int rows = (N - 1) * ns + 2 * ns;
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(rows, layout.dim());
  const double weight = euler ? h : 0.5 * h;
  for (int k = 0; k + 1 < N; ++k) {
    auto here = J.block(k * ns, layout.state_offset(k), ns, stride);
    here = -weight * F[k];
    here.leftCols(ns).diagonal().array() -= 1.0;

    auto next = J.block(k * ns, layout.state_offset(k + 1), ns, stride);
    if (!euler) next = -weight * F[k + 1];
    next.leftCols(ns).diagonal().array() += 1.0;
  }
  const int b = (N - 1) * ns;
  J.block(b, layout.state_offset(0), ns, ns).setIdentity();
  J.block(b + ns, layout.state_offset(N - 1), ns, ns).setIdentity();
  return J;
}

Eigen::MatrixXd collocation_curvature(const OcpSpec& spec,
                                      const Eigen::VectorXd& y,
                                      const Eigen::VectorXd& w) {
  const KnotLayout layout(spec);
  if (y.size() != layout.dim()) throw UsageError("curvature: wrong y length");
  const int N = layout.n_knots();
  const int ns = layout.n_states();
  const int stride = layout.stride();
  if (w.size() != (N + 1) * ns) throw UsageError("curvature: wrong w length");
  const double h = spec.step();
  const bool euler = spec.scheme == CollocationScheme::kEuler;

  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(layout.dim(), layout.dim());
  for (int k = 0; k < N; ++k) {
    // f_k enters defect k (and defect k-1 for the trapezoid) with -h or -h/2.
    Eigen::VectorXd a = Eigen::VectorXd::Zero(ns);
    if (euler) {
      if (k + 1 < N) a = -h * w.segment(k * ns, ns);
    } else {
      if (k + 1 < N) a -= 0.5 * h * w.segment(k * ns, ns);
      if (k > 0) a -= 0.5 * h * w.segment((k - 1) * ns, ns);
    }
    if (a.lpNorm<Eigen::Infinity>() == 0.0) continue;
    H.block(layout.state_offset(k), layout.state_offset(k), stride, stride) =
        weighted_dynamics_hessian(spec.params, layout.state(y, k),
                                  layout.control(y, k), a);
  }
  return H;
}

Eigen::VectorXd initial_guess(const OcpSpec& spec) {
  const KnotLayout layout(spec);
  const int N = layout.n_knots();
  Eigen::MatrixXd states(N, layout.n_states());
  for (int k = 0; k < N; ++k) {
    const double w = static_cast<double>(k) / (N - 1);
    states.row(k) = ((1.0 - w) * spec.x_init + w * spec.x_final).transpose();
  }
  return layout.pack(states, Eigen::MatrixXd::Zero(N, layout.n_controls()));
}

NlpProblem build_nlp(const OcpSpec& spec) {
  spec.validate();
  const KnotLayout layout(spec);
  const int N = layout.n_knots();
  const int ns = layout.n_states();
  const int nu = layout.n_controls();

  NlpProblem p;
  p.dim = layout.dim();
  p.cost_of = [spec](const Eigen::VectorXd& y) { return effort_cost(spec, y); };
  p.cost_gradient_of = [spec](const Eigen::VectorXd& y) {
    return effort_cost_gradient(spec, y);
  };
  const Eigen::MatrixXd hessian = effort_cost_hessian(spec);
  p.cost_hessian_of = [hessian](const Eigen::VectorXd&) { return hessian; };
  p.constraint_of = [spec](const Eigen::VectorXd& y) {
    return collocation_constraints(spec, y);
  };
  p.constraint_jacobian_of = [spec](const Eigen::VectorXd& y) {
    return collocation_jacobian(spec, y);
  };
  p.constraint_curvature_of = [spec](const Eigen::VectorXd& y,
                                     const Eigen::VectorXd& w) {
    return collocation_curvature(spec, y, w);
  };

  const int rows = (N - 1) * ns + 2 * ns;
  p.c_lower = Eigen::VectorXd::Zero(rows);
  p.c_upper = Eigen::VectorXd::Zero(rows);

  p.y_lower.resize(p.dim);
  p.y_upper.resize(p.dim);
  for (int k = 0; k < N; ++k) {
    p.y_lower.segment(layout.state_offset(k), ns) = spec.x_min;
    p.y_upper.segment(layout.state_offset(k), ns) = spec.x_max;
    p.y_lower.segment(layout.control_offset(k), nu) = spec.u_min;
    p.y_upper.segment(layout.control_offset(k), nu) = spec.u_max;
  }
  // The boundary rows stay in c; pinning the end knots in the box as well
  // makes them exact after projection.
  for (const auto& [k, x] : {std::pair{0, spec.x_init}, {N - 1, spec.x_final}}) {
    p.y_lower.segment(layout.state_offset(k), ns) = x;
    p.y_upper.segment(layout.state_offset(k), ns) = x;
  }
  p.y_guess = initial_guess(spec);
  return p;
}

Eigen::MatrixXd constraint_jacobian_fd(const NlpProblem& problem,
                                       const Eigen::VectorXd& y) {
  if (y.size() != problem.dim) throw UsageError("jacobian_fd: wrong y length");
  const Eigen::VectorXd c0 = problem.constraint_of(y);
  Eigen::MatrixXd J(c0.size(), problem.dim);
  Eigen::VectorXd yp = y;
  for (int j = 0; j < problem.dim; ++j) {
    const double step = 1e-6 * (1.0 + std::abs(y(j)));
    yp(j) = y(j) + step;
    const Eigen::VectorXd c_plus = problem.constraint_of(yp);
    yp(j) = y(j) - step;
    const Eigen::VectorXd c_minus = problem.constraint_of(yp);
    yp(j) = y(j);
    J.col(j) = (c_plus - c_minus) / (2.0 * step);
  }
  return J;
}

Trajectory to_trajectory(const OcpSpec& spec, const Eigen::VectorXd& y) {
  const KnotLayout layout(spec);
  const auto knots = layout.unpack(y);
  Trajectory traj;
  traj.sampling = ControlSampling::kKnot;
  const double h = spec.step();
  for (int k = 0; k < layout.n_knots(); ++k) {
    traj.times.push_back(k == layout.n_knots() - 1 ? spec.t_final : k * h);
    traj.states.push_back(State::from_stacked(knots.states.row(k).transpose()));
    traj.controls.push_back(knots.controls.row(k).transpose());
  }
  return traj;
}

}  // namespace acrobot
