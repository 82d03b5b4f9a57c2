#include <cmath>

#include <gtest/gtest.h>

#include "acrobot/errors.hpp"
#include "acrobot/transcription.hpp"
#include "oracles.hpp"

using namespace acrobot;

namespace {

OcpSpec small_spec(int n_links, int n_knots, CollocationScheme scheme) {
  OcpSpec spec = OcpSpec::swing_up(LinkChainParams::acrobot(n_links));
  spec.n_knots = n_knots;
  spec.t_final = 0.6;
  spec.scheme = scheme;
  return spec;
}

// Knots generated by the discrete recurrence of the scheme itself; the
// trapezoid step is solved by fixed-point iteration.
Eigen::VectorXd recurrence_trajectory(const OcpSpec& spec, oracle::Sampler& s) {
  const KnotLayout layout(spec);
  const int N = spec.n_knots, ns = layout.n_states(), nu = layout.n_controls();
  const double h = spec.step();
  Eigen::MatrixXd X(N, ns), U(N, nu);
  for (int k = 0; k < N; ++k) U.row(k) = s.vector(nu, -3, 3).transpose();
  X.row(0) = s.vector(ns, -1, 1).transpose();
  const auto f = [&](const Eigen::VectorXd& x, int k) {
    return state_derivative(spec.params, State::from_stacked(x), U.row(k).transpose());
  };
  for (int k = 0; k + 1 < N; ++k) {
    const Eigen::VectorXd xk = X.row(k).transpose();
    const Eigen::VectorXd fk = f(xk, k);
    Eigen::VectorXd next = xk + h * fk;
    if (spec.scheme == CollocationScheme::kTrapezoid) {
      for (int it = 0; it < 200; ++it) {
        const Eigen::VectorXd update = xk + 0.5 * h * (fk + f(next, k + 1));
        const double change = (update - next).cwiseAbs().maxCoeff();
        next = update;
        if (change == 0.0) break;
      }
    }
    X.row(k + 1) = next.transpose();
  }
  return layout.pack(X, U);
}

// Smooth state and control curves sampled at the knots.
Eigen::VectorXd smooth_knots(const OcpSpec& spec) {
  const KnotLayout layout(spec);
  Eigen::MatrixXd X(spec.n_knots, layout.n_states()), U(spec.n_knots, layout.n_controls());
  for (int k = 0; k < spec.n_knots; ++k) {
    const double t = k * spec.step();
    for (int i = 0; i < layout.n_states(); ++i) X(k, i) = std::sin(1.3 * t + 0.7 * i);
    for (int i = 0; i < layout.n_controls(); ++i) U(k, i) = std::cos(2.1 * t + i);
  }
  return layout.pack(X, U);
}

}  // namespace

TEST(KnotLayout, PackInterleavesStatesAndControls) {
  const KnotLayout layout(2, 2, 1);
  Eigen::MatrixXd S{{1, 2}, {3, 4}};
  Eigen::MatrixXd U{{5}, {6}};
  Eigen::VectorXd expected(6);
  expected << 1, 2, 5, 3, 4, 6;
  EXPECT_EQ(layout.pack(S, U), expected);
}

TEST(KnotLayout, RoundTripIsExact) {
  oracle::Sampler s(1);
  for (const auto& [N, ns, nu] : {std::tuple{3, 4, 1}, {25, 4, 1}, {7, 6, 2}, {4, 2, 0}}) {
    const KnotLayout layout(N, ns, nu);
    Eigen::MatrixXd S(N, ns), U(N, nu);
    for (int k = 0; k < N; ++k) {
      S.row(k) = s.vector(ns, -9, 9).transpose();
      if (nu > 0) U.row(k) = s.vector(nu, -9, 9).transpose();
    }
    const Eigen::VectorXd y = layout.pack(S, U);
    ASSERT_EQ(y.size(), layout.dim());
    const auto back = layout.unpack(y);
    EXPECT_EQ(back.states, S);
    EXPECT_EQ(back.controls, U);
    EXPECT_EQ(layout.pack(back.states, back.controls), y);
  }
}

TEST(KnotLayout, DimensionOfDefaultTwoLinkProblem) {
  const OcpSpec spec = OcpSpec::swing_up(LinkChainParams::acrobot(2));
  EXPECT_EQ(KnotLayout(spec).dim(), 125);
  EXPECT_THROW(KnotLayout(2, 2, 1).unpack(Eigen::VectorXd::Zero(5)), UsageError);
  EXPECT_THROW(KnotLayout(2, 2, 1).pack(Eigen::MatrixXd::Zero(3, 2), Eigen::MatrixXd::Zero(2, 1)),
               UsageError);
}

TEST(OcpSpec, ValidationRejectsBadInput) {
  OcpSpec spec = OcpSpec::swing_up(LinkChainParams::acrobot(2));
  EXPECT_NO_THROW(spec.validate());
  spec.t_final = 0.0;
  EXPECT_THROW(spec.validate(), UsageError);
  spec = OcpSpec::swing_up(LinkChainParams::acrobot(2));
  spec.n_knots = 2;
  EXPECT_THROW(spec.validate(), UsageError);
  spec = OcpSpec::swing_up(LinkChainParams::acrobot(2));
  spec.x_final(0) = 10.0;
  EXPECT_THROW(spec.validate(), UsageError);
  spec = OcpSpec::swing_up(LinkChainParams::acrobot(2));
  spec.u_min(0) = 30.0;
  EXPECT_THROW(spec.validate(), UsageError);
}

TEST(Defects, VanishOnRecurrenceTrajectories) {
  oracle::Sampler s(2);
  for (int n : {2, 3}) {
    for (auto scheme : {CollocationScheme::kEuler, CollocationScheme::kTrapezoid}) {
      const OcpSpec spec = small_spec(n, 8, scheme);
      const Eigen::VectorXd y = recurrence_trajectory(spec, s);
      const Eigen::VectorXd z = defects(spec, y);
      ASSERT_EQ(z.size(), 7 * 2 * n);
      EXPECT_LT(z.cwiseAbs().maxCoeff(), 1e-12) << "links " << n;
    }
  }
}

TEST(Defects, EquilibriumIsFeasibleUnderBothSchemes) {
  for (auto scheme : {CollocationScheme::kEuler, CollocationScheme::kTrapezoid}) {
    OcpSpec spec = small_spec(2, 5, scheme);
    const KnotLayout layout(spec);
    Eigen::MatrixXd S = Eigen::MatrixXd::Zero(5, 4);
    S.col(0).setConstant(M_PI);
    const Eigen::VectorXd y = layout.pack(S, Eigen::MatrixXd::Zero(5, 1));
    EXPECT_LT(defects(spec, y).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Defects, EulerAndTrapezoidDifferAtSecondOrder) {
  std::vector<double> log_h, log_gap;
  for (int N : {11, 21, 41, 81, 161}) {
    OcpSpec euler = small_spec(2, N, CollocationScheme::kEuler);
    euler.t_final = 1.0;
    OcpSpec trap = euler;
    trap.scheme = CollocationScheme::kTrapezoid;
    const Eigen::VectorXd y = smooth_knots(euler);
    log_h.push_back(std::log(euler.step()));
    log_gap.push_back(
        std::log((defects(euler, y) - defects(trap, y)).cwiseAbs().maxCoeff()));
  }
  const double n = static_cast<double>(log_h.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < log_h.size(); ++i) {
    sx += log_h[i];
    sy += log_gap[i];
    sxx += log_h[i] * log_h[i];
    sxy += log_h[i] * log_gap[i];
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  EXPECT_GE(slope, 1.9);
}

TEST(EffortCost, ConstantAndLinearControls) {
  OcpSpec spec = small_spec(2, 11, CollocationScheme::kTrapezoid);
  spec.t_final = 1.0;
  const KnotLayout layout(spec);
  const Eigen::MatrixXd S = Eigen::MatrixXd::Zero(11, 4);
  EXPECT_EQ(effort_cost(spec, layout.pack(S, Eigen::MatrixXd::Zero(11, 1))), 0.0);
  EXPECT_EQ(effort_cost(spec, layout.pack(S, Eigen::MatrixXd::Ones(11, 1))), 1.0);

  spec.n_knots = 101;
  const KnotLayout fine(spec);
  Eigen::MatrixXd U(101, 1);
  for (int k = 0; k < 101; ++k) U(k, 0) = k / 100.0;
  const double J = effort_cost(spec, fine.pack(Eigen::MatrixXd::Zero(101, 4), U));
  EXPECT_NEAR(J, 0.33335, 5e-5);
}

TEST(EffortCost, GradientAndHessianMatchDifferences) {
  oracle::Sampler s(3);
  const OcpSpec spec = small_spec(3, 5, CollocationScheme::kTrapezoid);
  const Eigen::VectorXd y = s.vector(KnotLayout(spec).dim(), -2, 2);
  EXPECT_GT(effort_cost(spec, y), 0.0);
  const Eigen::VectorXd g = effort_cost_gradient(spec, y);
  const Eigen::VectorXd ref =
      oracle::fd_gradient([&](const Eigen::VectorXd& v) { return effort_cost(spec, v); }, y);
  EXPECT_LT(oracle::rel_error(g, ref), 1e-7);
  const Eigen::MatrixXd H = effort_cost_hessian(spec);
  EXPECT_LT((H * y - g).norm(), 1e-12 * (1 + g.norm()));
}

TEST(Boundary, ZeroWhenEndsMatch) {
  const OcpSpec spec = OcpSpec::swing_up(LinkChainParams::acrobot(3));
  const Eigen::VectorXd y = initial_guess(spec);
  const Eigen::VectorXd psi = boundary_constraints(spec, y);
  ASSERT_EQ(psi.size(), 12);
  EXPECT_EQ(psi, Eigen::VectorXd::Zero(12));
  Eigen::VectorXd target = Eigen::VectorXd::Zero(6);
  target(0) = M_PI;
  EXPECT_EQ(spec.x_final, target);
  EXPECT_EQ(spec.x_init, Eigen::VectorXd::Zero(6));
}

TEST(BuildNlp, TwoLinkDefaultsShape) {
  const OcpSpec spec = OcpSpec::swing_up(LinkChainParams::acrobot(2));
  const NlpProblem p = build_nlp(spec);
  EXPECT_EQ(p.dim, 125);
  EXPECT_EQ(p.n_constraints(), 24 * 4 + 8);
  EXPECT_EQ(p.c_lower, Eigen::VectorXd::Zero(104));
  EXPECT_EQ(p.c_upper, Eigen::VectorXd::Zero(104));
  const KnotLayout layout(spec);
  EXPECT_EQ(layout.state(p.y_guess, 0), spec.x_init);
  EXPECT_EQ(layout.state(p.y_guess, 24), spec.x_final);
  EXPECT_EQ(layout.state(p.y_guess, 12), 0.5 * (spec.x_init + spec.x_final));
  EXPECT_EQ(layout.control(p.y_guess, 7), Eigen::VectorXd::Zero(1));
  EXPECT_TRUE((p.y_guess.array() >= p.y_lower.array()).all());
  EXPECT_TRUE((p.y_guess.array() <= p.y_upper.array()).all());
  EXPECT_EQ(layout.control(p.y_upper, 3)(0), 20.0);
  EXPECT_EQ(layout.state(p.y_upper, 3)(3), 4 * M_PI);
  EXPECT_NO_THROW(p.validate());
}

TEST(BuildNlp, ThreeLinkDropsFirstTorque) {
  const NlpProblem p = build_nlp(OcpSpec::swing_up(LinkChainParams::acrobot(3)));
  EXPECT_EQ(p.dim, 25 * (6 + 2));
}

TEST(Jacobian, LinearConstraintIsExact) {
  oracle::Sampler s(4);
  Eigen::MatrixXd A(3, 5);
  for (int i = 0; i < 3; ++i) A.row(i) = s.vector(5, -1, 1).transpose();
  NlpProblem p;
  p.dim = 5;
  p.constraint_of = [A](const Eigen::VectorXd& y) { return Eigen::VectorXd(A * y); };
  EXPECT_LT((constraint_jacobian_fd(p, s.vector(5, -3, 3)) - A).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Jacobian, AnalyticAndFiniteDifferenceMatchDenseOracle) {
  oracle::Sampler s(5);
  for (int n : {2, 3}) {
    for (auto scheme : {CollocationScheme::kEuler, CollocationScheme::kTrapezoid}) {
      const OcpSpec spec = small_spec(n, 4, scheme);
      const NlpProblem p = build_nlp(spec);
      for (int trial = 0; trial < 5; ++trial) {
        const Eigen::VectorXd y = s.vector(p.dim, -2, 2);
        const Eigen::MatrixXd ref = oracle::dense_jacobian(p.constraint_of, y);
        EXPECT_LT(oracle::rel_error(p.constraint_jacobian_of(y), ref), 1e-6);
        EXPECT_LT(oracle::rel_error(constraint_jacobian_fd(p, y), ref), 1e-6);
      }
    }
  }
}

TEST(Jacobian, DefectRowsTouchOnlyAdjacentKnots) {
  oracle::Sampler s(6);
  const OcpSpec spec = small_spec(2, 6, CollocationScheme::kTrapezoid);
  const NlpProblem p = build_nlp(spec);
  const KnotLayout layout(spec);
  const Eigen::VectorXd y = s.vector(p.dim, -2, 2);
  const Eigen::MatrixXd J = constraint_jacobian_fd(p, y);
  for (int k = 0; k + 1 < spec.n_knots; ++k) {
    for (int knot = 0; knot < spec.n_knots; ++knot) {
      if (knot == k || knot == k + 1) continue;
      EXPECT_EQ(J.block(4 * k, knot * layout.stride(), 4, layout.stride()).norm(), 0.0);
    }
  }
}

TEST(Curvature, MatchesDifferencesOfWeightedJacobian) {
  oracle::Sampler s(7);
  for (int n : {2, 3}) {
    for (auto scheme : {CollocationScheme::kEuler, CollocationScheme::kTrapezoid}) {
      const OcpSpec spec = small_spec(n, 4, scheme);
      const NlpProblem p = build_nlp(spec);
      const Eigen::VectorXd y = s.vector(p.dim, -1, 1);
      const Eigen::VectorXd w = s.vector(p.n_constraints(), -1, 1);
      const Eigen::MatrixXd H = collocation_curvature(spec, y, w);
      const Eigen::MatrixXd ref = oracle::dense_jacobian(
          [&](const Eigen::VectorXd& v) {
            return Eigen::VectorXd(p.constraint_jacobian_of(v).transpose() * w);
          },
          y);
      EXPECT_LT(oracle::rel_error(H, 0.5 * (ref + ref.transpose())), 1e-5);
      EXPECT_EQ((H - H.transpose()).norm(), 0.0);
    }
  }
}

TEST(ToTrajectory, KnotTimesAndSampling) {
  const OcpSpec spec = OcpSpec::swing_up(LinkChainParams::acrobot(2));
  const Trajectory t = to_trajectory(spec, initial_guess(spec));
  ASSERT_EQ(t.size(), 25u);
  EXPECT_EQ(t.times.front(), 0.0);
  EXPECT_EQ(t.times.back(), 3.0);
  EXPECT_EQ(t.sampling, ControlSampling::kKnot);
  EXPECT_NO_THROW(t.validate());
}
