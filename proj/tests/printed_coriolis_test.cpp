// Entry-by-entry comparison of the closed-form Coriolis matrices written out
// for the 2- and 3-link acrobots against the Christoffel-symbol C. Each entry
// carries a match/mismatch annotation; the shipped 3-link C is Christoffel.
#include <array>
#include <cmath>
#include <string>

#include <gtest/gtest.h>

#include "acrobot/dynamics.hpp"
#include "oracles.hpp"

using namespace acrobot;

namespace {

constexpr double kTol = 1e-8;

struct Entry {
  int row;
  int col;
  bool matches;
};

// Closed-form 3-link C, entry by entry.
Eigen::Matrix3d printed_coriolis_3link(const LinkChainParams& p, const State& st) {
  const double m2 = p.masses[1], m3 = p.masses[2];
  const double l1 = p.lengths[0], l2 = p.lengths[1], l3 = p.lengths[2];
  const double d1 = st.qdot(0), d2 = st.qdot(1), d3 = st.qdot(2);
  const double s2 = std::sin(st.q(1)), s3 = std::sin(st.q(2));
  const double s23 = std::sin(st.q(1) + st.q(2));
  Eigen::Matrix3d C;
  C(0, 0) = 0.0;
  C(0, 1) = -(m2 + m3) * l1 * l2 * (2 * d1 + d2) * s2 -
            m3 * l1 * l3 * (2 * d1 + d2 + d3) * s23;
  C(0, 2) = -m3 * l1 * l3 * (2 * d1 + d2 + d3) * s23 -
            m3 * l2 * l3 * (2 * d1 + d2 + d3) * s3;
  C(1, 0) = -(m2 + m3) * l1 * l2 * d2 * s2 - m3 * l1 * l3 * (d2 + d3) * s23 +
            (m2 + m3) * l1 * l2 * (d1 + d2) * s2 + m3 * l1 * l3 * (d1 + d2 + d3) * s3;
  C(1, 1) = m3 * l1 * l3 * (d1 + d2 + d3) * s3;
  C(1, 2) = -m3 * l2 * l3 * (2 * d1 + 2 * d2 + d3) * s3;
  C(2, 0) = -m3 * l1 * l3 * (d2 + d3) * s23 + m3 * l1 * l3 * (d1 + d2 + d3) * s23 +
            m3 * l2 * l3 * (d1 + d2 + d3) * s3;
  C(2, 1) = m3 * l2 * l3 * (d1 + d2 + d3) * s3;
  C(2, 2) = -m3 * l2 * l3 * (d1 + d2) * s3;
  return C;
}

// True when the entry agrees within kTol at every sampled state.
template <typename Printed>
std::array<std::array<bool, 3>, 3> agreement(int n, Printed printed, int samples,
                                             Eigen::VectorXd* worst_product_gap) {
  std::array<std::array<bool, 3>, 3> ok{};
  for (auto& row : ok) row.fill(true);
  *worst_product_gap = Eigen::VectorXd::Zero(n);
  oracle::Sampler s(4242 + n);
  for (int t = 0; t < samples; ++t) {
    const auto p = s.params(n);
    const State st = s.state(n);
    const Eigen::MatrixXd Cp = printed(p, st);
    const Eigen::MatrixXd Cc = christoffel_coriolis(st.qdot, mass_matrix_partials(p, st.q));
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (std::abs(Cp(i, j) - Cc(i, j)) > kTol * std::max(1.0, std::abs(Cc(i, j))))
          ok[i][j] = false;
    const Eigen::VectorXd gap = ((Cp - Cc) * st.qdot).cwiseAbs();
    *worst_product_gap = worst_product_gap->cwiseMax(gap);
  }
  return ok;
}

}  // namespace

TEST(PrintedCoriolis, TwoLinkEntries) {
  const std::array<Entry, 4> expected{{
      {0, 0, false},  // printed 0; Christoffel -m2 l1 l2 s2 qd2
      {0, 1, false},  // printed (2 qd1 + qd2); Christoffel (qd1 + qd2)
      {1, 0, true},
      {1, 1, true},
  }};
  Eigen::VectorXd gap;
  const auto ok = agreement(
      2,
      [](const LinkChainParams& p, const State& st) {
        return manipulator_terms_2link(p, st).C;
      },
      500, &gap);
  for (const auto& e : expected) {
    EXPECT_EQ(ok[e.row][e.col], e.matches)
        << "C_" << e.row + 1 << e.col + 1 << " annotated "
        << (e.matches ? "match" : "mismatch");
  }
  // The product C qdot, which is all the dynamics use, agrees in both rows.
  EXPECT_LT(gap.maxCoeff(), 1e-9);
}

TEST(PrintedCoriolis, ThreeLinkEntries) {
  const std::array<Entry, 9> expected{{
      {0, 0, false},  // printed 0
      {0, 1, false},
      {0, 2, false},  // l2 l3 term (2qd1 + qd2 + qd3) instead of (2qd1 + 2qd2 + qd3)
      {1, 0, false},
      {1, 1, false},  // mixes l1 l3 with s3
      {1, 2, false},
      {2, 0, false},
      {2, 1, false},
      {2, 2, false},
  }};
  Eigen::VectorXd gap;
  const auto ok = agreement(3, printed_coriolis_3link, 500, &gap);
  for (const auto& e : expected) {
    EXPECT_EQ(ok[e.row][e.col], e.matches)
        << "C_" << e.row + 1 << e.col + 1 << " annotated "
        << (e.matches ? "match" : "mismatch");
  }
  // Only the third row of C qdot survives the mismatches.
  EXPECT_GT(gap(0), 1e-3);
  EXPECT_GT(gap(1), 1e-3);
  EXPECT_LT(gap(2), 1e-9);
}

TEST(PrintedCoriolis, ShippedThreeLinkCoriolisIsChristoffel) {
  oracle::Sampler s(77);
  for (int t = 0; t < 50; ++t) {
    const auto p = s.params(3);
    const State st = s.state(3);
    const Eigen::MatrixXd C = manipulator_terms_3link(p, st).C;
    const Eigen::MatrixXd ref =
        oracle::christoffel(oracle::fd_mass_partials(p, st.q), st.qdot);
    ASSERT_LT(oracle::rel_error(C, ref), 1e-6);
  }
}
