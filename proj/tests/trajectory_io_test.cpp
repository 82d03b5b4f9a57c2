#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "acrobot/errors.hpp"
#include "acrobot/trajectory_io.hpp"
#include "oracles.hpp"

using namespace acrobot;

namespace {

Trajectory random_trajectory(oracle::Sampler& s, int n, int m, ControlSampling sampling,
                             std::size_t samples) {
  Trajectory t;
  t.sampling = sampling;
  double time = s.uniform(-1, 1);
  for (std::size_t k = 0; k < samples; ++k) {
    time += s.uniform(1e-9, 0.3);
    t.times.push_back(time);
    // Values spanning many magnitudes, including subnormal-adjacent ones.
    Eigen::VectorXd q = s.vector(n, -10, 10), qd = s.vector(n, -1e3, 1e3);
    q(0) *= std::pow(10.0, s.uniform(-300, 300));
    t.states.emplace_back(q, qd);
  }
  const std::size_t controls = sampling == ControlSampling::kKnot       ? samples
                               : sampling == ControlSampling::kInterval ? samples - 1
                                                                        : 0;
  for (std::size_t k = 0; k < controls; ++k) t.controls.push_back(s.vector(m, -20, 20));
  return t;
}

bool bitwise_equal(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

void expect_bitwise(const Trajectory& a, const Trajectory& b) {
  ASSERT_EQ(a.size(), b.size());
  ASSERT_EQ(a.sampling, b.sampling);
  ASSERT_EQ(a.controls.size(), b.controls.size());
  for (std::size_t k = 0; k < a.size(); ++k) {
    ASSERT_TRUE(bitwise_equal(a.times[k], b.times[k]));
    for (int i = 0; i < a.n_links(); ++i) {
      ASSERT_TRUE(bitwise_equal(a.states[k].q(i), b.states[k].q(i)));
      ASSERT_TRUE(bitwise_equal(a.states[k].qdot(i), b.states[k].qdot(i)));
    }
  }
  for (std::size_t k = 0; k < a.controls.size(); ++k)
    for (Eigen::Index i = 0; i < a.controls[k].size(); ++i)
      ASSERT_TRUE(bitwise_equal(a.controls[k](i), b.controls[k](i)));
}

Trajectory parse(const std::string& text) {
  std::istringstream in(text);
  return parse_trajectory_csv(in, "test.csv");
}

std::string parse_error(const std::string& text) {
  try {
    parse(text);
  } catch (const ParseError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(TrajectoryCsv, HeaderLayout) {
  Trajectory t;
  t.times = {0.0};
  t.states = {State::zero(3)};
  t.controls = {Eigen::VectorXd::Zero(2)};
  t.sampling = ControlSampling::kKnot;
  const std::string csv = format_trajectory_csv(t);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "t,q1,q2,q3,qd1,qd2,qd3,u1,u2");
}

TEST(TrajectoryCsv, RoundTripIsBitwise) {
  oracle::Sampler s(8);
  for (auto sampling : {ControlSampling::kNone, ControlSampling::kKnot, ControlSampling::kInterval}) {
    for (int n : {2, 3}) {
      const Trajectory t = random_trajectory(s, n, n - 1, sampling, 40);
      const Trajectory back = parse(format_trajectory_csv(t));
      expect_bitwise(t, back);
      EXPECT_EQ(format_trajectory_csv(back), format_trajectory_csv(t));
    }
  }
}

TEST(TrajectoryCsv, FileRoundTripThroughAtomicWrite) {
  oracle::Sampler s(9);
  const auto dir = std::filesystem::temp_directory_path() / "acrobot_io_test";
  std::filesystem::create_directories(dir);
  const auto path = dir / "traj.csv";
  const Trajectory t = random_trajectory(s, 2, 1, ControlSampling::kKnot, 25);
  write_trajectory_csv(path, t);
  expect_bitwise(t, read_trajectory_csv(path));
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    EXPECT_EQ(entry.path().filename(), "traj.csv");  // no temporary left behind
  }
  std::filesystem::remove_all(dir);
}

TEST(TrajectoryCsv, TruncatedRowNamesTheRow) {
  const std::string text =
      "t,q1,q2,qd1,qd2,u1\n"
      "0,0,0,0,0,1\n"
      "0.5,0,0,0,0,1\n"
      "1,0,0\n";
  const std::string msg = parse_error(text);
  EXPECT_NE(msg.find("test.csv: row 4"), std::string::npos) << msg;
  EXPECT_NE(msg.find("expected 6 columns"), std::string::npos) << msg;
}

TEST(TrajectoryCsv, MalformedInputsRejected) {
  EXPECT_NE(parse_error("time,q1,qd1\n0,0,0\n").find("row 1"), std::string::npos);
  EXPECT_NE(parse_error("t,q1,q2,qd1,qd2\n").find("no data rows"), std::string::npos);
  EXPECT_NE(parse_error("t,q1,q2,qd1,qd2\n0,0,abc,0,0\n").find("row 2"), std::string::npos);
  EXPECT_NE(parse_error("t,q1,q2,qd1,qd2\n1,0,0,0,0\n0,0,0,0,0\n").find("row"),
            std::string::npos);
  EXPECT_NE(parse_error("t,q1,q2,qd1,qd2,u1\n0,0,0,0,0,\n1,0,0,0,0,1\n").find("row 3"),
            std::string::npos);
  EXPECT_THROW(read_trajectory_csv("/nonexistent/trajectory.csv"), ParseError);
}

TEST(TrajectoryCsv, IntervalSamplingLeavesLastControlEmpty) {
  Trajectory t;
  t.times = {0.0, 1.0};
  t.states = {State::zero(2), State::zero(2)};
  t.controls = {Eigen::VectorXd::Constant(1, 2.5)};
  t.sampling = ControlSampling::kInterval;
  const std::string csv = format_trajectory_csv(t);
  EXPECT_EQ(csv, "t,q1,q2,qd1,qd2,u1\n0,0,0,0,0,2.5\n1,0,0,0,0,\n");
  EXPECT_EQ(parse(csv).sampling, ControlSampling::kInterval);
}
