#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "acrobot/integrator.hpp"

namespace acrobot {

/**
 * Comma-separated table with header  t,q1..qn,qd1..qdn,u1..um  and values in
 * %.17g, so a write followed by a read reproduces every double bitwise.
 * Passive trajectories have no u columns. Interval-sampled controls leave the
 * u cells of the last row empty.
 */
std::string format_trajectory_csv(const Trajectory& traj);

// Throws ParseError naming the source and 1-based line on malformed input.
Trajectory parse_trajectory_csv(std::istream& in,
                                const std::string& source = "<stream>");

Trajectory read_trajectory_csv(const std::filesystem::path& path);

// Writes through a sibling temporary file and a rename.
void write_trajectory_csv(const std::filesystem::path& path,
                          const Trajectory& traj);

void write_file_atomic(const std::filesystem::path& path,
                       const std::string& contents);

}  // namespace acrobot
