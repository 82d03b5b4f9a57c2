#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "acrobot/dynamics.hpp"
#include "acrobot/integrator.hpp"

namespace acrobot {

// Origin followed by the far end of each link; x right, y up.
std::vector<Eigen::Vector2d> joint_positions(const LinkChainParams& params,
                                             const Eigen::VectorXd& q);

/**
 * One SVG frame: links as line segments, joints as circles colored red (fixed
 * end), green, blue in order, link-end masses in black. The viewport spans
 * +-1.1 * sum(lengths) in both axes with y pointing up.
 */
std::string render_svg(const LinkChainParams& params, const Eigen::VectorXd& q,
                       double time);

// Sample indices of `count` frames spread evenly over `samples` rows,
// including both ends.
std::vector<std::size_t> frame_indices(std::size_t samples, int count);

// Writes frame_000.svg ... into out_dir; throws UsageError when count < 1.
std::vector<std::filesystem::path> render_frames(
    const LinkChainParams& params, const Trajectory& traj,
    const std::filesystem::path& out_dir, int count);

}  // namespace acrobot
