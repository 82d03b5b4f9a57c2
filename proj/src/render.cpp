#include "acrobot/render.hpp"

#include <cmath>
#include <cstdio>
#include <numeric>

#include "acrobot/errors.hpp"
#include "acrobot/trajectory_io.hpp"

namespace acrobot {

namespace {

constexpr const char* kJointColors[] = {"red", "green", "blue"};
constexpr double kPixels = 400.0;

std::string fmt(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", value);
  return buf;
}

}  // namespace

std::vector<Eigen::Vector2d> joint_positions(const LinkChainParams& params,
                                             const Eigen::VectorXd& q) {
  if (q.size() != params.n_links()) {
    throw UsageError("joint_positions: q length does not match the model");
  }
  std::vector<Eigen::Vector2d> points{Eigen::Vector2d::Zero()};
  double theta = 0.0;
  for (int k = 0; k < params.n_links(); ++k) {
    theta += q(k);
    const double l = params.lengths[k];
    points.push_back(points.back() +
                     Eigen::Vector2d(l * std::sin(theta), -l * std::cos(theta)));
  }
  return points;
}

std::string render_svg(const LinkChainParams& params, const Eigen::VectorXd& q,
                       double time) {
  const auto points = joint_positions(params, q);
  const double reach =
      1.1 * std::accumulate(params.lengths.begin(), params.lengths.end(), 0.0);
  const double stroke = reach / 80.0;
  const double radius = reach / 40.0;

  // viewBox in world units with y flipped by the group transform.
  std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
                    fmt(kPixels) + "\" height=\"" + fmt(kPixels) +
                    "\" viewBox=\"" + fmt(-reach) + " " + fmt(-reach) + " " +
                    fmt(2 * reach) + " " + fmt(2 * reach) + "\">\n";
  svg += "<title>t = " + fmt(time) + " s</title>\n";
  svg += "<rect x=\"" + fmt(-reach) + "\" y=\"" + fmt(-reach) + "\" width=\"" +
         fmt(2 * reach) + "\" height=\"" + fmt(2 * reach) +
         "\" fill=\"white\"/>\n";
  svg += "<g transform=\"scale(1,-1)\">\n";
  for (std::size_t k = 0; k + 1 < points.size(); ++k) {
    svg += "<line x1=\"" + fmt(points[k].x()) + "\" y1=\"" +
           fmt(points[k].y()) + "\" x2=\"" + fmt(points[k + 1].x()) +
           "\" y2=\"" + fmt(points[k + 1].y()) +
           "\" stroke=\"black\" stroke-width=\"" + fmt(stroke) + "\"/>\n";
  }
  for (std::size_t k = 0; k < points.size(); ++k) {
    const bool joint = k + 1 < points.size();
    const char* color = joint ? kJointColors[k % 3] : "black";
    svg += "<circle cx=\"" + fmt(points[k].x()) + "\" cy=\"" +
           fmt(points[k].y()) + "\" r=\"" + fmt(joint ? radius : 0.6 * radius) +
           "\" fill=\"" + color + "\"/>\n";
  }
  svg += "</g>\n</svg>\n";
  return svg;
}

std::vector<std::size_t> frame_indices(std::size_t samples, int count) {
  if (count < 1) throw UsageError("render: frame count must be at least 1");
  if (samples == 0) throw UsageError("render: trajectory is empty");
  std::vector<std::size_t> indices;
  for (int i = 0; i < count; ++i) {
    const double w = count == 1 ? 0.0 : static_cast<double>(i) / (count - 1);
    indices.push_back(static_cast<std::size_t>(
        std::llround(w * static_cast<double>(samples - 1))));
  }
  return indices;
}

std::vector<std::filesystem::path> render_frames(
    const LinkChainParams& params, const Trajectory& traj,
    const std::filesystem::path& out_dir, int count) {
  const auto indices = frame_indices(traj.size(), count);
  if (traj.n_links() != params.n_links()) {
    throw UsageError("render: trajectory and model link counts differ");
  }
  std::filesystem::create_directories(out_dir);
  std::vector<std::filesystem::path> written;
  for (std::size_t f = 0; f < indices.size(); ++f) {
    char name[32];
    std::snprintf(name, sizeof name, "frame_%03zu.svg", f);
    const auto path = out_dir / name;
    const auto k = indices[f];
    write_file_atomic(path, render_svg(params, traj.states[k].q, traj.times[k]));
    written.push_back(path);
  }
  return written;
}

}  // namespace acrobot
