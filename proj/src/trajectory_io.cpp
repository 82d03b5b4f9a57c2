#include "acrobot/trajectory_io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include "acrobot/errors.hpp"

namespace acrobot {

namespace {

void append_number(std::string& out, double value) {
  char buf[32];
  const int len = std::snprintf(buf, sizeof buf, "%.17g", value);
  out.append(buf, static_cast<std::size_t>(len));
}

std::vector<std::string> split_commas(const std::string& line) {
  std::vector<std::string> cells;
  std::string::size_type start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    if (comma == std::string::npos) {
      cells.push_back(line.substr(start));
      return cells;
    }
    cells.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

[[noreturn]] void fail(const std::string& source, int line,
                       const std::string& what) {
  std::ostringstream msg;
  msg << source << ": row " << line << ": " << what;
  throw ParseError(msg.str());
}

double parse_number(const std::string& cell, const std::string& source,
                    int line, std::size_t column) {
  double value = 0.0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || cell.empty()) {
    fail(source, line,
         "column " + std::to_string(column + 1) + ": '" + cell +
             "' is not a number");
  }
  return value;
}

}  // namespace

std::string format_trajectory_csv(const Trajectory& traj) {
  traj.validate();
  const int n = traj.n_links();
  const int m = traj.has_controls() ? traj.n_controls() : 0;

  std::string out = "t";
  for (int i = 1; i <= n; ++i) out += ",q" + std::to_string(i);
  for (int i = 1; i <= n; ++i) out += ",qd" + std::to_string(i);
  for (int i = 1; i <= m; ++i) out += ",u" + std::to_string(i);
  out += '\n';

  for (std::size_t k = 0; k < traj.size(); ++k) {
    append_number(out, traj.times[k]);
    for (int i = 0; i < n; ++i) {
      out += ',';
      append_number(out, traj.states[k].q(i));
    }
    for (int i = 0; i < n; ++i) {
      out += ',';
      append_number(out, traj.states[k].qdot(i));
    }
    for (int i = 0; i < m; ++i) {
      out += ',';
      if (k < traj.controls.size()) append_number(out, traj.controls[k](i));
    }
    out += '\n';
  }
  return out;
}

Trajectory parse_trajectory_csv(std::istream& in, const std::string& source) {
  std::string line;
  if (!std::getline(in, line)) fail(source, 1, "missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split_commas(line);

  int n = 0;
  while (static_cast<std::size_t>(1 + n) < header.size() &&
         header[1 + n] == "q" + std::to_string(n + 1)) {
    ++n;
  }
  const std::size_t after_q = 1 + static_cast<std::size_t>(n);
  bool header_ok = header[0] == "t" && n > 0 &&
                   header.size() >= after_q + static_cast<std::size_t>(n);
  for (int i = 0; header_ok && i < n; ++i) {
    header_ok = header[after_q + i] == "qd" + std::to_string(i + 1);
  }
  const std::size_t after_qd = after_q + static_cast<std::size_t>(n);
  const int m = header_ok ? static_cast<int>(header.size() - after_qd) : 0;
  for (int i = 0; header_ok && i < m; ++i) {
    header_ok = header[after_qd + i] == "u" + std::to_string(i + 1);
  }
  if (!header_ok) {
    fail(source, 1, "expected header t,q1..qn,qd1..qdn[,u1..um], got '" +
                        line + "'");
  }

  Trajectory traj;
  traj.sampling = m > 0 ? ControlSampling::kKnot : ControlSampling::kNone;
  bool controls_ended = false;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (controls_ended) {
      fail(source, line_no, "row follows a row without controls");
    }
    const auto cells = split_commas(line);
    if (cells.size() != header.size()) {
      fail(source, line_no,
           "expected " + std::to_string(header.size()) + " columns, got " +
               std::to_string(cells.size()));
    }
    traj.times.push_back(parse_number(cells[0], source, line_no, 0));
    Eigen::VectorXd q(n), qd(n);
    for (int i = 0; i < n; ++i) {
      q(i) = parse_number(cells[1 + i], source, line_no, 1 + i);
      qd(i) = parse_number(cells[after_q + i], source, line_no, after_q + i);
    }
    traj.states.emplace_back(std::move(q), std::move(qd));

    if (m == 0) continue;
    bool all_empty = true;
    for (int i = 0; i < m; ++i) all_empty = all_empty && cells[after_qd + i].empty();
    if (all_empty) {
      controls_ended = true;
      continue;
    }
    Eigen::VectorXd u(m);
    for (int i = 0; i < m; ++i) {
      u(i) = parse_number(cells[after_qd + i], source, line_no, after_qd + i);
    }
    traj.controls.push_back(std::move(u));
  }
  if (traj.times.empty()) fail(source, line_no, "no data rows");
  if (controls_ended) traj.sampling = ControlSampling::kInterval;
  try {
    traj.validate();
  } catch (const UsageError& e) {
    fail(source, line_no, e.what());
  }
  return traj;
}

Trajectory read_trajectory_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open trajectory file " + path.string());
  return parse_trajectory_csv(in, path.string());
}

void write_file_atomic(const std::filesystem::path& path,
                       const std::string& contents) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw UsageError("cannot write " + tmp.string());
    out << contents;
    out.flush();
    if (!out) throw UsageError("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw UsageError("cannot rename " + tmp.string() + " to " + path.string() +
                     ": " + ec.message());
  }
}

void write_trajectory_csv(const std::filesystem::path& path,
                          const Trajectory& traj) {
  write_file_atomic(path, format_trajectory_csv(traj));
}

}  // namespace acrobot
