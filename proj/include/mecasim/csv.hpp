// Copyright 2026 The mecasim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "mecasim/model.hpp"
#include "mecasim/types.hpp"

namespace mecasim {

/// Parse failure with a 1-based line number, surfaced to the CLI as an
/// input error (exit code 2).
struct CsvError : std::runtime_error {
  CsvError(const std::string& file, int line, const std::string& what)
      : std::runtime_error(file + ":" + std::to_string(line) + ": " + what),
        line_number(line) {}
  int line_number;
};

namespace detail {

/// Shortest representation that round-trips a double exactly.
inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  double parsed = 0.0;
  std::sscanf(buf, "%lf", &parsed);
  if (parsed == v) {
    for (int prec = 1; prec < 17; ++prec) {
      char shorter[32];
      std::snprintf(shorter, sizeof(shorter), "%.*g", prec, v);
      std::sscanf(shorter, "%lf", &parsed);
      if (parsed == v) return shorter;
    }
  }
  return buf;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) {
    // trim spaces and a trailing CR from foreign files
    std::size_t b = field.find_first_not_of(" \t\r");
    std::size_t e = field.find_last_not_of(" \t\r");
    fields.push_back(b == std::string::npos ? "" : field.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

inline double parse_number(const std::string& token, const std::string& file, int line) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(token, &pos);
  } catch (const std::exception&) {
    throw CsvError(file, line, "expected a number, got '" + token + "'");
  }
  if (pos != token.size()) {
    throw CsvError(file, line, "trailing characters after number in '" + token + "'");
  }
  if (!std::isfinite(v)) {
    throw CsvError(file, line, "non-finite value '" + token + "'");
  }
  return v;
}

inline std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

} // namespace detail

/// Ground-truth CSV: header `t,x,y,theta` (theta optional), SI units.
inline GroundTruthTrack read_ground_truth_csv(const std::string& path) {
  const auto lines = detail::read_lines(path);
  if (lines.empty()) throw CsvError(path, 1, "empty file");
  const auto header = detail::split_csv_line(lines[0]);
  bool has_theta;
  if (header == std::vector<std::string>{"t", "x", "y", "theta"}) {
    has_theta = true;
  } else if (header == std::vector<std::string>{"t", "x", "y"}) {
    has_theta = false;
  } else {
    throw CsvError(path, 1, "expected header 't,x,y,theta' or 't,x,y'");
  }

  GroundTruthTrack track;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const int line_no = static_cast<int>(i) + 1;
    const auto fields = detail::split_csv_line(lines[i]);
    if (fields.size() != (has_theta ? 4u : 3u)) {
      throw CsvError(path, line_no, "wrong number of columns");
    }
    GtSample s;
    s.t = detail::parse_number(fields[0], path, line_no);
    s.x = detail::parse_number(fields[1], path, line_no);
    s.y = detail::parse_number(fields[2], path, line_no);
    if (has_theta) s.theta = detail::parse_number(fields[3], path, line_no);
    if (!track.samples.empty() && !(s.t > track.samples.back().t)) {
      throw CsvError(path, line_no, "timestamps must be strictly increasing");
    }
    track.samples.push_back(s);
  }
  if (track.samples.empty()) throw CsvError(path, 1, "no data rows");
  return track;
}

/// Control CSV: header `t,w1,w2,w3,w4` (wheel speeds, rad/s) or
/// `t,d1,d2,d3,d4` (duty cycles in [-1, 1], scaled by omega_max). The last
/// row closes the final interval; its command values are ignored.
inline ControlSchedule read_control_csv(const std::string& path, const RobotParams& params) {
  const auto lines = detail::read_lines(path);
  if (lines.empty()) throw CsvError(path, 1, "empty file");
  const auto header = detail::split_csv_line(lines[0]);
  bool duty;
  if (header == std::vector<std::string>{"t", "w1", "w2", "w3", "w4"}) {
    duty = false;
  } else if (header == std::vector<std::string>{"t", "d1", "d2", "d3", "d4"}) {
    duty = true;
  } else {
    throw CsvError(path, 1, "expected header 't,w1,w2,w3,w4' or 't,d1,d2,d3,d4'");
  }

  std::vector<double> times;
  std::vector<Vec4> commands;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const int line_no = static_cast<int>(i) + 1;
    const auto fields = detail::split_csv_line(lines[i]);
    if (fields.size() != 5u) throw CsvError(path, line_no, "wrong number of columns");
    const double t = detail::parse_number(fields[0], path, line_no);
    if (!times.empty() && !(t > times.back())) {
      throw CsvError(path, line_no, "timestamps must be strictly increasing");
    }
    Vec4 w;
    for (int j = 0; j < 4; ++j) {
      w[j] = detail::parse_number(fields[static_cast<std::size_t>(j) + 1], path, line_no);
      if (duty && std::abs(w[j]) > 1.0) {
        throw CsvError(path, line_no, "duty cycle outside [-1, 1]");
      }
    }
    times.push_back(t);
    commands.push_back(duty ? Vec4(duty_to_omega(params, w)) : w);
  }
  if (times.size() < 2) throw CsvError(path, 1, "need at least two rows");

  ControlSchedule schedule;
  schedule.t = std::move(times);
  commands.pop_back(); // the last row only closes the final interval
  schedule.omega_s = std::move(commands);
  schedule.validate();
  return schedule;
}

inline void write_trajectory_csv(const std::string& path, const Trajectory& traj) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << "t,x,y,theta\n";
  for (const TimedPose& s : traj.samples) {
    out << detail::format_double(s.t) << ',' << detail::format_double(s.pose.x) << ','
        << detail::format_double(s.pose.y) << ',' << detail::format_double(s.pose.theta)
        << '\n';
  }
}

inline Trajectory read_trajectory_csv(const std::string& path) {
  const GroundTruthTrack track = read_ground_truth_csv(path);
  Trajectory traj;
  traj.samples.reserve(track.samples.size());
  for (const GtSample& s : track.samples) {
    traj.samples.push_back({s.t, Pose{s.x, s.y, s.theta.value_or(0.0)}});
  }
  return traj;
}

inline void write_ground_truth_csv(const std::string& path, const GroundTruthTrack& track) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  const bool has_theta =
      !track.samples.empty() && track.samples.front().theta.has_value();
  out << (has_theta ? "t,x,y,theta\n" : "t,x,y\n");
  for (const GtSample& s : track.samples) {
    out << detail::format_double(s.t) << ',' << detail::format_double(s.x) << ','
        << detail::format_double(s.y);
    if (has_theta) out << ',' << detail::format_double(s.theta.value_or(0.0));
    out << '\n';
  }
}

inline void write_control_csv(const std::string& path, const ControlSchedule& schedule) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << "t,w1,w2,w3,w4\n";
  for (int i = 0; i < schedule.steps(); ++i) {
    const Vec4& w = schedule.omega_s[static_cast<std::size_t>(i)];
    out << detail::format_double(schedule.t[static_cast<std::size_t>(i)]);
    for (int j = 0; j < 4; ++j) out << ',' << detail::format_double(w[j]);
    out << '\n';
  }
  out << detail::format_double(schedule.t.back()) << ",0,0,0,0\n";
}

} // namespace mecasim
