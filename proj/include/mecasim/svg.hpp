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

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "mecasim/types.hpp"

namespace mecasim {

/// Minimal plot writer: one polyline per path series, world coordinates
/// mapped into a fixed canvas with the Y axis flipped. No plotting
/// dependency, byte-deterministic output.
class SvgPlot {
 public:
  void add_series(std::string name, std::string color, std::vector<Vec2> points) {
    series_.push_back({std::move(name), std::move(color), std::move(points)});
  }

  void add_trajectory(std::string name, std::string color, const Trajectory& traj) {
    std::vector<Vec2> pts;
    pts.reserve(traj.samples.size());
    for (const TimedPose& s : traj.samples) pts.emplace_back(s.pose.x, s.pose.y);
    add_series(std::move(name), std::move(color), std::move(pts));
  }

  void add_track(std::string name, std::string color, const GroundTruthTrack& track) {
    std::vector<Vec2> pts;
    pts.reserve(track.samples.size());
    for (const GtSample& s : track.samples) pts.emplace_back(s.x, s.y);
    add_series(std::move(name), std::move(color), std::move(pts));
  }

  void write(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << render();
  }

  std::string render() const {
    double lo_x = std::numeric_limits<double>::infinity(), lo_y = lo_x;
    double hi_x = -lo_x, hi_y = -lo_y;
    for (const Series& s : series_) {
      for (const Vec2& p : s.points) {
        lo_x = std::min(lo_x, p.x());
        hi_x = std::max(hi_x, p.x());
        lo_y = std::min(lo_y, p.y());
        hi_y = std::max(hi_y, p.y());
      }
    }
    if (!(hi_x >= lo_x)) { lo_x = -1.0; hi_x = 1.0; lo_y = -1.0; hi_y = 1.0; }
    const double span = std::max({hi_x - lo_x, hi_y - lo_y, 1e-9});
    const double margin = 0.08 * span;
    lo_x -= margin; lo_y -= margin;
    const double scale = kCanvas / (span + 2.0 * margin);

    const auto sx = [&](double x) { return (x - lo_x) * scale; };
    const auto sy = [&](double y) { return kCanvas - (y - lo_y) * scale; };

    std::string svg;
    svg += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"640\" "
           "viewBox=\"0 0 " + fmt(kCanvas) + " " + fmt(kCanvas) + "\">\n";
    svg += "  <rect x=\"0\" y=\"0\" width=\"" + fmt(kCanvas) + "\" height=\"" +
           fmt(kCanvas) + "\" fill=\"white\" stroke=\"#cccccc\"/>\n";
    double legend_y = 18.0;
    for (const Series& s : series_) {
      svg += "  <polyline fill=\"none\" stroke=\"" + s.color +
             "\" stroke-width=\"1.5\" points=\"";
      for (std::size_t i = 0; i < s.points.size(); ++i) {
        if (i > 0) svg += ' ';
        svg += fmt(sx(s.points[i].x())) + "," + fmt(sy(s.points[i].y()));
      }
      svg += "\"/>\n";
      svg += "  <text x=\"10\" y=\"" + fmt(legend_y) + "\" font-size=\"12\" fill=\"" +
             s.color + "\">" + escape(s.name) + "</text>\n";
      legend_y += 16.0;
    }
    svg += "</svg>\n";
    return svg;
  }

 private:
  struct Series {
    std::string name;
    std::string color;
    std::vector<Vec2> points;
  };

  static constexpr double kCanvas = 640.0;

  static std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3f", v);
    return buf;
  }

  static std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
      switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        default: out += c;
      }
    }
    return out;
  }

  std::vector<Series> series_;
};

} // namespace mecasim
