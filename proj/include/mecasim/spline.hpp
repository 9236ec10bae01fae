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
#include <cmath>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "mecasim/types.hpp"

namespace mecasim {

/// Planar interpolating curve through recorded positions.
///
/// Natural cubic splines in x and y, parameterized by cumulative chord
/// length; with fewer than 4 distinct points the curve degrades to the
/// piecewise-linear interpolant. Closest-point queries scan a dense
/// pre-sampling of the curve (kSamplesPerSegment per segment, cached at fit
/// time) and refine the best bracket by golden-section search to 1e-9 in the
/// parameter, so the result is never worse than the best pre-sampled point.
/// Immutable after fit and safe to share across threads.
class SplinePath {
 public:
  static constexpr int kSamplesPerSegment = 50;
  static constexpr double kParamTol = 1e-9;

  /// Empty path; usable only after assignment from fit().
  SplinePath() = default;

  static SplinePath fit(const std::vector<Vec2>& points) {
    std::vector<Vec2> pts;
    pts.reserve(points.size());
    for (const Vec2& p : points) {
      if (pts.empty() || (p - pts.back()).norm() > 1e-12) pts.push_back(p);
    }
    if (pts.size() < 2) {
      throw std::invalid_argument("SplinePath: track too short");
    }
    SplinePath path;
    const int n = static_cast<int>(pts.size());
    path.knot_s_.resize(n);
    path.px_.resize(n);
    path.py_.resize(n);
    path.knot_s_[0] = 0.0;
    for (int i = 0; i < n; ++i) {
      path.px_[i] = pts[i].x();
      path.py_[i] = pts[i].y();
      if (i > 0) path.knot_s_[i] = path.knot_s_[i - 1] + (pts[i] - pts[i - 1]).norm();
    }
    if (n >= 4) {
      path.mx_ = natural_second_derivatives(path.knot_s_, path.px_);
      path.my_ = natural_second_derivatives(path.knot_s_, path.py_);
    } else {
      // Piecewise linear: zero curvature everywhere.
      path.mx_.assign(n, 0.0);
      path.my_.assign(n, 0.0);
    }
    path.presample();
    return path;
  }

  static SplinePath fit(const GroundTruthTrack& track) {
    std::vector<Vec2> pts;
    pts.reserve(track.samples.size());
    for (const GtSample& s : track.samples) pts.emplace_back(s.x, s.y);
    return fit(pts);
  }

  double length() const { return knot_s_.back(); }
  int segments() const { return static_cast<int>(knot_s_.size()) - 1; }

  Vec2 eval(double s) const {
    const int i = segment_index(s);
    const double h = knot_s_[i + 1] - knot_s_[i];
    const double a = (knot_s_[i + 1] - s) / h;
    const double b = (s - knot_s_[i]) / h;
    const double h2 = h * h / 6.0;
    const double cx = (a * a * a - a) * h2 * mx_[i] + (b * b * b - b) * h2 * mx_[i + 1];
    const double cy = (a * a * a - a) * h2 * my_[i] + (b * b * b - b) * h2 * my_[i + 1];
    return Vec2(a * px_[i] + b * px_[i + 1] + cx, a * py_[i] + b * py_[i + 1] + cy);
  }

  /// Point on the curve with minimal Euclidean distance to q.
  Vec2 closest_point(const Vec2& q) const {
    int best = 0;
    double best_d2 = std::numeric_limits<double>::infinity();
    const int m = static_cast<int>(sample_x_.size());
    for (int i = 0; i < m; ++i) {
      const double dx = sample_x_[i] - q.x();
      const double dy = sample_y_[i] - q.y();
      const double d2 = dx * dx + dy * dy;
      if (d2 < best_d2) {
        best_d2 = d2;
        best = i;
      }
    }
    const double lo = sample_s_[std::max(0, best - 1)];
    const double hi = sample_s_[std::min(m - 1, best + 1)];
    const Vec2 refined = eval(golden_section(q, lo, hi));
    // Never return a point worse than the best raw sample.
    if ((refined - q).squaredNorm() <= best_d2) return refined;
    return Vec2(sample_x_[best], sample_y_[best]);
  }

  double distance(const Vec2& q) const { return (closest_point(q) - q).norm(); }

 private:
  static std::vector<double> natural_second_derivatives(const std::vector<double>& s,
                                                        const std::vector<double>& v) {
    const int n = static_cast<int>(s.size());
    std::vector<double> m(n, 0.0);
    if (n < 3) return m;
    // Thomas algorithm on the interior tridiagonal system; natural ends m=0.
    const int k = n - 2;
    std::vector<double> diag(k), rhs(k), upper(k);
    for (int i = 0; i < k; ++i) {
      const double h0 = s[i + 1] - s[i];
      const double h1 = s[i + 2] - s[i + 1];
      diag[i] = 2.0 * (h0 + h1);
      upper[i] = h1;
      rhs[i] = 6.0 * ((v[i + 2] - v[i + 1]) / h1 - (v[i + 1] - v[i]) / h0);
    }
    for (int i = 1; i < k; ++i) {
      const double h0 = s[i + 1] - s[i];
      const double w = h0 / diag[i - 1];
      diag[i] -= w * upper[i - 1];
      rhs[i] -= w * rhs[i - 1];
    }
    m[k] = rhs[k - 1] / diag[k - 1];
    for (int i = k - 2; i >= 0; --i) {
      m[i + 1] = (rhs[i] - upper[i] * m[i + 2]) / diag[i];
    }
    return m;
  }

  int segment_index(double s) const {
    const auto it = std::upper_bound(knot_s_.begin(), knot_s_.end(), s);
    int i = static_cast<int>(it - knot_s_.begin()) - 1;
    return std::clamp(i, 0, segments() - 1);
  }

  void presample() {
    const int nseg = segments();
    sample_s_.clear();
    sample_s_.reserve(static_cast<std::size_t>(nseg) * kSamplesPerSegment + 1);
    for (int i = 0; i < nseg; ++i) {
      const double s0 = knot_s_[i];
      const double h = knot_s_[i + 1] - s0;
      for (int j = 0; j < kSamplesPerSegment; ++j) {
        sample_s_.push_back(s0 + h * static_cast<double>(j) / kSamplesPerSegment);
      }
    }
    sample_s_.push_back(knot_s_.back());
    const int m = static_cast<int>(sample_s_.size());
    sample_x_.resize(m);
    sample_y_.resize(m);
    for (int i = 0; i < m; ++i) {
      const Vec2 p = eval(sample_s_[i]);
      sample_x_[i] = p.x();
      sample_y_[i] = p.y();
    }
  }

  double golden_section(const Vec2& q, double lo, double hi) const {
    constexpr double invphi = 0.6180339887498949;
    double a = lo, b = hi;
    double x1 = b - invphi * (b - a);
    double x2 = a + invphi * (b - a);
    double f1 = (eval(x1) - q).squaredNorm();
    double f2 = (eval(x2) - q).squaredNorm();
    while (b - a > kParamTol) {
      if (f1 < f2) {
        b = x2;
        x2 = x1;
        f2 = f1;
        x1 = b - invphi * (b - a);
        f1 = (eval(x1) - q).squaredNorm();
      } else {
        a = x1;
        x1 = x2;
        f1 = f2;
        x2 = a + invphi * (b - a);
        f2 = (eval(x2) - q).squaredNorm();
      }
    }
    return 0.5 * (a + b);
  }

  std::vector<double> knot_s_, px_, py_, mx_, my_;
  std::vector<double> sample_s_;
  Eigen::VectorXd sample_x_, sample_y_;
};

} // namespace mecasim
