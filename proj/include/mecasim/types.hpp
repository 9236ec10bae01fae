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

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace mecasim {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Mat34 = Eigen::Matrix<double, 3, 4>;

/// Physical constants of the four-wheel mecanum platform.
///
/// Wheel columns follow the convention (front-left, front-right,
/// rear-left, rear-right); all code and tests depend only on this
/// ordering being used consistently.
struct RobotParams {
  double mass_M = 4.0;          // kg
  double gravity_g = 9.8;       // m/s^2
  double wheel_radius_R = 0.03; // m
  double stall_torque_Ts = 0.6; // N*m
  double half_length_la = 0.1;  // m, chassis center to wheel axle along X
  double half_width_lb = 0.1;   // m, chassis center to wheel axle along Y
  double wheel_inertia_J = 1e-3;// kg*m^2, only used by the transient model
  double omega_max = 10.0;      // rad/s, duty cycle 1.0 maps to this speed

  double lab() const { return half_length_la + half_width_lb; }

  void validate() const {
    auto positive = [](double v, const char* name) {
      if (!(v > 0.0) || !std::isfinite(v)) {
        throw std::invalid_argument(std::string("RobotParams: ") + name +
                                    " must be strictly positive");
      }
    };
    positive(mass_M, "mass_M");
    positive(gravity_g, "gravity_g");
    positive(wheel_radius_R, "wheel_radius_R");
    positive(stall_torque_Ts, "stall_torque_Ts");
    positive(half_length_la, "half_length_la");
    positive(half_width_lb, "half_width_lb");
    positive(wheel_inertia_J, "wheel_inertia_J");
    positive(omega_max, "omega_max");
  }
};

/// Per-wheel friction coefficients, the identification target.
/// The identification box is [0, 2] per wheel; the struct itself does not
/// enforce it so that finite-difference probes can step across bounds.
struct FrictionCoeffs {
  Vec4 mu = Vec4::Zero();

  FrictionCoeffs() = default;
  explicit FrictionCoeffs(const Vec4& m) : mu(m) {}
  FrictionCoeffs(double a, double b, double c, double d) : mu(a, b, c, d) {}

  bool inside_box(double lo = 0.0, double hi = 2.0) const {
    return (mu.array() >= lo).all() && (mu.array() <= hi).all();
  }
};

/// Planar pose. theta is kept unwrapped so integration stays continuous.
struct Pose {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;
};

struct BodyVelocity {
  double vx = 0.0;      // m/s, body X
  double vy = 0.0;      // m/s, body Y (forward for equal wheel speeds)
  double omega_z = 0.0; // rad/s
};

/// Piecewise-constant desired wheel speeds. `t` holds the interval
/// boundaries, so t.size() == omega_s.size() + 1.
struct ControlSchedule {
  std::vector<double> t;
  std::vector<Vec4> omega_s;

  int steps() const { return static_cast<int>(omega_s.size()); }
  double dt(int i) const { return t[i + 1] - t[i]; }
  double duration() const { return t.empty() ? 0.0 : t.back() - t.front(); }

  void validate() const {
    if (omega_s.empty() || t.size() != omega_s.size() + 1) {
      throw std::invalid_argument(
          "ControlSchedule: need len(t) == len(omega_s)+1 with at least one interval");
    }
    for (std::size_t i = 0; i + 1 < t.size(); ++i) {
      if (!(t[i + 1] > t[i])) {
        throw std::invalid_argument(
            "ControlSchedule: timestamps must be strictly increasing (at index " +
            std::to_string(i + 1) + ")");
      }
    }
    for (const Vec4& w : omega_s) {
      if (!w.allFinite()) {
        throw std::invalid_argument("ControlSchedule: non-finite wheel speed");
      }
    }
  }

  /// Uniform grid starting at t0 with one timestamp per interval boundary.
  static ControlSchedule uniform(double t0, double dt, std::vector<Vec4> controls) {
    ControlSchedule s;
    s.omega_s = std::move(controls);
    s.t.resize(s.omega_s.size() + 1);
    for (std::size_t i = 0; i < s.t.size(); ++i) s.t[i] = t0 + dt * static_cast<double>(i);
    return s;
  }
};

struct TimedPose {
  double t = 0.0;
  Pose pose;
};

/// Pose sequence at simulation rate.
struct Trajectory {
  std::vector<TimedPose> samples;

  void validate() const {
    for (std::size_t i = 0; i + 1 < samples.size(); ++i) {
      if (!(samples[i + 1].t > samples[i].t)) {
        throw std::invalid_argument("Trajectory: timestamps must be strictly increasing");
      }
    }
  }
};

/// Timestamped planar positions from the overhead tracking pipeline,
/// nominally 60 Hz. Heading is optional; when the recording lacks it the
/// start heading is estimated from the first two positions.
struct GtSample {
  double t = 0.0;
  double x = 0.0;
  double y = 0.0;
  std::optional<double> theta;
};

struct GroundTruthTrack {
  std::vector<GtSample> samples;

  int size() const { return static_cast<int>(samples.size()); }

  void validate() const {
    for (std::size_t i = 0; i + 1 < samples.size(); ++i) {
      if (!(samples[i + 1].t > samples[i].t)) {
        throw std::invalid_argument(
            "GroundTruthTrack: timestamps must be strictly increasing");
      }
    }
  }

  /// Start pose for simulation. Body +Y is the forward direction, so a
  /// heading estimated from the first chord assumes initial forward motion.
  Pose start_pose() const {
    if (samples.empty()) {
      throw std::invalid_argument("GroundTruthTrack: empty track has no start pose");
    }
    const GtSample& s0 = samples.front();
    Pose p{s0.x, s0.y, 0.0};
    if (s0.theta.has_value()) {
      p.theta = *s0.theta;
    } else if (samples.size() >= 2) {
      const GtSample& s1 = samples[1];
      p.theta = std::atan2(s1.y - s0.y, s1.x - s0.x) - M_PI / 2.0;
    }
    return p;
  }
};

/// Weights of the combined trajectory loss.
struct LossWeights {
  double spline_w1 = 0.8;
  double ground_truth_w2 = 0.2;

  void validate() const {
    if (spline_w1 < 0.0 || ground_truth_w2 < 0.0 || spline_w1 + ground_truth_w2 <= 0.0) {
      throw std::invalid_argument("LossWeights: need w1, w2 >= 0 and w1 + w2 > 0");
    }
  }
};

} // namespace mecasim
