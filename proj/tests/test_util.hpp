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
#include <functional>
#include <random>
#include <vector>

#include "mecasim/identify.hpp"
#include "mecasim/model.hpp"
#include "mecasim/types.hpp"

namespace mecasim::testing {

/// Independent single-purpose forward integrator: plain loops, no shared
/// code with simulate(), used as the oracle it is checked against.
inline Trajectory reference_simulate(const RobotParams& p, const Vec4& mu,
                                     const ControlSchedule& schedule, const Pose& start) {
  const double lab = p.half_length_la + p.half_width_lb;
  const double k = p.wheel_radius_R / (4.0 * lab);
  const double c0 = p.mass_M * p.gravity_g * p.wheel_radius_R / (4.0 * p.stall_torque_Ts);

  Trajectory traj;
  double x = start.x, y = start.y, th = start.theta;
  traj.samples.push_back({schedule.t[0], Pose{x, y, th}});
  for (std::size_t i = 0; i + 1 < schedule.t.size(); ++i) {
    double w[4];
    for (int j = 0; j < 4; ++j) {
      double f = 1.0 - mu[j] * c0;
      if (f < 0.0) f = 0.0;
      w[j] = schedule.omega_s[i][j] * f;
    }
    const double vx = k * (-lab * w[0] + lab * w[1] - lab * w[2] + lab * w[3]);
    const double vy = k * (lab * w[0] + lab * w[1] + lab * w[2] + lab * w[3]);
    const double wz = k * (w[0] - w[1] - w[2] + w[3]);
    const double dt = schedule.t[i + 1] - schedule.t[i];
    const double c = std::cos(th), s = std::sin(th);
    x += dt * (vx * c - vy * s);
    y += dt * (vx * s + vy * c);
    th += dt * wz;
    traj.samples.push_back({schedule.t[i + 1], Pose{x, y, th}});
  }
  return traj;
}

inline GroundTruthTrack subsample_to_track(const Trajectory& traj, int stride) {
  GroundTruthTrack track;
  const int n = static_cast<int>(traj.samples.size());
  const int last = ((n - 2) / stride) * stride; // never the final timestamp
  for (int i = 0; i <= last; i += stride) {
    const TimedPose& tp = traj.samples[static_cast<std::size_t>(i)];
    track.samples.push_back({tp.t, tp.pose.x, tp.pose.y, tp.pose.theta});
  }
  return track;
}

/// Random piecewise-constant schedule with a few command changes; short and
/// gentle enough that trajectories do not self-approach.
inline ControlSchedule random_schedule(std::mt19937_64& rng, double duration = 1.5,
                                       double hz = 80.0, int blocks = 3,
                                       double amplitude = 8.0) {
  std::uniform_real_distribution<double> u(-amplitude, amplitude);
  const int n = static_cast<int>(std::llround(duration * hz));
  std::vector<Vec4> controls;
  controls.reserve(static_cast<std::size_t>(n));
  const int per_block = (n + blocks - 1) / blocks;
  Vec4 current = Vec4::Zero();
  for (int i = 0; i < n; ++i) {
    if (i % per_block == 0) current = Vec4(u(rng), u(rng), u(rng), u(rng));
    controls.push_back(current);
  }
  return ControlSchedule::uniform(0.0, 1.0 / hz, controls);
}

inline Vec4 random_mu(std::mt19937_64& rng, double lo = 0.1, double hi = 1.9) {
  std::uniform_real_distribution<double> u(lo, hi);
  return Vec4(u(rng), u(rng), u(rng), u(rng));
}

/// A random identification problem whose track was generated by a different
/// friction vector, so distances are bounded away from zero.
inline IdentificationProblem random_problem(std::mt19937_64& rng, int gt_stride = 4) {
  IdentificationProblem problem;
  problem.params = RobotParams{};
  const ControlSchedule schedule = random_schedule(rng);
  const Vec4 mu_track = random_mu(rng);
  const Trajectory traj =
      simulate(problem.params, FrictionCoeffs(mu_track), schedule, Pose{});
  problem.trajectories.push_back({schedule, subsample_to_track(traj, gt_stride)});
  return problem;
}

inline Pose apply_rigid(const Pose& p, double dx, double dy, double rot) {
  const double c = std::cos(rot), s = std::sin(rot);
  return Pose{c * p.x - s * p.y + dx, s * p.x + c * p.y + dy, p.theta + rot};
}

inline GroundTruthTrack apply_rigid(const GroundTruthTrack& track, double dx, double dy,
                                    double rot) {
  const double c = std::cos(rot), s = std::sin(rot);
  GroundTruthTrack out;
  for (const GtSample& g : track.samples) {
    GtSample t = g;
    t.x = c * g.x - s * g.y + dx;
    t.y = s * g.x + c * g.y + dy;
    if (g.theta.has_value()) t.theta = *g.theta + rot;
    out.samples.push_back(t);
  }
  return out;
}

inline Eigen::VectorXd finite_difference(const std::function<double(const Eigen::VectorXd&)>& f,
                                         const Eigen::VectorXd& x, double h = 1e-6) {
  Eigen::VectorXd g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Eigen::VectorXd xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    g[i] = (f(xp) - f(xm)) / (2.0 * h);
  }
  return g;
}

} // namespace mecasim::testing
