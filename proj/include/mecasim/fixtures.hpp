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

#include <string>
#include <vector>

#include "mecasim/identify.hpp"
#include "mecasim/model.hpp"
#include "mecasim/types.hpp"

namespace mecasim {

/// Synthetic benchmark definitions. Real recordings are not shipped with the
/// repository; these stand-ins are produced by forward simulation with the
/// documented friction law below, so every expected value in the tests has a
/// regenerable ground truth (`mecasim make-fixtures`).

struct FixtureSpec {
  std::string name;
  Vec4 omega_s;       // constant command held for the whole recording
  double duration_s = 4.0;
  double control_hz = 60.0;
  int gt_stride = 4;  // ground-truth sample every gt_stride control steps
  double start_theta = 0.0;
};

/// Synthetic "terrain": friction depends smoothly on the commanded speed,
/// which is exactly the situation the speed-to-friction network is meant to
/// capture. Kept well inside the identification box.
inline Vec4 fixture_friction_law(const Vec4& omega_s) {
  Vec4 mu;
  for (int j = 0; j < 4; ++j) {
    mu[j] = 0.3 + 0.1 * j + 0.45 * std::min(1.0, std::abs(omega_s[j]) / 10.0);
  }
  return mu;
}

/// The eight constant-command recordings: one command vector per
/// trajectory, diverse enough to cover forward, reverse, strafe, spin and
/// mixed arcs.
inline std::vector<FixtureSpec> identification_fixtures() {
  return {
      {"traj1", Vec4(6.0, 6.0, 6.0, 6.0), 4.0, 60.0, 4, 0.0},
      {"traj2", Vec4(-5.0, -5.0, -5.0, -5.0), 4.0, 60.0, 4, 0.4},
      {"traj3", Vec4(-6.0, 6.0, -6.0, 6.0), 4.0, 60.0, 4, 0.8},
      {"traj4", Vec4(-4.0, 4.0, 4.0, -4.0), 4.0, 60.0, 4, 1.2},
      {"traj5", Vec4(7.0, 5.0, 7.0, 5.0), 4.0, 60.0, 4, 1.6},
      {"traj6", Vec4(3.0, 6.0, 3.0, 6.0), 4.0, 60.0, 4, 2.0},
      {"traj7", Vec4(5.0, -2.0, 6.0, -1.0), 4.0, 60.0, 4, 2.4},
      {"traj8", Vec4(-3.0, 7.0, 2.0, 4.0), 4.0, 60.0, 4, 2.8},
  };
}

/// Simulate a spec and subsample the trajectory into a ground-truth track.
/// The schedule runs one extra control interval past the last ground-truth
/// sample, mirroring a command stream that keeps going after the last
/// camera frame.
inline TrajectoryData make_fixture_data(const RobotParams& params, const Vec4& mu_star,
                                        const std::vector<Vec4>& controls_per_step,
                                        double control_hz, int gt_stride,
                                        const Pose& start) {
  const double dt = 1.0 / control_hz;
  TrajectoryData data;
  data.schedule = ControlSchedule::uniform(0.0, dt, controls_per_step);
  const Trajectory traj =
      simulate(params, FrictionCoeffs(mu_star), data.schedule, start);
  const int last_gt_step = ((data.schedule.steps() - 1) / gt_stride) * gt_stride;
  for (int i = 0; i <= last_gt_step; i += gt_stride) {
    const TimedPose& tp = traj.samples[static_cast<std::size_t>(i)];
    data.track.samples.push_back({tp.t, tp.pose.x, tp.pose.y, tp.pose.theta});
  }
  return data;
}

inline TrajectoryData make_fixture_data(const RobotParams& params, const FixtureSpec& spec) {
  const int n_steps = static_cast<int>(std::llround(spec.duration_s * spec.control_hz));
  const std::vector<Vec4> controls(static_cast<std::size_t>(n_steps), spec.omega_s);
  return make_fixture_data(params, fixture_friction_law(spec.omega_s), controls,
                           spec.control_hz, spec.gt_stride, Pose{0.0, 0.0, spec.start_theta});
}

/// Recovery fixture: four distinct command vectors held for a second each,
/// enough excitation to pin all four friction coefficients uniquely.
inline std::vector<Vec4> recovery_control_steps(double control_hz,
                                                double block_seconds = 1.0,
                                                int blocks = 4) {
  const std::vector<Vec4> patterns = {
      Vec4(6.0, 6.0, 6.0, 6.0),
      Vec4(-6.0, 6.0, -6.0, 6.0),
      Vec4(5.0, -5.0, -5.0, 5.0),
      Vec4(7.0, 4.0, 6.0, 3.0),
  };
  const int per_block = static_cast<int>(std::llround(block_seconds * control_hz));
  std::vector<Vec4> steps;
  steps.reserve(static_cast<std::size_t>(per_block * blocks));
  for (int b = 0; b < blocks; ++b) {
    for (int i = 0; i < per_block; ++i) {
      steps.push_back(patterns[static_cast<std::size_t>(b) % patterns.size()]);
    }
  }
  return steps;
}

inline TrajectoryData make_recovery_fixture(const RobotParams& params, const Vec4& mu_star,
                                            double control_hz = 60.0, int gt_stride = 4) {
  return make_fixture_data(params, mu_star, recovery_control_steps(control_hz),
                           control_hz, gt_stride, Pose{0.0, 0.0, 0.0});
}

/// Sweep fixture: the same four patterns cycled every 0.4 s, so even a 40%
/// prefix of the recording has seen all of them.
inline TrajectoryData make_sweep_fixture(const RobotParams& params, const Vec4& mu_star,
                                         double control_hz = 60.0, int gt_stride = 4) {
  return make_fixture_data(params, mu_star,
                           recovery_control_steps(control_hz, 0.4, 10), control_hz,
                           gt_stride, Pose{0.0, 0.0, 0.0});
}

} // namespace mecasim
