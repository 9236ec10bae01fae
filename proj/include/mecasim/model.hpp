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
#include <stdexcept>

#include "mecasim/types.hpp"

namespace mecasim {

/// Friction load per wheel relative to stall torque: mu_j * M * g * R / (4 * Ts).
inline double friction_load_per_mu(const RobotParams& p) {
  return p.mass_M * p.gravity_g * p.wheel_radius_R / (4.0 * p.stall_torque_Ts);
}

/// Steady-state wheel speeds under Coulomb friction,
/// omega_j = omega_s_j * (1 - mu_j * M * g * R / (4 * Ts)), elementwise.
///
/// The speed-reduction factor is floored at zero: friction can stop a wheel
/// but cannot spin it against its commanded direction. Inside the mu box
/// [0, 2] the floor is inactive at the default constants, which is what the
/// gradient code relies on when it differentiates the unfloored expression.
inline Vec4 steady_state_omega(const RobotParams& p, const FrictionCoeffs& mu,
                               const Vec4& omega_s) {
  const double c0 = friction_load_per_mu(p);
  const Vec4 factor = (1.0 - mu.mu.array() * c0).max(0.0).matrix();
  return omega_s.cwiseProduct(factor);
}

/// Transient wheel speed from rest,
/// omega(t) = omega_s * (1 - mu M g R / (4 Ts)) * (1 - exp(-Ts t / (J omega_s))).
///
/// Reference model only; the identification pipeline uses the steady state.
inline double transient_omega(const RobotParams& p, double mu_j, double omega_s_j,
                              double t) {
  if (omega_s_j == 0.0) {
    throw std::invalid_argument("transient_omega: omega_s must be nonzero");
  }
  if (t < 0.0) {
    throw std::invalid_argument("transient_omega: t must be nonnegative");
  }
  const double steady = omega_s_j * (1.0 - mu_j * friction_load_per_mu(p));
  return steady * (1.0 - std::exp(-p.stall_torque_Ts * t / (p.wheel_inertia_J * omega_s_j)));
}

/// Body-frame kinematic matrix B of the Uranus-style mecanum chassis:
/// (vx, vy, omega_z) = B * omega.
inline Mat34 kinematic_matrix(const RobotParams& p) {
  const double lab = p.lab();
  if (!(lab > 0.0)) {
    throw std::invalid_argument("kinematic_matrix: la + lb must be positive");
  }
  const double k = p.wheel_radius_R / (4.0 * lab);
  Mat34 B;
  B << -lab, lab, -lab, lab,
        lab, lab,  lab, lab,
        1.0, -1.0, -1.0, 1.0;
  return k * B;
}

inline BodyVelocity body_velocity(const Mat34& B, const Vec4& omega) {
  const Vec3 v = B * omega;
  return BodyVelocity{v[0], v[1], v[2]};
}

/// One explicit Euler step of the planar pose, rotating the body velocity
/// by the heading at the START of the step.
inline Pose step_pose(const Pose& pose, const BodyVelocity& vel, double dt) {
  const double c = std::cos(pose.theta);
  const double s = std::sin(pose.theta);
  return Pose{pose.x + dt * (vel.vx * c - vel.vy * s),
              pose.y + dt * (vel.vx * s + vel.vy * c),
              pose.theta + dt * vel.omega_z};
}

/// Forward simulation of the full schedule. Returns steps()+1 timed poses,
/// the first one being the start pose at the schedule's first timestamp.
inline Trajectory simulate(const RobotParams& params, const FrictionCoeffs& mu,
                           const ControlSchedule& schedule, const Pose& start) {
  params.validate();
  schedule.validate();
  const Mat34 B = kinematic_matrix(params);

  Trajectory traj;
  traj.samples.reserve(schedule.omega_s.size() + 1);
  Pose pose = start;
  traj.samples.push_back({schedule.t.front(), pose});
  for (int i = 0; i < schedule.steps(); ++i) {
    const Vec4 omega = steady_state_omega(params, mu, schedule.omega_s[i]);
    pose = step_pose(pose, body_velocity(B, omega), schedule.dt(i));
    traj.samples.push_back({schedule.t[i + 1], pose});
  }
  return traj;
}

/// Duty cycle in [-1, 1] to commanded wheel speed.
inline Vec4 duty_to_omega(const RobotParams& p, const Vec4& duty) {
  return duty * p.omega_max;
}

} // namespace mecasim
