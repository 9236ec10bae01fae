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
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "mecasim/loss.hpp"
#include "mecasim/model.hpp"
#include "mecasim/types.hpp"

namespace mecasim {

/// Per-wheel derivative of the steady-state wheel speed with respect to its
/// friction coefficient: d omega_j / d mu_j = -omega_s_j * M * g * R / (4 * Ts).
/// Cross-wheel terms are identically zero.
inline Vec4 domega_dmu(const RobotParams& p, const Vec4& omega_s) {
  return -omega_s * friction_load_per_mu(p);
}

/// Sigmoid reparameterization for unconstrained solvers: the effective
/// friction is mu_eff = 2 * sigma(mu_raw), which sweeps the same [0, 2]
/// range the box-constrained solver uses. Also returns d sigma / d mu_raw
/// for chaining.
struct SigmoidReparam {
  FrictionCoeffs mu;
  Vec4 dsigma_dmu_raw;
};

inline SigmoidReparam sigmoid_reparam(const Vec4& mu_raw) {
  SigmoidReparam out;
  for (int j = 0; j < 4; ++j) {
    const double s = 1.0 / (1.0 + std::exp(-mu_raw[j]));
    out.mu.mu[j] = 2.0 * s;
    out.dsigma_dmu_raw[j] = s * (1.0 - s);
  }
  return out;
}

struct GradVector {
  enum class Target { Friction, Controls };
  Target target = Target::Friction;
  Eigen::VectorXd g;
};

struct GradOptions {
  /// Reproduce the recorded accumulation order literally: the pose
  /// sensitivity advances one step before the loss pull is applied, while
  /// the pose itself advances after. Off by default; the default order
  /// updates sensitivity and pose together so the sensitivity is exactly
  /// the derivative of the pose entering the loss, which is what finite
  /// differences confirm.
  bool paper_ordering = false;
};

namespace detail {

enum class SensTarget { Friction, Controls };

/// Forward accumulation of loss and pose sensitivities over the schedule.
///
/// The sensitivity matrix J is 3 x P with rows (x, y, theta). Per step the
/// wheel-speed derivative occupies a diagonal 4-wide block of columns
/// (always columns 0..3 for the friction target; the active segment's block
/// for the controls target). The closest curve point is held constant under
/// differentiation; for an interior projection its motion is tangent to the
/// curve and orthogonal to the residual, so nothing is lost.
inline std::pair<LossReport, Eigen::VectorXd> forward_pass(
    const RobotParams& params, const FrictionCoeffs& mu, const ControlSchedule& schedule,
    const LossContext& ctx, const LossWeights& weights, SensTarget target,
    const std::vector<int>* segment_of_step, int n_segments, const GradOptions& gopts) {
  params.validate();
  weights.validate();
  const Mat34 B = kinematic_matrix(params);
  const double c0 = friction_load_per_mu(params);
  const Vec4 factor_raw = (1.0 - mu.mu.array() * c0).matrix();
  const Vec4 factor = factor_raw.cwiseMax(0.0);

  const int n_params = target == SensTarget::Friction ? 4 : 4 * n_segments;
  Eigen::Matrix<double, 3, Eigen::Dynamic> J =
      Eigen::Matrix<double, 3, Eigen::Dynamic>::Zero(3, n_params);
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(n_params);

  LossReport report;
  report.terms.reserve(ctx.matches.size());
  Pose pose = ctx.start;
  std::size_t next = 0;

  auto pull_loss = [&](int step) {
    while (next < ctx.matches.size() && ctx.matches[next].first == step) {
      Vec2 pull;
      accumulate_sample(ctx, weights, pose.x, pose.y, ctx.matches[next].second, report,
                        &pull);
      grad.noalias() += J.topRows<2>().transpose() * pull;
      ++next;
    }
  };

  for (int i = 0; i < schedule.steps(); ++i) {
    const Vec4& ws = schedule.omega_s[static_cast<std::size_t>(i)];
    const Vec4 omega = ws.cwiseProduct(factor);
    const double dt = schedule.dt(i);
    const BodyVelocity vel = body_velocity(B, omega);
    const double c = std::cos(pose.theta);
    const double s = std::sin(pose.theta);

    // d omega_j / d parameter on this step's active block; the floored
    // branch of the speed factor contributes a zero subgradient.
    Vec4 dvals;
    int col0 = 0;
    if (target == SensTarget::Friction) {
      for (int j = 0; j < 4; ++j) dvals[j] = factor_raw[j] > 0.0 ? -ws[j] * c0 : 0.0;
    } else {
      col0 = 4 * (*segment_of_step)[static_cast<std::size_t>(i)];
      for (int j = 0; j < 4; ++j) dvals[j] = factor_raw[j] > 0.0 ? factor_raw[j] : 0.0;
    }

    auto advance_jacobian = [&] {
      for (int j = 0; j < 4; ++j) {
        const int col = col0 + j;
        const double jt = J(2, col); // theta sensitivity before this step
        J(0, col) += dt * (dvals[j] * (c * B(0, j) - s * B(1, j)) -
                           (vel.vx * s + vel.vy * c) * jt);
        J(1, col) += dt * (dvals[j] * (s * B(0, j) + c * B(1, j)) +
                           (vel.vx * c - vel.vy * s) * jt);
        J(2, col) += dt * B(2, j) * dvals[j];
      }
    };

    if (gopts.paper_ordering) {
      advance_jacobian();
      pull_loss(i);
    } else {
      pull_loss(i);
      advance_jacobian();
    }
    pose = step_pose(pose, vel, dt);
  }
  pull_loss(schedule.steps());

  report.total = weights.spline_w1 * report.l_sp + weights.ground_truth_w2 * report.l_gt;
  return {report, std::move(grad)};
}

} // namespace detail

/// Loss and its analytic gradient with respect to the four friction
/// coefficients, by forward accumulation at the control rate.
inline std::pair<LossReport, GradVector> loss_gradient_mu(
    const RobotParams& params, const FrictionCoeffs& mu, const ControlSchedule& schedule,
    const LossContext& ctx, const LossWeights& weights = {},
    const GradOptions& gopts = {}) {
  auto [report, g] = detail::forward_pass(params, mu, schedule, ctx, weights,
                                          detail::SensTarget::Friction, nullptr, 0, gopts);
  return {std::move(report), GradVector{GradVector::Target::Friction, std::move(g)}};
}

inline std::pair<LossReport, GradVector> loss_gradient_mu(
    const RobotParams& params, const FrictionCoeffs& mu, const ControlSchedule& schedule,
    const GroundTruthTrack& track, const LossWeights& weights = {},
    const LossOptions& opts = {}, const GradOptions& gopts = {}) {
  return loss_gradient_mu(params, mu, schedule, prepare_loss(schedule, track, opts),
                          weights, gopts);
}

/// Loss and gradient with respect to the per-segment commanded wheel speeds.
/// segment_of_step maps every control step to the segment whose command it
/// executes; the gradient has 4 entries per segment. Only the derivative of
/// the wheel model changes relative to the friction case:
/// d omega_j / d omega_s_j = 1 - mu_j * M * g * R / (4 * Ts).
inline std::pair<LossReport, GradVector> loss_gradient_controls(
    const RobotParams& params, const FrictionCoeffs& mu, const ControlSchedule& schedule,
    const std::vector<int>& segment_of_step, int n_segments, const LossContext& ctx,
    const LossWeights& weights = {}, const GradOptions& gopts = {}) {
  if (static_cast<int>(segment_of_step.size()) != schedule.steps()) {
    throw std::invalid_argument(
        "loss_gradient_controls: segment_of_step must cover every control step");
  }
  for (int seg : segment_of_step) {
    if (seg < 0 || seg >= n_segments) {
      throw std::invalid_argument("loss_gradient_controls: segment index out of range");
    }
  }
  auto [report, g] =
      detail::forward_pass(params, mu, schedule, ctx, weights,
                           detail::SensTarget::Controls, &segment_of_step, n_segments, gopts);
  return {std::move(report), GradVector{GradVector::Target::Controls, std::move(g)}};
}

} // namespace mecasim
