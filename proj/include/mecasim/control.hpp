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
#include <stdexcept>
#include <utility>
#include <variant>
#include <vector>

#include "mecasim/gradient.hpp"
#include "mecasim/identify.hpp"
#include "mecasim/lbfgsb.hpp"
#include "mecasim/loss.hpp"
#include "mecasim/model.hpp"
#include "mecasim/spline.hpp"

namespace mecasim {

struct CircleCurve {
  Vec2 center = Vec2::Zero();
  double radius = 1.0;
  double start_angle = 0.0;
  double angular_span = 2.0 * M_PI; // signed; negative runs clockwise
};

/// Lemniscate of Gerono, x^4 = a^2 (x^2 - y^2), traced lobe by lobe. Each
/// lobe is a closed loop through the crossing point; flipping a lobe's
/// direction makes the robot traverse that half against the natural sense,
/// which is how the figure-eight with one backward lobe is specified.
struct EightCurve {
  Vec2 center = Vec2::Zero();
  double scale = 1.0;
  bool right_lobe_forward = false;
  bool left_lobe_forward = true;
};

struct PolylineCurve {
  std::vector<Vec2> points; // traversed at constant speed in time
};

struct ReferenceCurve {
  std::variant<CircleCurve, EightCurve, PolylineCurve> shape = CircleCurve{};
  double duration = 8.0;     // s
  double waypoint_rate = 4.0; // waypoints per second

  int waypoint_count() const {
    return static_cast<int>(std::llround(duration * waypoint_rate));
  }
};

struct Waypoint {
  double t = 0.0;
  Vec2 position = Vec2::Zero();
};

namespace detail {

inline Vec2 eval_curve_shape(const ReferenceCurve& curve, double u) {
  if (const auto* circle = std::get_if<CircleCurve>(&curve.shape)) {
    const double a = circle->start_angle + u * circle->angular_span;
    return circle->center + circle->radius * Vec2(std::cos(a), std::sin(a));
  }
  if (const auto* eight = std::get_if<EightCurve>(&curve.shape)) {
    // Right lobe on u in [0, 1/2], left lobe on [1/2, 1]; tau in [-pi/2, pi/2]
    // closes the right lobe, [pi/2, 3pi/2] the left one.
    double tau;
    if (u <= 0.5) {
      const double s = 2.0 * u;
      tau = eight->right_lobe_forward ? -M_PI_2 + s * M_PI : M_PI_2 - s * M_PI;
    } else {
      const double s = 2.0 * u - 1.0;
      tau = eight->left_lobe_forward ? M_PI_2 + s * M_PI : 3.0 * M_PI_2 - s * M_PI;
    }
    return eight->center +
           eight->scale * Vec2(std::cos(tau), std::sin(tau) * std::cos(tau));
  }
  const auto& poly = std::get<PolylineCurve>(curve.shape);
  if (poly.points.size() < 2) {
    throw std::invalid_argument("ReferenceCurve: polyline needs at least two points");
  }
  std::vector<double> cum(poly.points.size(), 0.0);
  for (std::size_t i = 1; i < poly.points.size(); ++i) {
    cum[i] = cum[i - 1] + (poly.points[i] - poly.points[i - 1]).norm();
  }
  const double target = u * cum.back();
  std::size_t i = 1;
  while (i + 1 < cum.size() && cum[i] < target) ++i;
  const double seg = cum[i] - cum[i - 1];
  const double w = seg > 0.0 ? (target - cum[i - 1]) / seg : 0.0;
  return poly.points[i - 1] + w * (poly.points[i] - poly.points[i - 1]);
}

} // namespace detail

/// Uniform-in-time discretization into waypoint_count()+1 points, the first
/// at t = 0 and the last at t = duration.
inline std::vector<Waypoint> discretize(const ReferenceCurve& curve) {
  const int n = curve.waypoint_count();
  if (n < 2) {
    throw std::invalid_argument("discretize: need >= 2 waypoints");
  }
  std::vector<Waypoint> wps(static_cast<std::size_t>(n) + 1);
  for (int k = 0; k <= n; ++k) {
    const double u = static_cast<double>(k) / n;
    wps[static_cast<std::size_t>(k)] = {u * curve.duration,
                                        detail::eval_curve_shape(curve, u)};
  }
  return wps;
}

/// Piecewise-constant wheel-speed commands, one 4-vector per waypoint
/// segment, bounded by +-omega_max.
struct ControlPlan {
  std::vector<double> segment_times; // n_segments + 1 boundaries
  std::vector<Vec4> omega_s;
  int substeps = 4; // simulation steps per segment
  double omega_max = 10.0;

  int segments() const { return static_cast<int>(omega_s.size()); }

  /// The schedule actually simulated: each segment repeated `substeps`
  /// times at the finer step.
  ControlSchedule to_schedule() const {
    ControlSchedule s;
    for (int seg = 0; seg < segments(); ++seg) {
      const double t0 = segment_times[static_cast<std::size_t>(seg)];
      const double t1 = segment_times[static_cast<std::size_t>(seg) + 1];
      for (int j = 0; j < substeps; ++j) {
        s.t.push_back(t0 + (t1 - t0) * j / substeps);
        s.omega_s.push_back(omega_s[static_cast<std::size_t>(seg)]);
      }
    }
    s.t.push_back(segment_times.back());
    return s;
  }

  std::vector<int> segment_of_step() const {
    std::vector<int> map;
    map.reserve(static_cast<std::size_t>(segments() * substeps));
    for (int seg = 0; seg < segments(); ++seg) {
      for (int j = 0; j < substeps; ++j) map.push_back(seg);
    }
    return map;
  }
};

struct TrackingReport {
  double mean_deviation = 0.0;
  double max_deviation = 0.0;
  double final_speed = 0.0; // body speed on the last step; reported, never asserted
  std::vector<double> deviations;
};

struct PlanOptions {
  int substeps = 4;
  LossWeights weights;
  BoxSolveOptions solver = default_solver();
  GradOptions grad;

  static BoxSolveOptions default_solver() {
    BoxSolveOptions s;
    s.max_iterations = 600;
    s.pg_tol = 1e-6;
    return s;
  }
};

struct PlanResult {
  ControlPlan plan;
  SolveReport report;
  Trajectory predicted;
  TrackingReport predicted_tracking;
};

namespace detail {

inline GroundTruthTrack waypoints_to_track(const std::vector<Waypoint>& wps) {
  GroundTruthTrack track;
  track.samples.reserve(wps.size());
  for (const Waypoint& w : wps) track.samples.push_back({w.t, w.position.x(), w.position.y(), {}});
  return track;
}

inline TrackingReport tracking_against(const SplinePath& reference, const Trajectory& traj,
                                       const RobotParams& params,
                                       const FrictionCoeffs& mu,
                                       const ControlSchedule& schedule) {
  TrackingReport rep;
  rep.deviations.reserve(traj.samples.size());
  for (const TimedPose& tp : traj.samples) {
    const double d = reference.distance(Vec2(tp.pose.x, tp.pose.y));
    rep.deviations.push_back(d);
    rep.mean_deviation += d;
    rep.max_deviation = std::max(rep.max_deviation, d);
  }
  if (!rep.deviations.empty()) {
    rep.mean_deviation /= static_cast<double>(rep.deviations.size());
  }
  if (schedule.steps() > 0) {
    const Mat34 B = kinematic_matrix(params);
    const Vec4 omega =
        steady_state_omega(params, mu, schedule.omega_s.back());
    const BodyVelocity v = body_velocity(B, omega);
    rep.final_speed = std::hypot(v.vx, v.vy);
  }
  return rep;
}

} // namespace detail

/// Optimize all segment commands jointly so the simulated robot passes the
/// waypoints: the waypoint track plays the role of the recorded trajectory
/// in the combined loss, its spline supplies the curve term, and the
/// terminal waypoint is sampled so the end of the path binds. Initial guess
/// is zero (the optimizer cannot do worse than standing still).
inline PlanResult plan_controls(const RobotParams& params, const FrictionCoeffs& mu,
                                const ReferenceCurve& curve, const Pose& start,
                                const PlanOptions& opts = {}) {
  params.validate();
  const std::vector<Waypoint> wps = discretize(curve);
  const int n_segments = static_cast<int>(wps.size()) - 1;

  ControlPlan plan;
  plan.substeps = std::max(1, opts.substeps);
  plan.omega_max = params.omega_max;
  plan.segment_times.resize(static_cast<std::size_t>(n_segments) + 1);
  for (int k = 0; k <= n_segments; ++k) {
    plan.segment_times[static_cast<std::size_t>(k)] = wps[static_cast<std::size_t>(k)].t;
  }
  plan.omega_s.assign(static_cast<std::size_t>(n_segments), Vec4::Zero());

  const ControlSchedule schedule = plan.to_schedule();
  const std::vector<int> seg_map = plan.segment_of_step();
  const GroundTruthTrack track = detail::waypoints_to_track(wps);
  LossOptions lopts;
  lopts.start_override = start;
  lopts.sample_final_pose = true;
  const LossContext ctx = prepare_loss(schedule, track, lopts);

  const int dim = 4 * n_segments;
  ControlSchedule work = schedule;
  const auto fill_schedule = [&](const Eigen::VectorXd& x) {
    for (int i = 0; i < work.steps(); ++i) {
      const int seg = seg_map[static_cast<std::size_t>(i)];
      work.omega_s[static_cast<std::size_t>(i)] = x.segment<4>(4 * seg);
    }
  };

  const BoxObjective fg = [&](const Eigen::VectorXd& x, Eigen::VectorXd* grad) {
    fill_schedule(x);
    if (grad == nullptr) {
      return compute_loss(params, mu, work, ctx, opts.weights).total;
    }
    auto [report, gv] = loss_gradient_controls(params, mu, work, seg_map, n_segments,
                                               ctx, opts.weights, opts.grad);
    *grad = gv.g;
    return report.total;
  };

  detail::WallClock clock;
  const BoxSolveResult r = minimize_box_lbfgs(
      fg, Eigen::VectorXd::Constant(dim, -params.omega_max),
      Eigen::VectorXd::Constant(dim, params.omega_max), Eigen::VectorXd::Zero(dim),
      opts.solver);

  PlanResult result;
  for (int seg = 0; seg < n_segments; ++seg) {
    plan.omega_s[static_cast<std::size_t>(seg)] = r.x.segment<4>(4 * seg);
  }
  result.plan = plan;
  result.report.mu_hat = mu;
  result.report.final_loss = r.f;
  result.report.iterations = r.iterations;
  result.report.function_evals = r.function_evals;
  result.report.gradient_evals = r.gradient_evals;
  result.report.loss_curve = r.loss_curve;
  result.report.converged = r.converged;
  result.report.wall_time_s = clock.seconds();
  result.report.solver = "quasi_newton";

  const ControlSchedule final_schedule = result.plan.to_schedule();
  result.predicted = simulate(params, mu, final_schedule, start);
  result.predicted_tracking =
      detail::tracking_against(ctx.spline, result.predicted, params, mu, final_schedule);
  return result;
}

/// Simulate a plan under possibly different friction (friction-net error,
/// terrain drift) and score it against the reference curve's spline.
inline std::pair<Trajectory, TrackingReport> rollout(const RobotParams& params,
                                                     const FrictionCoeffs& mu_true,
                                                     const ControlPlan& plan,
                                                     const Pose& start,
                                                     const SplinePath& reference) {
  const ControlSchedule schedule = plan.to_schedule();
  Trajectory traj = simulate(params, mu_true, schedule, start);
  TrackingReport rep =
      detail::tracking_against(reference, traj, params, mu_true, schedule);
  return {std::move(traj), std::move(rep)};
}

inline std::pair<Trajectory, TrackingReport> rollout(const RobotParams& params,
                                                     const FrictionCoeffs& mu_true,
                                                     const ControlPlan& plan,
                                                     const Pose& start,
                                                     const ReferenceCurve& curve) {
  const std::vector<Waypoint> wps = discretize(curve);
  std::vector<Vec2> pts;
  pts.reserve(wps.size());
  for (const Waypoint& w : wps) pts.push_back(w.position);
  return rollout(params, mu_true, plan, start, SplinePath::fit(pts));
}

/// Closed-loop waypoint chase for data-driven baselines: at each segment a
/// controller maps the pose difference to the next waypoint into duty
/// cycles, which are executed for one segment before re-planning from the
/// reached state.
inline std::pair<Trajectory, TrackingReport> waypoint_chase_rollout(
    const RobotParams& params, const FrictionCoeffs& mu_true,
    const ReferenceCurve& curve, const Pose& start, int substeps,
    const std::function<Vec4(const Vec3& delta_pose)>& duty_controller) {
  params.validate();
  const std::vector<Waypoint> wps = discretize(curve);
  std::vector<Vec2> pts;
  pts.reserve(wps.size());
  for (const Waypoint& w : wps) pts.push_back(w.position);
  const SplinePath reference = SplinePath::fit(pts);
  const Mat34 B = kinematic_matrix(params);

  Trajectory traj;
  Pose pose = start;
  traj.samples.push_back({wps.front().t, pose});
  for (std::size_t k = 0; k + 1 < wps.size(); ++k) {
    const Waypoint& next = wps[k + 1];
    const Vec3 delta(next.position.x() - pose.x, next.position.y() - pose.y, 0.0);
    const Vec4 duty = duty_controller(delta).cwiseMax(-1.0).cwiseMin(1.0);
    const Vec4 omega_cmd = duty_to_omega(params, duty);
    const Vec4 omega = steady_state_omega(params, mu_true, omega_cmd);
    const BodyVelocity vel = body_velocity(B, omega);
    const double dt = (next.t - wps[k].t) / substeps;
    for (int j = 0; j < substeps; ++j) {
      pose = step_pose(pose, vel, dt);
      traj.samples.push_back({wps[k].t + dt * (j + 1), pose});
    }
  }

  TrackingReport rep;
  rep.deviations.reserve(traj.samples.size());
  for (const TimedPose& tp : traj.samples) {
    const double d = reference.distance(Vec2(tp.pose.x, tp.pose.y));
    rep.deviations.push_back(d);
    rep.mean_deviation += d;
    rep.max_deviation = std::max(rep.max_deviation, d);
  }
  rep.mean_deviation /= static_cast<double>(rep.deviations.size());
  return {std::move(traj), std::move(rep)};
}

} // namespace mecasim
