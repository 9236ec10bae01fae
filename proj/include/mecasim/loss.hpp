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
#include <sstream>
#include <stdexcept>
#include <utility>
#include <vector>

#include "mecasim/model.hpp"
#include "mecasim/spline.hpp"
#include "mecasim/types.hpp"

namespace mecasim {

/// Distances below this are treated as zero when forming gradient terms;
/// the Euclidean norm is not differentiable at the origin.
constexpr double kDistanceGuard = 1e-12;

struct LossOptions {
  /// Override the simulation start pose. Defaults to the first ground-truth
  /// pose (heading estimated from the first chord if the track lacks it).
  std::optional<Pose> start_override;
  /// Also compare the pose at the schedule's final timestamp. The recorded
  /// loss loop samples only interval starts; control synthesis needs the
  /// terminal waypoint to bind, so the planner switches this on.
  bool sample_final_pose = false;
};

struct LossReport {
  double total = 0.0; // w1 * l_sp + w2 * l_gt
  double l_gt = 0.0;  // sum of distances to synchronous ground-truth samples
  double l_sp = 0.0;  // sum of distances to the fitted curve

  struct Term {
    int gt_index = 0;
    double d_gt = 0.0;
    double d_sp = 0.0;
  };
  std::vector<Term> terms;
};

/// Everything about a (schedule, track) pair that does not depend on the
/// friction coefficients: the fitted curve, the alignment of ground-truth
/// samples to control steps, and the start pose. Fit once, share freely.
struct LossContext {
  SplinePath spline;
  /// (control step index, ground-truth index); a step index equal to
  /// schedule.steps() refers to the final pose (sample_final_pose only).
  std::vector<std::pair<int, int>> matches;
  Pose start;
  std::vector<Vec2> gt_xy;
};

/// Align ground-truth timestamps to control timestamps. A ground-truth
/// sample matches a control timestamp when they are within half of the
/// local control interval; first match wins, and every ground-truth sample
/// must find a home or the pair is rejected.
inline LossContext prepare_loss(const ControlSchedule& schedule,
                                const GroundTruthTrack& track,
                                const LossOptions& opts = {}) {
  schedule.validate();
  track.validate();
  if (track.samples.empty()) {
    throw std::invalid_argument("prepare_loss: ground-truth track is empty");
  }

  LossContext ctx;
  ctx.spline = SplinePath::fit(track);
  ctx.start = opts.start_override.value_or(track.start_pose());
  ctx.gt_xy.reserve(track.samples.size());
  for (const GtSample& s : track.samples) ctx.gt_xy.emplace_back(s.x, s.y);

  const int n_steps = schedule.steps();
  std::vector<bool> taken(static_cast<std::size_t>(n_steps) + 1, false);
  for (int k = 0; k < track.size(); ++k) {
    const double tg = track.samples[k].t;
    const auto it = std::lower_bound(schedule.t.begin(), schedule.t.end(), tg);
    int i = static_cast<int>(it - schedule.t.begin());
    if (i > 0 && (i >= static_cast<int>(schedule.t.size()) ||
                  schedule.t[i] - tg > tg - schedule.t[i - 1])) {
      --i;
    }
    const double half = 0.5 * schedule.dt(std::min(i, n_steps - 1));
    const bool aligned =
        std::abs(schedule.t[i] - tg) < half && !taken[static_cast<std::size_t>(i)];
    if (!aligned) {
      std::ostringstream msg;
      msg << "prepare_loss: ground-truth timestamp " << tg
          << " does not align with any control step";
      throw std::invalid_argument(msg.str());
    }
    taken[static_cast<std::size_t>(i)] = true;
    // The loss loop samples interval starts; the final pose participates
    // only when explicitly requested.
    if (i < n_steps || opts.sample_final_pose) ctx.matches.emplace_back(i, k);
  }
  return ctx;
}

namespace detail {

inline void accumulate_sample(const LossContext& ctx, const LossWeights& weights,
                              double px, double py, int gt_index, LossReport& report,
                              Vec2* pull) {
  const Vec2 p(px, py);
  const Vec2 dp = p - ctx.gt_xy[static_cast<std::size_t>(gt_index)];
  const Vec2 dq = p - ctx.spline.closest_point(p);
  const double d_gt = dp.norm();
  const double d_sp = dq.norm();
  report.l_gt += d_gt;
  report.l_sp += d_sp;
  report.terms.push_back({gt_index, d_gt, d_sp});
  if (pull != nullptr) {
    Vec2 c = Vec2::Zero();
    if (d_sp > kDistanceGuard) c += (weights.spline_w1 / d_sp) * dq;
    if (d_gt > kDistanceGuard) c += (weights.ground_truth_w2 / d_gt) * dp;
    *pull = c;
  }
}

} // namespace detail

/// Combined simulation-reality gap: at every control step whose timestamp
/// carries a ground-truth sample, the pose before that step's update is
/// compared against the synchronous sample (l_gt) and against the closest
/// point of the fitted curve (l_sp); total = w1 * l_sp + w2 * l_gt.
inline LossReport compute_loss(const RobotParams& params, const FrictionCoeffs& mu,
                               const ControlSchedule& schedule, const LossContext& ctx,
                               const LossWeights& weights = {}) {
  params.validate();
  weights.validate();
  const Mat34 B = kinematic_matrix(params);
  const Vec4 factor =
      (1.0 - mu.mu.array() * friction_load_per_mu(params)).max(0.0).matrix();

  LossReport report;
  report.terms.reserve(ctx.matches.size());
  Pose pose = ctx.start;
  std::size_t next = 0;
  for (int i = 0; i <= schedule.steps(); ++i) {
    if (next < ctx.matches.size() && ctx.matches[next].first == i) {
      detail::accumulate_sample(ctx, weights, pose.x, pose.y, ctx.matches[next].second,
                                report, nullptr);
      ++next;
    }
    if (i == schedule.steps()) break;
    const Vec4 omega = schedule.omega_s[static_cast<std::size_t>(i)].cwiseProduct(factor);
    pose = step_pose(pose, body_velocity(B, omega), schedule.dt(i));
  }
  report.total = weights.spline_w1 * report.l_sp + weights.ground_truth_w2 * report.l_gt;
  return report;
}

inline LossReport compute_loss(const RobotParams& params, const FrictionCoeffs& mu,
                               const ControlSchedule& schedule,
                               const GroundTruthTrack& track,
                               const LossWeights& weights = {},
                               const LossOptions& opts = {}) {
  return compute_loss(params, mu, schedule, prepare_loss(schedule, track, opts), weights);
}

} // namespace mecasim
