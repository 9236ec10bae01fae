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
#include <array>
#include <chrono>
#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mecasim/cmaes.hpp"
#include "mecasim/gradient.hpp"
#include "mecasim/lbfgsb.hpp"
#include "mecasim/loss.hpp"
#include "mecasim/nelder_mead.hpp"

namespace mecasim {

struct TrajectoryData {
  ControlSchedule schedule;
  GroundTruthTrack track;
};

/// One identification task: recover the friction coefficients that explain
/// the recorded trajectories. Multi-trajectory problems sum losses and
/// gradients.
struct IdentificationProblem {
  RobotParams params;
  std::vector<TrajectoryData> trajectories;
  LossWeights weights;
  Vec4 lower = Vec4::Zero();
  Vec4 upper = Vec4::Constant(2.0);
  LossOptions loss_options;

  void validate() const {
    params.validate();
    weights.validate();
    if (trajectories.empty()) {
      throw std::invalid_argument("IdentificationProblem: need at least one trajectory");
    }
    if (!((lower.array() < upper.array()).all())) {
      throw std::invalid_argument("IdentificationProblem: bounds must satisfy lo < hi");
    }
  }
};

struct SolveReport {
  FrictionCoeffs mu_hat;
  double final_loss = 0.0;
  int iterations = 0;
  int function_evals = 0;
  int gradient_evals = 0;
  double wall_time_s = 0.0;
  std::vector<std::pair<int, double>> loss_curve;
  bool converged = false;
  std::string solver;
};

struct IdentifyOptions {
  BoxSolveOptions quasi_newton;
  SimplexOptions nelder_mead;
  CmaOptions cmaes;
};

namespace detail {

/// Prepared per-trajectory contexts; spline fits happen once per solve.
struct PreparedProblem {
  const IdentificationProblem* problem;
  std::vector<LossContext> contexts;

  explicit PreparedProblem(const IdentificationProblem& p) : problem(&p) {
    p.validate();
    contexts.reserve(p.trajectories.size());
    for (const TrajectoryData& td : p.trajectories) {
      contexts.push_back(prepare_loss(td.schedule, td.track, p.loss_options));
    }
  }

  double loss(const Vec4& mu) const {
    double total = 0.0;
    for (std::size_t i = 0; i < contexts.size(); ++i) {
      total += compute_loss(problem->params, FrictionCoeffs(mu),
                            problem->trajectories[i].schedule, contexts[i],
                            problem->weights)
                   .total;
    }
    return total;
  }

  double loss_and_grad(const Vec4& mu, Vec4* grad) const {
    double total = 0.0;
    if (grad != nullptr) grad->setZero();
    for (std::size_t i = 0; i < contexts.size(); ++i) {
      auto [report, gv] =
          loss_gradient_mu(problem->params, FrictionCoeffs(mu),
                           problem->trajectories[i].schedule, contexts[i],
                           problem->weights);
      total += report.total;
      if (grad != nullptr) *grad += Vec4(gv.g);
    }
    return total;
  }
};

inline Vec4 logit_of_half(const Vec4& mu) {
  Vec4 raw;
  for (int j = 0; j < 4; ++j) {
    const double p = std::clamp(mu[j] / 2.0, 1e-6, 1.0 - 1e-6);
    raw[j] = std::log(p / (1.0 - p));
  }
  return raw;
}

class WallClock {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
  }

 private:
  std::chrono::steady_clock::time_point t0_ = std::chrono::steady_clock::now();
};

} // namespace detail

/// Gradient-based identification: projected L-BFGS over the friction box
/// with the analytic forward-mode gradient.
inline SolveReport identify_quasi_newton(const IdentificationProblem& problem,
                                         const Vec4& x0 = Vec4::Ones(),
                                         const IdentifyOptions& opts = {}) {
  detail::PreparedProblem prep(problem);
  detail::WallClock clock;

  const BoxObjective fg = [&](const Eigen::VectorXd& x, Eigen::VectorXd* grad) {
    const Vec4 mu = x;
    if (grad == nullptr) return prep.loss(mu);
    Vec4 g;
    const double f = prep.loss_and_grad(mu, &g);
    *grad = g;
    return f;
  };

  const BoxSolveResult r = minimize_box_lbfgs(fg, problem.lower, problem.upper,
                                              Eigen::Vector4d(x0), opts.quasi_newton);
  SolveReport report;
  report.mu_hat = FrictionCoeffs(Vec4(r.x));
  report.final_loss = r.f;
  report.iterations = r.iterations;
  report.function_evals = r.function_evals;
  report.gradient_evals = r.gradient_evals;
  report.loss_curve = r.loss_curve;
  report.converged = r.converged;
  report.wall_time_s = clock.seconds();
  report.solver = "quasi_newton";
  return report;
}

/// Derivative-free baseline on the sigmoid-reparameterized friction space,
/// so the simplex can roam an unconstrained domain.
inline SolveReport identify_nelder_mead(const IdentificationProblem& problem,
                                        const Vec4& x0 = Vec4::Ones(),
                                        const IdentifyOptions& opts = {}) {
  detail::PreparedProblem prep(problem);
  detail::WallClock clock;

  const auto objective = [&](const Eigen::VectorXd& raw) {
    return prep.loss(sigmoid_reparam(Vec4(raw)).mu.mu);
  };
  const SimplexResult r =
      minimize_simplex(objective, detail::logit_of_half(x0), opts.nelder_mead);

  SolveReport report;
  report.mu_hat = sigmoid_reparam(Vec4(r.x)).mu;
  report.final_loss = r.f;
  report.iterations = r.iterations;
  report.function_evals = r.function_evals;
  report.loss_curve = r.loss_curve;
  report.converged = r.converged;
  report.wall_time_s = clock.seconds();
  report.solver = "nelder_mead";
  return report;
}

/// CMA-ES baseline, also on the sigmoid reparameterization, with a fixed
/// seed so reports are reproducible bit for bit.
inline SolveReport identify_cmaes(const IdentificationProblem& problem,
                                  const Vec4& x0 = Vec4::Ones(),
                                  const IdentifyOptions& opts = {}) {
  detail::PreparedProblem prep(problem);
  detail::WallClock clock;

  const auto objective = [&](const Eigen::VectorXd& raw) {
    return prep.loss(sigmoid_reparam(Vec4(raw)).mu.mu);
  };
  const CmaResult r = minimize_cmaes(objective, detail::logit_of_half(x0), opts.cmaes);

  SolveReport report;
  report.mu_hat = sigmoid_reparam(Vec4(r.x)).mu;
  report.final_loss = r.f;
  report.iterations = r.generations;
  report.function_evals = r.function_evals;
  report.loss_curve = r.loss_curve;
  report.converged = r.converged;
  report.wall_time_s = clock.seconds();
  report.solver = "cmaes";
  return report;
}

struct GradCheckRow {
  double analytic = 0.0;
  double numeric = 0.0;
  double abs_err = 0.0;
  double rel_err = 0.0;
};

struct GradCheckReport {
  std::array<GradCheckRow, 4> rows;
  double max_rel_err = 0.0;
  double max_abs_err = 0.0;
};

/// Central-difference check of two callbacks; the relative error is scaled
/// by the larger magnitude of the pair.
inline std::vector<GradCheckRow> gradient_check_fn(
    const std::function<double(const Eigen::VectorXd&)>& f,
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& grad,
    const Eigen::VectorXd& x, double h) {
  const Eigen::VectorXd analytic = grad(x);
  std::vector<GradCheckRow> rows(static_cast<std::size_t>(x.size()));
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    Eigen::VectorXd xp = x, xm = x;
    xp[j] += h;
    xm[j] -= h;
    const double numeric = (f(xp) - f(xm)) / (2.0 * h);
    auto& row = rows[static_cast<std::size_t>(j)];
    row.analytic = analytic[j];
    row.numeric = numeric;
    row.abs_err = std::abs(analytic[j] - numeric);
    const double scale = std::max(std::abs(analytic[j]), std::abs(numeric));
    row.rel_err = scale > 0.0 ? row.abs_err / scale : 0.0;
  }
  return rows;
}

/// Validates the analytic friction gradient against central differences of
/// the loss at x (which should sit inside the box with margin > h).
inline GradCheckReport gradient_check(const IdentificationProblem& problem, const Vec4& x,
                                      double h = 1e-6) {
  detail::PreparedProblem prep(problem);
  const auto f = [&](const Eigen::VectorXd& v) { return prep.loss(Vec4(v)); };
  const auto g = [&](const Eigen::VectorXd& v) {
    Vec4 grad;
    prep.loss_and_grad(Vec4(v), &grad);
    return Eigen::VectorXd(grad);
  };
  const auto rows = gradient_check_fn(f, g, Eigen::Vector4d(x), h);
  GradCheckReport report;
  for (int j = 0; j < 4; ++j) {
    report.rows[static_cast<std::size_t>(j)] = rows[static_cast<std::size_t>(j)];
    report.max_rel_err = std::max(report.max_rel_err, rows[static_cast<std::size_t>(j)].rel_err);
    report.max_abs_err = std::max(report.max_abs_err, rows[static_cast<std::size_t>(j)].abs_err);
  }
  return report;
}

struct SweepPoint {
  double fraction = 0.0;
  double full_data_loss = 0.0;
  SolveReport report;
  bool skipped = false;
  std::string note;
};

/// Identify on the earliest prefix of every track and score the result on
/// the full data. Fractions that leave fewer than two ground-truth samples
/// are skipped with a note.
inline std::vector<SweepPoint> data_efficiency_sweep(const IdentificationProblem& problem,
                                                     const std::vector<double>& fractions,
                                                     const Vec4& x0 = Vec4::Ones(),
                                                     const IdentifyOptions& opts = {}) {
  problem.validate();
  detail::PreparedProblem full(problem);

  std::vector<SweepPoint> points;
  points.reserve(fractions.size());
  for (double fraction : fractions) {
    SweepPoint point;
    point.fraction = fraction;
    if (!(fraction > 0.0 && fraction <= 1.0)) {
      point.skipped = true;
      point.note = "fraction outside (0, 1]";
      points.push_back(std::move(point));
      continue;
    }

    IdentificationProblem truncated = problem;
    bool viable = true;
    for (std::size_t ti = 0; ti < problem.trajectories.size(); ++ti) {
      const TrajectoryData& td = problem.trajectories[ti];
      const int n_gt = td.track.size();
      const int keep = static_cast<int>(std::ceil(fraction * n_gt));
      if (keep < 2) {
        viable = false;
        break;
      }
      TrajectoryData& cut = truncated.trajectories[ti];
      cut.track.samples.assign(td.track.samples.begin(), td.track.samples.begin() + keep);
      // Keep the schedule through one step past the last retained sample so
      // that sample still lands on an interval start.
      const LossContext ctx = prepare_loss(td.schedule, td.track, problem.loss_options);
      int last_step = -1;
      for (const auto& [step, k] : ctx.matches) {
        if (k <= keep - 1) last_step = std::max(last_step, step);
      }
      if (last_step < 0) {
        viable = false;
        break;
      }
      const int n_keep_steps = std::min(td.schedule.steps(), last_step + 1);
      cut.schedule.t.assign(td.schedule.t.begin(), td.schedule.t.begin() + n_keep_steps + 1);
      cut.schedule.omega_s.assign(td.schedule.omega_s.begin(),
                                  td.schedule.omega_s.begin() + n_keep_steps);
    }
    if (!viable) {
      point.skipped = true;
      point.note = "fewer than two ground-truth samples remain";
      points.push_back(std::move(point));
      continue;
    }

    point.report = identify_quasi_newton(truncated, x0, opts);
    point.full_data_loss = full.loss(point.report.mu_hat.mu);
    points.push_back(std::move(point));
  }
  return points;
}

} // namespace mecasim
