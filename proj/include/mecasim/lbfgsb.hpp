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

#include <deque>
#include <functional>
#include <limits>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace mecasim {

/// Objective callback: returns f(x); fills *grad when non-null.
using BoxObjective =
    std::function<double(const Eigen::VectorXd&, Eigen::VectorXd* grad)>;

struct BoxSolveOptions {
  int max_iterations = 200;
  int memory = 10;             // number of retained (s, y) pairs
  double pg_tol = 1e-8;        // projected-gradient infinity norm
  double loss_rel_tol = 1e-12; // relative decrease considered converged
  double armijo_c1 = 1e-4;
  int max_linesearch = 40;
  /// Observer invoked after every accepted iterate (iteration, x, f).
  std::function<void(int, const Eigen::VectorXd&, double)> on_iterate;
};

struct BoxSolveResult {
  Eigen::VectorXd x;
  double f = std::numeric_limits<double>::infinity();
  int iterations = 0;
  int function_evals = 0;
  int gradient_evals = 0;
  bool converged = false;
  std::vector<std::pair<int, double>> loss_curve;
};

/// Bound-constrained limited-memory quasi-Newton minimization: L-BFGS
/// directions with iterates projected onto the box and an Armijo
/// backtracking search along the projected path. Behaves like L-BFGS-B on
/// low-dimensional boxes without the generalized Cauchy point machinery.
inline BoxSolveResult minimize_box_lbfgs(const BoxObjective& fg,
                                         const Eigen::VectorXd& lower,
                                         const Eigen::VectorXd& upper,
                                         const Eigen::VectorXd& x0,
                                         const BoxSolveOptions& opts = {}) {
  const auto clamp = [&](const Eigen::VectorXd& v) -> Eigen::VectorXd {
    return v.cwiseMax(lower).cwiseMin(upper);
  };

  BoxSolveResult res;
  res.x = clamp(x0);
  Eigen::VectorXd g(x0.size());
  res.f = fg(res.x, &g);
  res.function_evals++;
  res.gradient_evals++;
  res.loss_curve.emplace_back(0, res.f);
  if (opts.on_iterate) opts.on_iterate(0, res.x, res.f);

  std::deque<std::pair<Eigen::VectorXd, Eigen::VectorXd>> pairs; // (s, y)

  const auto projected_gradient = [&](const Eigen::VectorXd& x,
                                      const Eigen::VectorXd& grad) {
    Eigen::VectorXd pg = grad;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      if (x[i] <= lower[i] && grad[i] > 0.0) pg[i] = 0.0;
      if (x[i] >= upper[i] && grad[i] < 0.0) pg[i] = 0.0;
    }
    return pg;
  };

  const auto two_loop_direction = [&](const Eigen::VectorXd& grad) {
    Eigen::VectorXd q = grad;
    std::vector<double> alpha(pairs.size());
    for (int i = static_cast<int>(pairs.size()) - 1; i >= 0; --i) {
      const auto& [s, y] = pairs[static_cast<std::size_t>(i)];
      alpha[static_cast<std::size_t>(i)] = s.dot(q) / y.dot(s);
      q -= alpha[static_cast<std::size_t>(i)] * y;
    }
    if (!pairs.empty()) {
      const auto& [s, y] = pairs.back();
      q *= s.dot(y) / y.dot(y);
    }
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      const auto& [s, y] = pairs[i];
      const double beta = y.dot(q) / y.dot(s);
      q += (alpha[i] - beta) * s;
    }
    return Eigen::VectorXd(-q);
  };

  for (int it = 1; it <= opts.max_iterations; ++it) {
    const Eigen::VectorXd pg = projected_gradient(res.x, g);
    if (pg.lpNorm<Eigen::Infinity>() < opts.pg_tol) {
      res.converged = true;
      return res;
    }

    Eigen::VectorXd dir = two_loop_direction(g);
    if (dir.dot(g) >= 0.0) dir = -g; // fall back to steepest descent

    double step = 1.0;
    Eigen::VectorXd x_new;
    double f_new = res.f;
    bool accepted = false;
    for (int ls = 0; ls < opts.max_linesearch; ++ls) {
      x_new = clamp(res.x + step * dir);
      const Eigen::VectorXd delta = x_new - res.x;
      if (delta.lpNorm<Eigen::Infinity>() == 0.0) break;
      f_new = fg(x_new, nullptr);
      res.function_evals++;
      if (f_new <= res.f + opts.armijo_c1 * g.dot(delta)) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      // Line-search failure: report the best point found so far.
      res.iterations = it - 1;
      res.converged = false;
      return res;
    }

    Eigen::VectorXd g_new(res.x.size());
    const double f_check = fg(x_new, &g_new);
    res.function_evals++;
    res.gradient_evals++;
    (void)f_check;

    const Eigen::VectorXd s = x_new - res.x;
    const Eigen::VectorXd y = g_new - g;
    if (s.dot(y) > 1e-10 * s.norm() * y.norm()) {
      pairs.emplace_back(s, y);
      if (static_cast<int>(pairs.size()) > opts.memory) pairs.pop_front();
    }

    const double decrease = res.f - f_new;
    res.x = x_new;
    res.f = f_new;
    g = g_new;
    res.iterations = it;
    res.loss_curve.emplace_back(it, res.f);
    if (opts.on_iterate) opts.on_iterate(it, res.x, res.f);
    if (decrease <= opts.loss_rel_tol * std::max(1.0, std::abs(res.f))) {
      res.converged = true;
      return res;
    }
  }
  // Iteration budget exhausted; the projected gradient did not get small.
  res.converged = false;
  return res;
}

} // namespace mecasim
