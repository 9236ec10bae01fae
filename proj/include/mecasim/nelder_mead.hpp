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
#include <functional>
#include <numeric>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace mecasim {

struct SimplexOptions {
  double reflection = 1.0;
  double expansion = 2.0;
  double contraction = 0.5;
  double shrink = 0.5;
  double initial_edge = 0.25;
  double diameter_tol = 1e-8;
  int max_evals = 2000;
};

struct SimplexResult {
  Eigen::VectorXd x;
  double f = 0.0;
  int iterations = 0;
  int function_evals = 0;
  bool converged = false;
  std::vector<std::pair<int, double>> loss_curve;
};

/// Downhill simplex (Nelder-Mead). Unconstrained; callers that need bounds
/// reparameterize the objective instead.
inline SimplexResult minimize_simplex(const std::function<double(const Eigen::VectorXd&)>& f,
                                      const Eigen::VectorXd& x0,
                                      const SimplexOptions& opts = {}) {
  const int n = static_cast<int>(x0.size());
  SimplexResult res;

  std::vector<Eigen::VectorXd> v(static_cast<std::size_t>(n) + 1, x0);
  std::vector<double> fv(static_cast<std::size_t>(n) + 1);
  for (int i = 1; i <= n; ++i) v[static_cast<std::size_t>(i)][i - 1] += opts.initial_edge;
  for (int i = 0; i <= n; ++i) {
    fv[static_cast<std::size_t>(i)] = f(v[static_cast<std::size_t>(i)]);
    res.function_evals++;
  }

  std::vector<int> order(static_cast<std::size_t>(n) + 1);
  const auto sort_simplex = [&] {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      return fv[static_cast<std::size_t>(a)] < fv[static_cast<std::size_t>(b)];
    });
    std::vector<Eigen::VectorXd> v2(v.size());
    std::vector<double> f2(fv.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
      v2[i] = v[static_cast<std::size_t>(order[i])];
      f2[i] = fv[static_cast<std::size_t>(order[i])];
    }
    v.swap(v2);
    fv.swap(f2);
  };

  const auto diameter = [&] {
    double d = 0.0;
    for (std::size_t i = 1; i < v.size(); ++i) d = std::max(d, (v[i] - v[0]).norm());
    return d;
  };

  sort_simplex();
  res.loss_curve.emplace_back(0, fv[0]);
  while (res.function_evals < opts.max_evals) {
    if (diameter() < opts.diameter_tol) {
      res.converged = true;
      break;
    }
    res.iterations++;

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < n; ++i) centroid += v[static_cast<std::size_t>(i)];
    centroid /= static_cast<double>(n);

    const Eigen::VectorXd& worst = v[static_cast<std::size_t>(n)];
    const Eigen::VectorXd xr = centroid + opts.reflection * (centroid - worst);
    const double fr = f(xr);
    res.function_evals++;

    if (fr < fv[0]) {
      const Eigen::VectorXd xe = centroid + opts.expansion * (xr - centroid);
      const double fe = f(xe);
      res.function_evals++;
      if (fe < fr) {
        v[static_cast<std::size_t>(n)] = xe;
        fv[static_cast<std::size_t>(n)] = fe;
      } else {
        v[static_cast<std::size_t>(n)] = xr;
        fv[static_cast<std::size_t>(n)] = fr;
      }
    } else if (fr < fv[static_cast<std::size_t>(n - 1)]) {
      v[static_cast<std::size_t>(n)] = xr;
      fv[static_cast<std::size_t>(n)] = fr;
    } else {
      const bool outside = fr < fv[static_cast<std::size_t>(n)];
      const Eigen::VectorXd base = outside ? xr : worst;
      const Eigen::VectorXd xc = centroid + opts.contraction * (base - centroid);
      const double fc = f(xc);
      res.function_evals++;
      if (fc < std::min(fr, fv[static_cast<std::size_t>(n)])) {
        v[static_cast<std::size_t>(n)] = xc;
        fv[static_cast<std::size_t>(n)] = fc;
      } else {
        for (std::size_t i = 1; i < v.size(); ++i) {
          v[i] = v[0] + opts.shrink * (v[i] - v[0]);
          fv[i] = f(v[i]);
          res.function_evals++;
        }
      }
    }
    sort_simplex();
    res.loss_curve.emplace_back(res.iterations, fv[0]);
  }
  res.x = v[0];
  res.f = fv[0];
  return res;
}

} // namespace mecasim
