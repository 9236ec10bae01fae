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
#include <functional>
#include <numeric>
#include <random>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace mecasim {

struct CmaOptions {
  int lambda = 8;      // population size
  double sigma0 = 0.3; // initial step size
  std::uint64_t seed = 42;
  int max_evals = 5000;
  double f_spread_tol = 1e-10; // population min-to-max objective spread
};

struct CmaResult {
  Eigen::VectorXd x;
  double f = 0.0;
  int generations = 0;
  int function_evals = 0;
  bool converged = false;
  std::vector<std::pair<int, double>> loss_curve;
};

/// (mu/mu_w, lambda) covariance matrix adaptation evolution strategy with
/// rank-1 and rank-mu covariance updates. Fully deterministic for a fixed
/// seed.
inline CmaResult minimize_cmaes(const std::function<double(const Eigen::VectorXd&)>& f,
                                const Eigen::VectorXd& x0, const CmaOptions& opts = {}) {
  using Eigen::MatrixXd;
  using Eigen::VectorXd;
  const int n = static_cast<int>(x0.size());
  const int lambda = opts.lambda;
  const int mu = lambda / 2;

  VectorXd weights(mu);
  for (int i = 0; i < mu; ++i) {
    weights[i] = std::log(mu + 0.5) - std::log(static_cast<double>(i + 1));
  }
  weights /= weights.sum();
  const double mu_eff = 1.0 / weights.squaredNorm();

  const double cc = (4.0 + mu_eff / n) / (n + 4.0 + 2.0 * mu_eff / n);
  const double cs = (mu_eff + 2.0) / (n + mu_eff + 5.0);
  const double c1 = 2.0 / ((n + 1.3) * (n + 1.3) + mu_eff);
  const double cmu = std::min(1.0 - c1, 2.0 * (mu_eff - 2.0 + 1.0 / mu_eff) /
                                            ((n + 2.0) * (n + 2.0) + mu_eff));
  const double damps =
      1.0 + 2.0 * std::max(0.0, std::sqrt((mu_eff - 1.0) / (n + 1.0)) - 1.0) + cs;
  const double chi_n =
      std::sqrt(static_cast<double>(n)) * (1.0 - 1.0 / (4.0 * n) + 1.0 / (21.0 * n * n));

  VectorXd mean = x0;
  double sigma = opts.sigma0;
  MatrixXd C = MatrixXd::Identity(n, n);
  VectorXd pc = VectorXd::Zero(n);
  VectorXd ps = VectorXd::Zero(n);

  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  CmaResult res;
  res.x = x0;
  res.f = f(x0);
  res.function_evals = 1;
  res.loss_curve.emplace_back(0, res.f);

  std::vector<VectorXd> zs(static_cast<std::size_t>(lambda), VectorXd(n));
  std::vector<VectorXd> xs(static_cast<std::size_t>(lambda), VectorXd(n));
  std::vector<double> fs(static_cast<std::size_t>(lambda));
  std::vector<int> order(static_cast<std::size_t>(lambda));

  while (res.function_evals + lambda <= opts.max_evals) {
    res.generations++;
    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(C);
    const VectorXd D = eig.eigenvalues().cwiseMax(1e-20).cwiseSqrt();
    const MatrixXd& Bm = eig.eigenvectors();
    const MatrixXd BD = Bm * D.asDiagonal();

    for (int k = 0; k < lambda; ++k) {
      auto& z = zs[static_cast<std::size_t>(k)];
      for (int i = 0; i < n; ++i) z[i] = gauss(rng);
      xs[static_cast<std::size_t>(k)] = mean + sigma * (BD * z);
      fs[static_cast<std::size_t>(k)] = f(xs[static_cast<std::size_t>(k)]);
      res.function_evals++;
    }
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      return fs[static_cast<std::size_t>(a)] < fs[static_cast<std::size_t>(b)];
    });

    const VectorXd old_mean = mean;
    VectorXd zw = VectorXd::Zero(n);
    mean.setZero();
    for (int i = 0; i < mu; ++i) {
      const int k = order[static_cast<std::size_t>(i)];
      mean += weights[i] * xs[static_cast<std::size_t>(k)];
      zw += weights[i] * zs[static_cast<std::size_t>(k)];
    }

    ps = (1.0 - cs) * ps + std::sqrt(cs * (2.0 - cs) * mu_eff) * (Bm * zw);
    const double hsig_threshold =
        (1.4 + 2.0 / (n + 1.0)) * chi_n *
        std::sqrt(1.0 - std::pow(1.0 - cs, 2.0 * res.generations));
    const double hsig = ps.norm() < hsig_threshold ? 1.0 : 0.0;
    pc = (1.0 - cc) * pc +
         hsig * std::sqrt(cc * (2.0 - cc) * mu_eff) * (mean - old_mean) / sigma;

    MatrixXd rank_mu = MatrixXd::Zero(n, n);
    for (int i = 0; i < mu; ++i) {
      const int k = order[static_cast<std::size_t>(i)];
      const VectorXd yk = (xs[static_cast<std::size_t>(k)] - old_mean) / sigma;
      rank_mu += weights[i] * yk * yk.transpose();
    }
    C = (1.0 - c1 - cmu) * C +
        c1 * (pc * pc.transpose() + (1.0 - hsig) * cc * (2.0 - cc) * C) + cmu * rank_mu;
    C = 0.5 * (C + C.transpose());
    sigma *= std::exp((cs / damps) * (ps.norm() / chi_n - 1.0));

    const int best = order[0];
    if (fs[static_cast<std::size_t>(best)] < res.f) {
      res.f = fs[static_cast<std::size_t>(best)];
      res.x = xs[static_cast<std::size_t>(best)];
    }
    res.loss_curve.emplace_back(res.generations, res.f);

    const double spread = fs[static_cast<std::size_t>(order[static_cast<std::size_t>(
                              lambda - 1)])] -
                          fs[static_cast<std::size_t>(best)];
    if (spread < opts.f_spread_tol) {
      res.converged = true;
      break;
    }
  }
  return res;
}

} // namespace mecasim
