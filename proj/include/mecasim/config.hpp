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

#include <filesystem>
#include <fstream>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mecasim/control.hpp"
#include "mecasim/identify.hpp"
#include "mecasim/types.hpp"

namespace mecasim {

struct TrajectoryFiles {
  std::string ground_truth;
  std::string controls;
};

/// Experiment description loaded from strict JSON: unknown keys are
/// rejected so typos fail loudly, and referenced files must exist at load
/// time.
struct ExperimentConfig {
  RobotParams robot;
  LossWeights weights;
  BoxSolveOptions quasi_newton;
  SimplexOptions nelder_mead;
  CmaOptions cmaes;
  std::uint64_t seed = 42;
  std::vector<TrajectoryFiles> trajectories;
  ReferenceCurve curve;
  std::string output_dir = "out";
  std::vector<double> sweep_fractions = {0.2, 0.4, 0.6, 0.8, 1.0};
  int plan_substeps = 4;
};

namespace detail {

inline void require_keys(const nlohmann::json& j, const std::set<std::string>& allowed,
                         const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (allowed.find(it.key()) == allowed.end()) {
      throw std::invalid_argument("config: unknown key '" + it.key() + "' in " + where);
    }
  }
}

template <typename T>
void maybe(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

inline ReferenceCurve parse_curve(const nlohmann::json& j) {
  require_keys(j,
               {"kind", "center", "radius", "start_angle", "angular_span", "scale",
                "right_lobe_forward", "left_lobe_forward", "points", "duration",
                "waypoint_rate"},
               "curve");
  ReferenceCurve curve;
  maybe(j, "duration", curve.duration);
  maybe(j, "waypoint_rate", curve.waypoint_rate);
  const std::string kind = j.value("kind", std::string("circle"));
  if (kind == "circle") {
    CircleCurve c;
    if (j.contains("center")) {
      const auto v = j.at("center").get<std::vector<double>>();
      if (v.size() != 2) throw std::invalid_argument("config: curve center needs 2 values");
      c.center = Vec2(v[0], v[1]);
    }
    maybe(j, "radius", c.radius);
    maybe(j, "start_angle", c.start_angle);
    maybe(j, "angular_span", c.angular_span);
    curve.shape = c;
  } else if (kind == "eight") {
    EightCurve e;
    if (j.contains("center")) {
      const auto v = j.at("center").get<std::vector<double>>();
      if (v.size() != 2) throw std::invalid_argument("config: curve center needs 2 values");
      e.center = Vec2(v[0], v[1]);
    }
    maybe(j, "scale", e.scale);
    maybe(j, "right_lobe_forward", e.right_lobe_forward);
    maybe(j, "left_lobe_forward", e.left_lobe_forward);
    curve.shape = e;
  } else if (kind == "polyline") {
    PolylineCurve p;
    for (const auto& pt : j.at("points")) {
      const auto v = pt.get<std::vector<double>>();
      if (v.size() != 2) throw std::invalid_argument("config: polyline point needs 2 values");
      p.points.emplace_back(v[0], v[1]);
    }
    curve.shape = p;
  } else {
    throw std::invalid_argument("config: unknown curve kind '" + kind + "'");
  }
  return curve;
}

} // namespace detail

inline ExperimentConfig parse_config(const nlohmann::json& j,
                                     const std::filesystem::path& base_dir = {}) {
  detail::require_keys(j,
                       {"robot", "loss", "optimizer", "seed", "trajectories", "curve",
                        "output_dir", "sweep_fractions", "plan_substeps"},
                       "top level");
  ExperimentConfig cfg;
  if (j.contains("robot")) {
    const auto& r = j.at("robot");
    detail::require_keys(r,
                         {"mass", "gravity", "wheel_radius", "stall_torque",
                          "half_length_la", "half_width_lb", "wheel_inertia", "omega_max"},
                         "robot");
    detail::maybe(r, "mass", cfg.robot.mass_M);
    detail::maybe(r, "gravity", cfg.robot.gravity_g);
    detail::maybe(r, "wheel_radius", cfg.robot.wheel_radius_R);
    detail::maybe(r, "stall_torque", cfg.robot.stall_torque_Ts);
    detail::maybe(r, "half_length_la", cfg.robot.half_length_la);
    detail::maybe(r, "half_width_lb", cfg.robot.half_width_lb);
    detail::maybe(r, "wheel_inertia", cfg.robot.wheel_inertia_J);
    detail::maybe(r, "omega_max", cfg.robot.omega_max);
    cfg.robot.validate();
  }
  if (j.contains("loss")) {
    const auto& l = j.at("loss");
    detail::require_keys(l, {"w1", "w2"}, "loss");
    detail::maybe(l, "w1", cfg.weights.spline_w1);
    detail::maybe(l, "w2", cfg.weights.ground_truth_w2);
    cfg.weights.validate();
  }
  if (j.contains("optimizer")) {
    const auto& o = j.at("optimizer");
    detail::require_keys(o,
                         {"max_iterations", "memory", "pg_tol", "loss_rel_tol",
                          "nm_max_evals", "nm_diameter_tol", "cma_lambda", "cma_sigma0",
                          "cma_max_evals"},
                         "optimizer");
    detail::maybe(o, "max_iterations", cfg.quasi_newton.max_iterations);
    detail::maybe(o, "memory", cfg.quasi_newton.memory);
    detail::maybe(o, "pg_tol", cfg.quasi_newton.pg_tol);
    detail::maybe(o, "loss_rel_tol", cfg.quasi_newton.loss_rel_tol);
    detail::maybe(o, "nm_max_evals", cfg.nelder_mead.max_evals);
    detail::maybe(o, "nm_diameter_tol", cfg.nelder_mead.diameter_tol);
    detail::maybe(o, "cma_lambda", cfg.cmaes.lambda);
    detail::maybe(o, "cma_sigma0", cfg.cmaes.sigma0);
    detail::maybe(o, "cma_max_evals", cfg.cmaes.max_evals);
  }
  detail::maybe(j, "seed", cfg.seed);
  detail::maybe(j, "output_dir", cfg.output_dir);
  detail::maybe(j, "sweep_fractions", cfg.sweep_fractions);
  detail::maybe(j, "plan_substeps", cfg.plan_substeps);
  if (j.contains("curve")) cfg.curve = detail::parse_curve(j.at("curve"));
  if (j.contains("trajectories")) {
    for (const auto& t : j.at("trajectories")) {
      detail::require_keys(t, {"ground_truth", "controls"}, "trajectories");
      TrajectoryFiles tf;
      tf.ground_truth = (base_dir / t.at("ground_truth").get<std::string>()).string();
      tf.controls = (base_dir / t.at("controls").get<std::string>()).string();
      for (const std::string& p : {tf.ground_truth, tf.controls}) {
        if (!std::filesystem::exists(p)) {
          throw std::invalid_argument("config: referenced file does not exist: " + p);
        }
      }
      cfg.trajectories.push_back(std::move(tf));
    }
  }
  return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument("config: " + path + ": " + e.what());
  }
  return parse_config(j, std::filesystem::path(path).parent_path());
}

/// MECANUM_SEED in the environment overrides the config seed.
inline void apply_env_seed(ExperimentConfig& cfg) {
  if (const char* env = std::getenv("MECANUM_SEED")) {
    cfg.seed = static_cast<std::uint64_t>(std::stoull(env));
  }
}

} // namespace mecasim
