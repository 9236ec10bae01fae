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

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "mecasim/mecasim.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace mecasim;

namespace {

// Exit codes: 0 success, 1 numeric criterion or solver non-convergence
// (results still written), 2 input error.
constexpr int kExitOk = 0;
constexpr int kExitNotConverged = 1;
constexpr int kExitInputError = 2;

Vec4 parse_vec4(const std::string& text, const std::string& what) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) values.push_back(std::stod(tok));
  if (values.size() != 4) {
    throw std::invalid_argument(what + ": expected four comma-separated values");
  }
  return Vec4(values[0], values[1], values[2], values[3]);
}

json solve_report_json(const SolveReport& r) {
  // wall time deliberately omitted: command outputs are byte-reproducible.
  json j;
  j["solver"] = r.solver;
  j["mu_hat"] = {r.mu_hat.mu[0], r.mu_hat.mu[1], r.mu_hat.mu[2], r.mu_hat.mu[3]};
  j["final_loss"] = r.final_loss;
  j["iterations"] = r.iterations;
  j["function_evals"] = r.function_evals;
  j["gradient_evals"] = r.gradient_evals;
  j["converged"] = r.converged;
  json curve = json::array();
  for (const auto& [it, f] : r.loss_curve) curve.push_back({it, f});
  j["loss_curve"] = std::move(curve);
  return j;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << text;
}

void write_loss_curve_csv(const fs::path& path,
                          const std::vector<std::pair<int, double>>& curve) {
  std::ostringstream out;
  out << "iteration,loss\n";
  for (const auto& [it, f] : curve) {
    out << it << ',' << detail::format_double(f) << '\n';
  }
  write_text(path, out.str());
}

struct LoadedTrajectory {
  ControlSchedule schedule;
  GroundTruthTrack track;
};

LoadedTrajectory load_pair(const std::string& gt_file, const std::string& ctrl_file,
                           const RobotParams& params) {
  LoadedTrajectory t;
  t.track = read_ground_truth_csv(gt_file);
  t.schedule = read_control_csv(ctrl_file, params);
  return t;
}

SolveReport run_solver(const IdentificationProblem& problem, const std::string& solver,
                       const Vec4& x0, const ExperimentConfig& cfg) {
  IdentifyOptions opts;
  opts.quasi_newton = cfg.quasi_newton;
  opts.nelder_mead = cfg.nelder_mead;
  opts.cmaes = cfg.cmaes;
  opts.cmaes.seed = cfg.seed;
  if (solver == "qn") return identify_quasi_newton(problem, x0, opts);
  if (solver == "nm") return identify_nelder_mead(problem, x0, opts);
  if (solver == "cmaes") return identify_cmaes(problem, x0, opts);
  throw std::invalid_argument("unknown solver '" + solver + "'");
}

// ---------------------------------------------------------------------------

int cmd_simulate(const ExperimentConfig& cfg, const Vec4& mu,
                 const std::string& schedule_file, const fs::path& out_dir,
                 const std::string& name) {
  const ControlSchedule schedule = read_control_csv(schedule_file, cfg.robot);
  const Trajectory traj = simulate(cfg.robot, FrictionCoeffs(mu), schedule, Pose{});
  fs::create_directories(out_dir);
  write_trajectory_csv((out_dir / (name + "_trajectory.csv")).string(), traj);
  SvgPlot plot;
  plot.add_trajectory("predicted", "#2060c0", traj);
  plot.write((out_dir / (name + ".svg")).string());
  std::cout << "simulate: wrote " << traj.samples.size() << " poses to "
            << (out_dir / (name + "_trajectory.csv")).string() << "\n";
  return kExitOk;
}

int cmd_identify(const ExperimentConfig& cfg,
                 const std::vector<LoadedTrajectory>& trajectories,
                 const std::string& solver, const Vec4& x0, bool joint, int jobs,
                 bool show_uranus, const fs::path& out_dir) {
  fs::create_directories(out_dir);

  std::vector<IdentificationProblem> problems;
  if (joint) {
    IdentificationProblem p;
    p.params = cfg.robot;
    p.weights = cfg.weights;
    for (const LoadedTrajectory& t : trajectories) {
      p.trajectories.push_back({t.schedule, t.track});
    }
    problems.push_back(std::move(p));
  } else {
    for (const LoadedTrajectory& t : trajectories) {
      IdentificationProblem p;
      p.params = cfg.robot;
      p.weights = cfg.weights;
      p.trajectories.push_back({t.schedule, t.track});
      problems.push_back(std::move(p));
    }
  }

  std::vector<SolveReport> reports(problems.size());
  const auto solve_one = [&](std::size_t i) {
    reports[i] = run_solver(problems[i], solver, x0, cfg);
  };
  if (jobs > 1 && problems.size() > 1) {
    std::vector<std::future<void>> futures;
    std::size_t next = 0;
    while (next < problems.size()) {
      futures.clear();
      for (int j = 0; j < jobs && next < problems.size(); ++j, ++next) {
        futures.push_back(std::async(std::launch::async, solve_one, next));
      }
      for (auto& f : futures) f.get();
    }
  } else {
    for (std::size_t i = 0; i < problems.size(); ++i) solve_one(i);
  }

  bool all_converged = true;
  for (std::size_t i = 0; i < problems.size(); ++i) {
    const SolveReport& r = reports[i];
    all_converged = all_converged && r.converged;
    const std::string tag = problems.size() > 1 || !joint
                                ? "_" + std::to_string(i + 1)
                                : "";
    write_text(out_dir / ("report" + tag + ".json"), solve_report_json(r).dump(2) + "\n");
    write_loss_curve_csv(out_dir / ("loss_curve" + tag + ".csv"), r.loss_curve);

    // Overlay: recorded track, identified prediction, and optionally the
    // frictionless prediction of the raw kinematic model.
    const TrajectoryData& td = problems[i].trajectories.front();
    SvgPlot plot;
    plot.add_track("ground truth", "#c03030", td.track);
    const Pose start = td.track.start_pose();
    plot.add_trajectory("identified model", "#30a030",
                        simulate(cfg.robot, r.mu_hat, td.schedule, start));
    if (show_uranus) {
      plot.add_trajectory("frictionless model", "#3060c0",
                          simulate(cfg.robot, FrictionCoeffs(), td.schedule, start));
    }
    plot.write((out_dir / ("overlay" + tag + ".svg")).string());

    std::cout << "identify[" << (i + 1) << "/" << problems.size() << "] solver=" << solver
              << " mu_hat=(" << r.mu_hat.mu.transpose() << ") loss=" << r.final_loss
              << " iters=" << r.iterations << " converged=" << (r.converged ? "yes" : "no")
              << "\n";
    std::cerr << "identify[" << (i + 1) << "] wall_time_s=" << r.wall_time_s << "\n";
  }
  return all_converged ? kExitOk : kExitNotConverged;
}

int cmd_gradcheck(const ExperimentConfig& cfg, const LoadedTrajectory& traj,
                  const Vec4& mu, double h, double tol) {
  IdentificationProblem problem;
  problem.params = cfg.robot;
  problem.weights = cfg.weights;
  problem.trajectories.push_back({traj.schedule, traj.track});
  const GradCheckReport report = gradient_check(problem, mu, h);

  std::cout << "wheel       analytic          numeric           rel_err\n";
  for (int j = 0; j < 4; ++j) {
    const GradCheckRow& row = report.rows[static_cast<std::size_t>(j)];
    std::cout << "  " << (j + 1) << "   " << std::setw(16) << std::setprecision(9)
              << row.analytic << "  " << std::setw(16) << row.numeric << "  "
              << std::setw(12) << row.rel_err << "\n";
  }
  std::cout << "max_rel_err=" << report.max_rel_err << " (tolerance " << tol << ")\n";
  return report.max_rel_err <= tol ? kExitOk : kExitNotConverged;
}

FrictionCoeffs resolve_mu_source(const ExperimentConfig& cfg, const std::string& source,
                                 const std::string& mu_file, const std::string& net_file,
                                 double nominal_duty) {
  if (source == "file") {
    std::ifstream in(mu_file);
    if (!in) throw std::invalid_argument("cannot open mu file '" + mu_file + "'");
    json j;
    in >> j;
    const auto v = j.at("mu").get<std::vector<double>>();
    if (v.size() != 4) throw std::invalid_argument("mu file: need 4 values");
    return FrictionCoeffs(Vec4(v[0], v[1], v[2], v[3]));
  }
  if (source == "net") {
    std::ifstream in(net_file);
    if (!in) throw std::invalid_argument("cannot open net file '" + net_file + "'");
    json j;
    in >> j;
    const Mlp net = mlp_from_json(j);
    // The network maps commanded wheel speeds to friction; evaluate it at a
    // nominal command to obtain the constant friction used for planning.
    const Vec4 nominal = Vec4::Constant(nominal_duty * cfg.robot.omega_max);
    return predict_friction(net, nominal);
  }
  throw std::invalid_argument("unknown --mu-source '" + source + "'");
}

ReferenceCurve resolve_curve(const ExperimentConfig& cfg, const std::string& curve_kind,
                             const std::string& curve_file) {
  if (curve_kind.empty()) return cfg.curve;
  ReferenceCurve curve = cfg.curve;
  if (curve_kind == "circle") {
    if (!std::holds_alternative<CircleCurve>(curve.shape)) curve.shape = CircleCurve{};
  } else if (curve_kind == "eight") {
    if (!std::holds_alternative<EightCurve>(curve.shape)) curve.shape = EightCurve{};
  } else if (curve_kind == "file") {
    const GroundTruthTrack pts = read_ground_truth_csv(curve_file);
    PolylineCurve poly;
    for (const GtSample& s : pts.samples) poly.points.emplace_back(s.x, s.y);
    curve.shape = poly;
    curve.duration = pts.samples.back().t - pts.samples.front().t;
    curve.waypoint_rate = static_cast<double>(pts.samples.size() - 1) / curve.duration;
  } else {
    throw std::invalid_argument("unknown --curve '" + curve_kind + "'");
  }
  return curve;
}

int cmd_follow(const ExperimentConfig& cfg, const ReferenceCurve& curve,
               const FrictionCoeffs& mu_plan, const std::optional<Vec4>& mu_true,
               const fs::path& out_dir) {
  const std::vector<Waypoint> wps = discretize(curve);

  // Start at the first waypoint, heading aligned with the initial tangent
  // (body +Y is forward).
  const Vec2 tangent = (wps[1].position - wps[0].position).normalized();
  const Pose start{wps[0].position.x(), wps[0].position.y(),
                   std::atan2(tangent.y(), tangent.x()) - M_PI / 2.0};

  PlanOptions popts;
  popts.substeps = cfg.plan_substeps;
  popts.weights = cfg.weights;
  popts.solver.max_iterations = std::max(cfg.quasi_newton.max_iterations, 400);
  const PlanResult plan = plan_controls(cfg.robot, mu_plan, curve, start, popts);

  const FrictionCoeffs mu_roll =
      mu_true.has_value() ? FrictionCoeffs(*mu_true) : mu_plan;
  const auto [rolled, tracking] = rollout(cfg.robot, mu_roll, plan.plan, start, curve);

  fs::create_directories(out_dir);
  ControlSchedule plan_schedule;
  plan_schedule.t = plan.plan.segment_times;
  plan_schedule.omega_s = plan.plan.omega_s;
  write_control_csv((out_dir / "plan.csv").string(), plan_schedule);
  write_trajectory_csv((out_dir / "predicted.csv").string(), plan.predicted);
  write_trajectory_csv((out_dir / "rollout.csv").string(), rolled);

  SvgPlot plot;
  std::vector<Vec2> ref_pts;
  for (const Waypoint& w : wps) ref_pts.push_back(w.position);
  plot.add_series("reference", "#e08020", ref_pts);
  plot.add_trajectory("predicted", "#2060c0", plan.predicted);
  plot.add_trajectory("rollout", "#30a030", rolled);
  plot.write((out_dir / "follow.svg").string());

  json j;
  j["planner"] = solve_report_json(plan.report);
  j["predicted_mean_deviation"] = plan.predicted_tracking.mean_deviation;
  j["predicted_max_deviation"] = plan.predicted_tracking.max_deviation;
  j["rollout_mean_deviation"] = tracking.mean_deviation;
  j["rollout_max_deviation"] = tracking.max_deviation;
  j["rollout_final_speed"] = tracking.final_speed;
  write_text(out_dir / "report.json", j.dump(2) + "\n");

  std::cout << "follow: mean deviation " << tracking.mean_deviation << " m, max "
            << tracking.max_deviation << " m, final speed " << tracking.final_speed
            << " m/s\n";
  std::cerr << "follow: plan wall_time_s=" << plan.report.wall_time_s << "\n";
  return plan.report.converged ? kExitOk : kExitNotConverged;
}

int cmd_sweep(const ExperimentConfig& cfg, const std::vector<LoadedTrajectory>& trajectories,
              std::vector<double> fractions, const fs::path& out_dir) {
  IdentificationProblem problem;
  problem.params = cfg.robot;
  problem.weights = cfg.weights;
  for (const LoadedTrajectory& t : trajectories) {
    problem.trajectories.push_back({t.schedule, t.track});
  }
  std::sort(fractions.begin(), fractions.end());
  IdentifyOptions opts;
  opts.quasi_newton = cfg.quasi_newton;
  const auto points = data_efficiency_sweep(problem, fractions, Vec4::Ones(), opts);

  fs::create_directories(out_dir);
  std::ostringstream csv;
  csv << "fraction,loss\n";
  std::vector<Vec2> curve_pts;
  for (const SweepPoint& p : points) {
    if (p.skipped) {
      std::cerr << "sweep: fraction " << p.fraction << " skipped: " << p.note << "\n";
      continue;
    }
    csv << detail::format_double(p.fraction) << ','
        << detail::format_double(p.full_data_loss) << '\n';
    curve_pts.emplace_back(p.fraction, p.full_data_loss);
  }
  write_text(out_dir / "sweep.csv", csv.str());
  SvgPlot plot;
  plot.add_series("full-data loss vs fraction", "#2060c0", curve_pts);
  plot.write((out_dir / "sweep.svg").string());
  std::cout << "sweep: wrote " << curve_pts.size() << " fractions to "
            << (out_dir / "sweep.csv").string() << "\n";
  return kExitOk;
}

int cmd_make_fixtures(const fs::path& out_dir) {
  const RobotParams params;
  fs::create_directories(out_dir);
  json meta;
  meta["friction_law"] =
      "mu_j = 0.3 + 0.1*j + 0.45*min(1, |omega_s_j|/10), wheel index j in 0..3";
  json fixtures = json::array();
  json config_trajs = json::array();
  for (const FixtureSpec& spec : identification_fixtures()) {
    const TrajectoryData data = make_fixture_data(params, spec);
    write_ground_truth_csv((out_dir / (spec.name + "_gt.csv")).string(), data.track);
    write_control_csv((out_dir / (spec.name + "_ctrl.csv")).string(), data.schedule);
    const Vec4 mu = fixture_friction_law(spec.omega_s);
    json f;
    f["name"] = spec.name;
    f["omega_s"] = {spec.omega_s[0], spec.omega_s[1], spec.omega_s[2], spec.omega_s[3]};
    f["mu_star"] = {mu[0], mu[1], mu[2], mu[3]};
    f["duration_s"] = spec.duration_s;
    f["control_hz"] = spec.control_hz;
    f["gt_stride"] = spec.gt_stride;
    fixtures.push_back(std::move(f));
    config_trajs.push_back(
        {{"ground_truth", spec.name + "_gt.csv"}, {"controls", spec.name + "_ctrl.csv"}});
  }

  const Vec4 mu_star(0.3, 0.5, 0.7, 0.9);
  const TrajectoryData recovery = make_recovery_fixture(params, mu_star);
  write_ground_truth_csv((out_dir / "recovery_gt.csv").string(), recovery.track);
  write_control_csv((out_dir / "recovery_ctrl.csv").string(), recovery.schedule);
  const TrajectoryData sweep = make_sweep_fixture(params, mu_star);
  write_ground_truth_csv((out_dir / "sweep_gt.csv").string(), sweep.track);
  write_control_csv((out_dir / "sweep_ctrl.csv").string(), sweep.schedule);
  meta["recovery_mu_star"] = {mu_star[0], mu_star[1], mu_star[2], mu_star[3]};
  meta["sweep_mu_star"] = {mu_star[0], mu_star[1], mu_star[2], mu_star[3]};
  meta["fixtures"] = std::move(fixtures);
  write_text(out_dir / "meta.json", meta.dump(2) + "\n");

  json config;
  config["robot"] = {{"mass", params.mass_M},
                     {"gravity", params.gravity_g},
                     {"wheel_radius", params.wheel_radius_R},
                     {"stall_torque", params.stall_torque_Ts},
                     {"half_length_la", params.half_length_la},
                     {"half_width_lb", params.half_width_lb},
                     {"wheel_inertia", params.wheel_inertia_J},
                     {"omega_max", params.omega_max}};
  config["loss"] = {{"w1", 0.8}, {"w2", 0.2}};
  config["seed"] = 42;
  config["trajectories"] = std::move(config_trajs);
  config["output_dir"] = "out";
  write_text(out_dir / "config.json", config.dump(2) + "\n");

  std::cout << "make-fixtures: wrote 8 identification fixtures, recovery and sweep "
               "fixtures, meta.json and config.json to "
            << out_dir.string() << "\n";
  return kExitOk;
}

int cmd_train_net(const ExperimentConfig& cfg,
                  const std::vector<LoadedTrajectory>& trajectories,
                  const fs::path& out_file, int epochs, double lr) {
  if (trajectories.empty()) {
    throw std::invalid_argument("train-net: config must list trajectories");
  }
  Dataset dataset;
  for (const LoadedTrajectory& t : trajectories) {
    IdentificationProblem problem;
    problem.params = cfg.robot;
    problem.weights = cfg.weights;
    problem.trajectories.push_back({t.schedule, t.track});
    IdentifyOptions opts;
    opts.quasi_newton = cfg.quasi_newton;
    const SolveReport report = identify_quasi_newton(problem, Vec4::Ones(), opts);

    // Time-weighted mean command stands in for the constant per-trajectory
    // command of the recording protocol.
    Vec4 mean_cmd = Vec4::Zero();
    double total = 0.0;
    for (int i = 0; i < t.schedule.steps(); ++i) {
      mean_cmd += t.schedule.dt(i) * t.schedule.omega_s[static_cast<std::size_t>(i)];
      total += t.schedule.dt(i);
    }
    mean_cmd /= total;
    dataset.push_back({Eigen::VectorXd(mean_cmd), Eigen::VectorXd(report.mu_hat.mu)});
    std::cerr << "train-net: identified (" << report.mu_hat.mu.transpose()
              << ") from command (" << mean_cmd.transpose() << ")\n";
  }

  Mlp net = make_mlp({4, 16, 4}, OutputTransform::kTwoSigmoid, cfg.seed,
                     Eigen::VectorXd::Constant(4, cfg.robot.omega_max));
  TrainConfig tc;
  tc.epochs = epochs;
  tc.learning_rate = lr;
  tc.seed = cfg.seed;
  const TrainResult trained = train(std::move(net), dataset, tc);
  if (trained.diverged) {
    std::cerr << "train-net: training diverged\n";
    return kExitNotConverged;
  }
  if (out_file.has_parent_path()) fs::create_directories(out_file.parent_path());
  write_text(out_file, mlp_to_json(trained.net).dump(2) + "\n");
  std::cout << "train-net: final mse " << trained.history.back() << ", wrote "
            << out_file.string() << "\n";
  return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"mecasim: differentiable mecanum-drive simulation, friction "
               "identification, and path-following control"};
  app.require_subcommand(1);

  std::string config_file;
  app.add_option("--config", config_file, "experiment config (JSON)");

  // simulate
  auto* sim = app.add_subcommand("simulate", "forward-simulate a control schedule");
  std::string sim_mu = "0,0,0,0", sim_schedule, sim_out = "out", sim_name = "simulate";
  sim->add_option("--mu", sim_mu, "friction coefficients, comma-separated");
  sim->add_option("--schedule", sim_schedule, "control CSV")->required();
  sim->add_option("--out", sim_out, "output directory");
  sim->add_option("--name", sim_name, "output base name");

  // identify
  auto* ident = app.add_subcommand("identify", "estimate friction from recordings");
  std::vector<std::string> id_gt, id_ctrl;
  std::string id_solver = "qn", id_out = "out", id_x0 = "1,1,1,1";
  bool id_joint = false, id_no_uranus = false;
  int id_jobs = 1;
  ident->add_option("--gt", id_gt, "ground-truth CSV (repeatable)");
  ident->add_option("--schedule", id_ctrl, "control CSV (repeatable)");
  ident->add_option("--solver", id_solver, "qn | nm | cmaes")
      ->check(CLI::IsMember({"qn", "nm", "cmaes"}));
  ident->add_option("--x0", id_x0, "initial friction guess");
  ident->add_option("--out", id_out, "output directory");
  ident->add_option("--jobs", id_jobs, "parallel per-trajectory identifications");
  ident->add_flag("--joint", id_joint, "sum losses over all trajectories");
  ident->add_flag("--no-uranus", id_no_uranus, "omit the frictionless overlay");

  // gradcheck
  auto* gc = app.add_subcommand("gradcheck", "compare analytic and numeric gradients");
  std::string gc_gt, gc_ctrl, gc_mu = "1,1,1,1";
  double gc_h = 1e-6, gc_tol = 1e-4;
  gc->add_option("--gt", gc_gt, "ground-truth CSV")->required();
  gc->add_option("--schedule", gc_ctrl, "control CSV")->required();
  gc->add_option("--mu", gc_mu, "evaluation point");
  gc->add_option("--h", gc_h, "finite-difference step");
  gc->add_option("--tol", gc_tol, "relative error tolerance");

  // follow
  auto* follow = app.add_subcommand("follow", "plan controls to follow a curve");
  std::string fl_curve, fl_curve_file, fl_source = "file", fl_mu_file, fl_net_file;
  std::string fl_out = "out", fl_mu_true;
  double fl_nominal_duty = 0.5;
  follow->add_option("--curve", fl_curve, "circle | eight | file");
  follow->add_option("--curve-file", fl_curve_file, "waypoint CSV for --curve file");
  follow->add_option("--mu-source", fl_source, "file | net")
      ->check(CLI::IsMember({"file", "net"}));
  follow->add_option("--mu-file", fl_mu_file, "JSON with {\"mu\": [...]}");
  follow->add_option("--net-file", fl_net_file, "friction network weights (JSON)");
  follow->add_option("--nominal-duty", fl_nominal_duty,
                     "duty at which the network is evaluated");
  follow->add_option("--mu-true", fl_mu_true, "rollout friction if it differs");
  follow->add_option("--out", fl_out, "output directory");

  // sweep
  auto* sweep = app.add_subcommand("sweep", "data-efficiency sweep");
  std::vector<std::string> sw_gt, sw_ctrl;
  std::string sw_fractions, sw_out = "out";
  sweep->add_option("--gt", sw_gt, "ground-truth CSV (repeatable)");
  sweep->add_option("--schedule", sw_ctrl, "control CSV (repeatable)");
  sweep->add_option("--fractions", sw_fractions, "comma-separated fractions in (0,1]");
  sweep->add_option("--out", sw_out, "output directory");

  // make-fixtures
  auto* fix = app.add_subcommand("make-fixtures", "write the synthetic benchmark set");
  std::string fix_out = "fixtures";
  fix->add_option("--out", fix_out, "output directory");

  // train-net
  auto* tn = app.add_subcommand("train-net", "fit the speed-to-friction network");
  std::string tn_out = "friction_net.json";
  int tn_epochs = 20000;
  double tn_lr = 0.01;
  tn->add_option("--out", tn_out, "output weights file");
  tn->add_option("--epochs", tn_epochs, "training epochs");
  tn->add_option("--lr", tn_lr, "learning rate");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInputError;
  }

  try {
    ExperimentConfig cfg;
    if (!config_file.empty()) cfg = load_config(config_file);
    apply_env_seed(cfg);

    const auto load_trajectories =
        [&](const std::vector<std::string>& gt,
            const std::vector<std::string>& ctrl) -> std::vector<LoadedTrajectory> {
      if (gt.size() != ctrl.size()) {
        throw std::invalid_argument("--gt and --schedule must be given in pairs");
      }
      std::vector<LoadedTrajectory> out;
      for (std::size_t i = 0; i < gt.size(); ++i) {
        out.push_back(load_pair(gt[i], ctrl[i], cfg.robot));
      }
      if (out.empty()) {
        for (const TrajectoryFiles& tf : cfg.trajectories) {
          out.push_back(load_pair(tf.ground_truth, tf.controls, cfg.robot));
        }
      }
      if (out.empty()) {
        throw std::invalid_argument(
            "no trajectories: pass --gt/--schedule or list them in the config");
      }
      return out;
    };

    if (sim->parsed()) {
      return cmd_simulate(cfg, parse_vec4(sim_mu, "--mu"), sim_schedule, sim_out, sim_name);
    }
    if (ident->parsed()) {
      return cmd_identify(cfg, load_trajectories(id_gt, id_ctrl), id_solver,
                          parse_vec4(id_x0, "--x0"), id_joint, id_jobs, !id_no_uranus,
                          id_out);
    }
    if (gc->parsed()) {
      return cmd_gradcheck(cfg, load_pair(gc_gt, gc_ctrl, cfg.robot),
                           parse_vec4(gc_mu, "--mu"), gc_h, gc_tol);
    }
    if (follow->parsed()) {
      const FrictionCoeffs mu_plan =
          resolve_mu_source(cfg, fl_source, fl_mu_file, fl_net_file, fl_nominal_duty);
      std::optional<Vec4> mu_true;
      if (!fl_mu_true.empty()) mu_true = parse_vec4(fl_mu_true, "--mu-true");
      return cmd_follow(cfg, resolve_curve(cfg, fl_curve, fl_curve_file), mu_plan,
                        mu_true, fl_out);
    }
    if (sweep->parsed()) {
      std::vector<double> fractions = cfg.sweep_fractions;
      if (!sw_fractions.empty()) {
        fractions.clear();
        std::stringstream ss(sw_fractions);
        std::string tok;
        while (std::getline(ss, tok, ',')) fractions.push_back(std::stod(tok));
      }
      return cmd_sweep(cfg, load_trajectories(sw_gt, sw_ctrl), fractions, sw_out);
    }
    if (fix->parsed()) {
      return cmd_make_fixtures(fix_out);
    }
    if (tn->parsed()) {
      return cmd_train_net(cfg, load_trajectories({}, {}), tn_out, tn_epochs, tn_lr);
    }
  } catch (const CsvError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInputError;
  }
  return kExitOk;
}
