#include "wgf/run.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "json.hpp"

#include "wgf/errors.hpp"
#include "wgf/grid.hpp"
#include "wgf/mlp.hpp"
#include "wgf/rng.hpp"
#include "wgf/trajopt.hpp"
#include "wgf/verify.hpp"
#include "wgf/world_model.hpp"

namespace wgf {

namespace {

using ordered_json = nlohmann::ordered_json;

constexpr const char* kSchema = "wgf-run-v1";

std::filesystem::path out_path(const RunConfig& config, const std::string& name) {
  return std::filesystem::path(config.out_dir) / name;
}

ordered_json config_echo(const RunConfig& config) {
  ordered_json echo;
  echo["command"] = config.command;
  echo["env"] = config.env_name;
  echo["seed"] = config.seed;
  ordered_json keys = ordered_json::object();
  for (const auto& [k, v] : config.overrides) keys[k] = v;
  echo["overrides"] = keys;
  return echo;
}

void write_json(const std::filesystem::path& path, const ordered_json& j) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open output file: " + path.string());
  out << j.dump(2) << '\n';
}

void write_summary(const RunConfig& config, ordered_json body) {
  ordered_json j;
  j["schema"] = kSchema;
  j["config"] = config_echo(config);
  for (auto& [k, v] : body.items()) j[k] = std::move(v);
  write_json(out_path(config, "summary.json"), j);
}

int run_grid(const RunConfig& config) {
  const EnvModel env = config.make_env();
  const StateGrid grid(env, config.grid.resolution);
  const PolicyIterationResult result = policy_iteration(env, grid, config.grid);

  std::vector<Vector> history;
  for (std::size_t i = 0; i < result.avg_cost_history.size(); ++i) {
    history.push_back({static_cast<double>(i), result.avg_cost_history[i]});
  }
  write_csv(out_path(config, "history.csv").string(), {"iter", "avg_cost"}, history);

  std::vector<std::string> value_header;
  for (int d = 0; d < grid.dim(); ++d) value_header.push_back("s" + std::to_string(d));
  value_header.push_back("v");
  std::vector<Vector> value_rows;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    Vector row = grid.point(i);
    row.push_back(result.solution.v[i]);
    value_rows.push_back(std::move(row));
  }
  write_csv(out_path(config, "value.csv").string(), value_header, value_rows);

  std::vector<std::string> policy_header = value_header;
  policy_header.pop_back();
  const std::size_t m = result.policy.n_particles;
  const int adim = result.policy.action_dim;
  for (std::size_t i = 0; i < m; ++i) {
    for (int d = 0; d < adim; ++d) {
      policy_header.push_back("a" + std::to_string(i) + "_" + std::to_string(d));
    }
  }
  for (int d = 0; d < adim; ++d) policy_header.push_back("mean_" + std::to_string(d));
  std::vector<Vector> policy_rows;
  for (std::size_t s = 0; s < grid.size(); ++s) {
    Vector row = grid.point(s);
    Vector mean(adim, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
      for (int d = 0; d < adim; ++d) {
        row.push_back(result.policy.at(s, i, d));
        mean[d] += result.policy.at(s, i, d) / static_cast<double>(m);
      }
    }
    row.insert(row.end(), mean.begin(), mean.end());
    policy_rows.push_back(std::move(row));
  }
  write_csv(out_path(config, "policy.csv").string(), policy_header, policy_rows);

  ordered_json body;
  body["final_avg_cost"] = result.avg_cost_history.back();
  body["iterations"] = config.grid.iterations;
  write_summary(config, std::move(body));
  return 0;
}

void write_trajectory_csv(const RunConfig& config, const EnvModel& env,
                          const MlpPolicy& policy, const Vector& theta,
                          std::size_t horizon) {
  EnvState state{env.kind(), evaluation_start(env)};
  const Vector noise(static_cast<std::size_t>(env.noise_dim()), 0.0);
  std::vector<std::string> header{"t"};
  for (int d = 0; d < env.state_dim(); ++d) header.push_back("s" + std::to_string(d));
  for (int d = 0; d < env.action_dim(); ++d) header.push_back("a" + std::to_string(d));
  header.push_back("cost");
  std::vector<Vector> rows;
  for (std::size_t t = 0; t < horizon; ++t) {
    const Vector action = policy.forward(theta, state.coords);
    Vector row{static_cast<double>(t)};
    row.insert(row.end(), state.coords.begin(), state.coords.end());
    row.insert(row.end(), action.begin(), action.end());
    row.push_back(env.cost(state, action));
    rows.push_back(std::move(row));
    state = env.step(state, action, noise);
  }
  write_csv(out_path(config, "trajectory.csv").string(), header, rows);
}

int run_traj(const RunConfig& config) {
  const EnvModel env = config.make_env();
  const MlpPolicy policy(env.state_dim(), config.hidden, env.action_dim(),
                         [&] {
                           Vector scale(env.action_dim());
                           for (int d = 0; d < env.action_dim(); ++d) {
                             scale[d] = env.action_upper(d);
                           }
                           return scale;
                         }(),
                         env.kind() == EnvKind::kPendulum
                             ? InputFeatures::kAngleTrig
                             : InputFeatures::kRaw);
  const TrainResult result = train(env, policy, config.traj);

  std::vector<Vector> history;
  for (std::size_t i = 0; i < result.history.size(); ++i) {
    history.push_back({static_cast<double>(i), result.history[i].j,
                       result.history[i].grad_norm, result.history[i].step_norm});
  }
  write_csv(out_path(config, "history.csv").string(),
            {"iter", "j", "grad_norm", "step_norm"}, history);
  write_trajectory_csv(config, env, policy, result.theta, 200);
  save_policy(out_path(config, "policy.txt").string(), policy, result.theta);

  ordered_json body;
  body["final_j"] = result.history.empty() ? 0.0 : result.history.back().j;
  body["iterations"] = config.traj.iterations;
  body["method"] = config.traj.method == Method::kAdam ? "adam" : "ng";
  body["cg_warnings"] = result.cg_warnings;
  write_summary(config, std::move(body));
  return 0;
}

int run_wm(const RunConfig& config) {
  const EnvModel env = config.make_env();
  const MlpPolicy policy(env.state_dim(), config.hidden, env.action_dim(),
                         [&] {
                           Vector scale(env.action_dim());
                           for (int d = 0; d < env.action_dim(); ++d) {
                             scale[d] = env.action_upper(d);
                           }
                           return scale;
                         }(),
                         env.kind() == EnvKind::kPendulum
                             ? InputFeatures::kAngleTrig
                             : InputFeatures::kRaw);
  const JointTrainResult result = joint_train(env, policy, config.wm);

  std::vector<Vector> policy_rows;
  for (std::size_t i = 0; i < result.policy_loss.size(); ++i) {
    policy_rows.push_back({static_cast<double>(i), result.policy_loss[i]});
  }
  write_csv(out_path(config, "policy_loss.csv").string(), {"iter", "j"}, policy_rows);

  std::vector<Vector> wm_rows;
  for (std::size_t i = 0; i < result.wm_loss.size(); ++i) {
    wm_rows.push_back({static_cast<double>(i), result.wm_loss[i]});
  }
  write_csv(out_path(config, "wm_loss.csv").string(), {"update", "loss"}, wm_rows);

  write_trajectory_csv(config, env, policy, result.theta, 200);
  save_policy(out_path(config, "policy.txt").string(), policy, result.theta);

  ordered_json body;
  body["final_policy_loss"] =
      result.policy_loss.empty() ? 0.0 : result.policy_loss.back();
  body["initial_wm_loss"] = result.wm_loss.empty() ? 0.0 : result.wm_loss.front();
  body["final_wm_loss"] = result.wm_loss.empty() ? 0.0 : result.wm_loss.back();
  body["oracle_dynamics"] = config.wm.oracle_dynamics;
  body["cg_warnings"] = result.cg_warnings;
  write_summary(config, std::move(body));
  return 0;
}

bool check_selected(const RunConfig& config, const std::string& name) {
  if (config.checks.empty()) return true;
  for (const std::string& c : config.checks) {
    if (c == name || c == "all") return true;
  }
  return false;
}

int run_verify(const RunConfig& config) {
  const EnvModel env = EnvModel::scalar(config.scalar);
  bool all_pass = true;
  bool any = false;

  // Shared small instance: 11-point scalar grid, two particles per state.
  const StateGrid grid(env, {11});
  const double sigma = config.grid.sigma_smooth;
  const ParticlePolicy policy =
      random_particle_policy(env, grid.size(), 2, split_seed(config.seed, "verify-pi"));
  const VelocityField v = random_velocity_field(
      grid.size(), 2, 1, split_seed(config.seed, "verify-v"), 0.5);

  const auto emit = [&](const std::string& name, ordered_json report, bool pass) {
    report["schema"] = kSchema;
    report["check"] = name;
    report["seed"] = config.seed;
    report["pass"] = pass;
    write_json(out_path(config, name + ".json"), report);
    all_pass = all_pass && pass;
    any = true;
  };

  if (check_selected(config, "gradient")) {
    const GradientIdentityReport r =
        gradient_identity_check(env, grid, policy, v, sigma);
    ordered_json j;
    j["analytic"] = r.analytic;
    j["fd_slope"] = r.fd_slope;
    j["relative_error"] = r.relative_error;
    j["tolerance"] = 1e-4;
    emit("gradient", std::move(j), r.relative_error <= 1e-4);
  }
  if (check_selected(config, "hessian")) {
    const HessianReport r = hessian_check(env, grid, policy, v, sigma);
    ordered_json j;
    j["t1"] = r.t1;
    j["t2_local"] = r.t2_local;
    j["total"] = r.total;
    j["fd_second"] = r.fd_second;
    j["relative_error"] = r.relative_error;
    j["psi_residual"] = r.psi_residual;
    j["psi_mean"] = r.psi_mean;
    j["tolerance"] = 1e-2;
    emit("hessian", std::move(j),
         r.relative_error <= 1e-2 && r.psi_residual <= 1e-9 &&
             std::abs(r.psi_mean) <= 1e-9);
  }
  if (check_selected(config, "contraction")) {
    const ContractionReport r = contraction_estimate(
        env, 0.0, config.verify.contraction_trials, config.verify.contraction_samples,
        config.verify.contraction_horizon, config.seed);
    ordered_json j;
    j["empirical_kappa"] = r.empirical_kappa;
    j["bound"] = r.bound;
    j["trials"] = config.verify.contraction_trials;
    j["skipped"] = r.skipped;
    j["slack"] = 0.02;
    emit("contraction", std::move(j), r.empirical_kappa <= r.bound + 0.02);
  }
  if (check_selected(config, "doeblin")) {
    const GridMdp mdp = build_kernel(env, grid, policy, sigma, 1.0);
    const double alpha = doeblin_coefficient(mdp.mean_kernel, config.verify.doeblin_m);
    const double identity_alpha =
        doeblin_coefficient(DenseMatrix::identity(4), config.verify.doeblin_m);
    ordered_json j;
    j["alpha"] = alpha;
    j["identity_alpha"] = identity_alpha;
    emit("doeblin", std::move(j), alpha > 0.0 && identity_alpha == 0.0);
  }
  if (check_selected(config, "convexity")) {
    ScalarRegulatorParams decoupled = config.scalar;
    decoupled.delta = 0.0;
    const EnvModel env0 = EnvModel::scalar(decoupled);
    const double min_curv = convexity_probe(env0, StateGrid(env0, {11}), 2, 20,
                                            sigma, config.seed);
    ordered_json j;
    j["min_second_difference"] = min_curv;
    j["tolerance"] = -1e-6;
    emit("convexity", std::move(j), min_curv >= -1e-6);
  }

  if (!any) throw ConfigError("no known check selected (use gradient, hessian, contraction, doeblin, convexity, or all)");
  ordered_json body;
  body["all_pass"] = all_pass;
  write_summary(config, std::move(body));
  return all_pass ? 0 : 1;
}

}  // namespace

std::string format_real(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<Vector>& rows) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open output file: " + path);
  for (std::size_t i = 0; i < header.size(); ++i) {
    out << header[i] << (i + 1 < header.size() ? "," : "\n");
  }
  for (const Vector& row : rows) {
    if (row.size() != header.size()) {
      throw Error("CSV row width does not match its header");
    }
    for (std::size_t i = 0; i < row.size(); ++i) {
      out << format_real(row[i]) << (i + 1 < row.size() ? "," : "\n");
    }
  }
}

Vector evaluation_start(const EnvModel& env) {
  switch (env.kind()) {
    case EnvKind::kScalar:
      return {2.0};
    case EnvKind::kPendulum:
      return {wrap_angle_value(std::numbers::pi), 0.0};
    case EnvKind::kOscillators: {
      const int n = env.oscillator_params().n;
      Vector s(2 * static_cast<std::size_t>(n), 0.0);
      for (int i = 0; i < n; ++i) s[i] = (i % 2 == 0) ? 1.0 : -1.0;
      return s;
    }
  }
  throw DomainError("unknown environment kind");
}

int run(const RunConfig& config) {
  std::filesystem::create_directories(config.out_dir);
  if (config.command == "grid") return run_grid(config);
  if (config.command == "traj") return run_traj(config);
  if (config.command == "wm") return run_wm(config);
  if (config.command == "verify") return run_verify(config);
  throw ConfigError("unknown command '" + config.command + "'");
}

}  // namespace wgf
