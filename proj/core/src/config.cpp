#include "wgf/config.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "wgf/errors.hpp"

namespace wgf {

namespace {

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      // scalar regulator
      "alpha", "beta", "delta", "noise_sigma", "action_penalty",
      // pendulum
      "gravity", "mass", "length", "dt", "max_speed", "max_torque", "w_speed",
      "w_torque",
      // oscillator chain
      "spring_k", "duffing", "damping", "repel_amp", "repel_width", "osc_dt",
      "x_max", "v_max", "u_max", "w_velocity", "w_action",
      // grid solver
      "resolution", "particles", "sigma_smooth", "gamma", "eta", "grid_iterations",
      // trajectory optimizer
      "method", "lr", "lr_final", "horizon", "batch", "iterations", "cg_tol",
      "cg_iters", "cg_damping", "step_cap", "metric_batch", "grad_clip", "hidden",
      "start_capacity", "eval_every",
      // world model
      "outer_iterations", "wm_updates", "wm_batch", "policy_batch",
      "collect_rollouts", "feature_dim", "ridge_lambda", "wm_lr",
      "replay_capacity", "random_start_fraction", "oracle_dynamics",
      // verification
      "contraction_trials", "contraction_samples", "contraction_horizon",
      "doeblin_m",
  };
  return keys;
}

bool has_key(const RunConfig& c, const std::string& key) {
  return std::any_of(c.overrides.begin(), c.overrides.end(),
                     [&](const auto& kv) { return kv.first == key; });
}

const std::string* find_key(const RunConfig& c, const std::string& key) {
  for (const auto& kv : c.overrides) {
    if (kv.first == key) return &kv.second;
  }
  return nullptr;
}

double as_real(const std::string& v, const std::string& key,
               std::vector<std::string>& problems) {
  try {
    std::size_t pos = 0;
    const double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    problems.push_back("key '" + key + "' expects a number, got '" + v + "'");
    return 0.0;
  }
}

long long as_int(const std::string& v, const std::string& key,
                 std::vector<std::string>& problems) {
  try {
    std::size_t pos = 0;
    const long long x = std::stoll(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    problems.push_back("key '" + key + "' expects an integer, got '" + v + "'");
    return 0;
  }
}

std::vector<int> as_int_list(const std::string& v, const std::string& key,
                             std::vector<std::string>& problems) {
  std::vector<int> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    out.push_back(static_cast<int>(as_int(item, key, problems)));
  }
  if (out.empty()) problems.push_back("key '" + key + "' expects a comma list of integers");
  return out;
}

void require(bool ok, const std::string& message, std::vector<std::string>& problems) {
  if (!ok) problems.push_back(message);
}

}  // namespace

EnvModel RunConfig::make_env() const {
  if (env_name == "scalar") return EnvModel::scalar(scalar);
  if (env_name == "pendulum") return EnvModel::pendulum(pendulum);
  if (env_name == "oscillators") return EnvModel::oscillators(oscillators);
  throw ConfigError("unknown environment '" + env_name +
                    "' (expected scalar, pendulum, or oscillators)");
}

RunConfig parse_config_text(const std::string& text) {
  RunConfig config;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto last = line.find_last_not_of(" \t\r");
    line = line.substr(first, last - first + 1);

    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(line_no) +
                        ": expected key=value, got '" + line + "'");
    }
    std::string key = line.substr(0, eq);
    std::string value = line.substr(eq + 1);
    const auto trim = [](std::string& s) {
      const auto b = s.find_first_not_of(" \t");
      const auto e = s.find_last_not_of(" \t");
      s = (b == std::string::npos) ? std::string() : s.substr(b, e - b + 1);
    };
    trim(key);
    trim(value);
    if (!known_keys().count(key)) {
      throw ConfigError("config line " + std::to_string(line_no) +
                        ": unknown key '" + key + "'");
    }
    if (value.empty()) {
      throw ConfigError("config line " + std::to_string(line_no) + ": key '" + key +
                        "' has no value");
    }
    config.overrides.emplace_back(key, value);
  }
  return config;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str());
}

void resolve(RunConfig& config) {
  std::vector<std::string> problems;
  const auto real_of = [&](const char* key, double dflt) {
    const std::string* v = find_key(config, key);
    return v ? as_real(*v, key, problems) : dflt;
  };
  const auto int_of = [&](const char* key, long long dflt) {
    const std::string* v = find_key(config, key);
    return v ? as_int(*v, key, problems) : dflt;
  };

  // Environment parameters.
  config.scalar.alpha = real_of("alpha", config.scalar.alpha);
  config.scalar.beta = real_of("beta", config.scalar.beta);
  config.scalar.delta = real_of("delta", config.scalar.delta);
  config.scalar.sigma = real_of("noise_sigma", config.scalar.sigma);
  config.scalar.lambda_a = real_of("action_penalty", config.scalar.lambda_a);
  require(config.scalar.sigma > 0, "noise_sigma must be positive", problems);
  require(config.scalar.lambda_a >= 0, "action_penalty must be nonnegative", problems);

  config.pendulum.g = real_of("gravity", config.pendulum.g);
  config.pendulum.m = real_of("mass", config.pendulum.m);
  config.pendulum.l = real_of("length", config.pendulum.l);
  config.pendulum.dt = real_of("dt", config.pendulum.dt);
  config.pendulum.thetadot_max = real_of("max_speed", config.pendulum.thetadot_max);
  config.pendulum.u_max = real_of("max_torque", config.pendulum.u_max);
  config.pendulum.w_thetadot = real_of("w_speed", config.pendulum.w_thetadot);
  config.pendulum.w_u = real_of("w_torque", config.pendulum.w_u);
  require(config.pendulum.dt > 0, "dt must be positive", problems);
  require(config.pendulum.m > 0 && config.pendulum.l > 0,
          "mass and length must be positive", problems);

  config.oscillators.k = real_of("spring_k", config.oscillators.k);
  config.oscillators.alpha_duff = real_of("duffing", config.oscillators.alpha_duff);
  config.oscillators.beta_damp = real_of("damping", config.oscillators.beta_damp);
  config.oscillators.repel_amp = real_of("repel_amp", config.oscillators.repel_amp);
  config.oscillators.repel_width = real_of("repel_width", config.oscillators.repel_width);
  config.oscillators.dt = real_of("osc_dt", config.oscillators.dt);
  config.oscillators.x_max = real_of("x_max", config.oscillators.x_max);
  config.oscillators.v_max = real_of("v_max", config.oscillators.v_max);
  config.oscillators.u_max = real_of("u_max", config.oscillators.u_max);
  config.oscillators.w_v = real_of("w_velocity", config.oscillators.w_v);
  config.oscillators.w_u = real_of("w_action", config.oscillators.w_u);
  require(config.oscillators.dt > 0, "osc_dt must be positive", problems);
  require(config.oscillators.repel_width > 0, "repel_width must be positive", problems);

  const bool is_scalar = config.env_name == "scalar";
  const bool is_pendulum = config.env_name == "pendulum";
  const bool is_osc = config.env_name == "oscillators";
  if (!is_scalar && !is_pendulum && !is_osc) {
    problems.push_back("unknown environment '" + config.env_name + "'");
  }

  // Grid solver.
  if (const std::string* v = find_key(config, "resolution")) {
    config.grid.resolution = as_int_list(*v, "resolution", problems);
  } else {
    config.grid.resolution = is_pendulum ? std::vector<int>{41, 41}
                                         : std::vector<int>{81};
  }
  config.grid.n_particles = static_cast<std::size_t>(int_of("particles", 3));
  config.grid.sigma_smooth =
      real_of("sigma_smooth", is_pendulum ? 0.1 : config.scalar.sigma);
  config.grid.gamma = real_of("gamma", 0.95);
  config.grid.learning_rate = real_of("eta", 0.5);
  config.grid.iterations = static_cast<std::size_t>(int_of("grid_iterations", 60));
  config.grid.seed = config.seed;
  require(config.grid.n_particles >= 1, "particles must be at least 1", problems);
  require(config.grid.sigma_smooth > 0, "sigma_smooth must be positive", problems);
  require(config.grid.gamma > 0 && config.grid.gamma <= 1.0,
          "gamma must lie in (0, 1]", problems);
  require(config.grid.learning_rate >= 0, "eta must be nonnegative", problems);
  for (int r : config.grid.resolution) {
    require(r >= 2, "resolution entries must be at least 2", problems);
  }
  if (config.command == "grid" && is_osc) {
    problems.push_back(
        "the grid command does not support the oscillator chain: a dense grid "
        "over the 10-dimensional state space is numerically intractable");
  }

  // Trajectory optimizer.
  std::string method = "adam";
  if (const std::string* v = find_key(config, "method")) method = *v;
  if (method == "adam") {
    config.traj.method = Method::kAdam;
  } else if (method == "ng") {
    config.traj.method = Method::kNg;
  } else {
    problems.push_back("method must be 'adam' or 'ng', got '" + method + "'");
  }
  const bool is_adam = config.traj.method == Method::kAdam;
  // The pendulum needs a hotter Adam: swing-up lives in a separate basin of
  // the BPTT landscape and small steps converge to a lean-to-one-side policy.
  const double default_lr = is_adam ? (is_pendulum ? 0.05 : 0.01) : 0.3;
  config.traj.learning_rate = real_of("lr", default_lr);
  // The pendulum runs a hot-then-cold schedule: hop basins early, settle late.
  config.traj.lr_final =
      real_of("lr_final", is_pendulum ? config.traj.learning_rate / 10.0 : 0.0);
  config.traj.eval_every = static_cast<std::size_t>(int_of("eval_every", 10));
  config.traj.horizon = static_cast<std::size_t>(
      int_of("horizon", is_pendulum ? 80 : (is_osc ? 60 : 30)));
  config.traj.batch = static_cast<std::size_t>(int_of("batch", 32));
  config.traj.iterations =
      static_cast<std::size_t>(int_of("iterations", is_pendulum ? 600 : 200));
  config.traj.cg.tol = real_of("cg_tol", 1e-10);
  config.traj.cg.max_iter = static_cast<std::size_t>(int_of("cg_iters", 50));
  config.traj.cg.damping = real_of("cg_damping", 1e-3);
  config.traj.cg.step_cap = real_of("step_cap", 1.0);
  config.traj.metric_batch = static_cast<std::size_t>(int_of("metric_batch", 64));
  config.traj.start_capacity = static_cast<std::size_t>(
      int_of("start_capacity", is_pendulum ? 1 << 20 : 4096));
  config.traj.grad_clip = real_of("grad_clip", 10.0);
  config.traj.seed = config.seed;
  require(config.traj.horizon >= 1, "horizon must be at least 1", problems);
  require(config.traj.batch >= 1, "batch must be at least 1", problems);
  require(config.traj.learning_rate > 0, "lr must be positive", problems);
  require(config.traj.lr_final >= 0 &&
              config.traj.lr_final <= config.traj.learning_rate,
          "lr_final must lie in [0, lr]", problems);
  require(config.traj.cg.damping >= 0, "cg_damping must be nonnegative", problems);
  require(config.traj.grad_clip > 0, "grad_clip must be positive", problems);

  if (const std::string* v = find_key(config, "hidden")) {
    config.hidden = as_int_list(*v, "hidden", problems);
  } else {
    config.hidden = is_osc ? std::vector<int>{128, 128} : std::vector<int>{64, 64};
  }
  for (int h : config.hidden) require(h >= 1, "hidden widths must be positive", problems);

  // World model.
  config.wm.outer_iterations =
      static_cast<std::size_t>(int_of("outer_iterations", 40));
  config.wm.wm.n_updates = static_cast<std::size_t>(int_of("wm_updates", 50));
  config.wm.wm.batch = static_cast<std::size_t>(int_of("wm_batch", 256));
  config.wm.batch_policy = static_cast<std::size_t>(int_of("policy_batch", 32));
  config.wm.collect_rollouts =
      static_cast<std::size_t>(int_of("collect_rollouts", 4));
  config.wm.wm.feature_dim = static_cast<int>(int_of("feature_dim", 128));
  config.wm.wm.ridge_lambda = real_of("ridge_lambda", 1e-3);
  config.wm.wm.body_lr = real_of("wm_lr", 1e-3);
  config.wm.replay_capacity =
      static_cast<std::size_t>(int_of("replay_capacity", 100000));
  config.wm.random_start_fraction = real_of("random_start_fraction", 0.1);
  config.wm.oracle_dynamics = int_of("oracle_dynamics", 0) != 0;
  config.wm.horizon = config.traj.horizon;
  config.wm.policy_lr = real_of("lr", 0.3);
  config.wm.cg = config.traj.cg;
  config.wm.grad_clip = config.traj.grad_clip;
  config.wm.metric_batch = config.traj.metric_batch;
  config.wm.seed = config.seed;
  require(config.wm.wm.feature_dim >= 1, "feature_dim must be at least 1", problems);
  require(config.wm.wm.ridge_lambda >= 0, "ridge_lambda must be nonnegative", problems);
  require(config.wm.wm.body_lr > 0, "wm_lr must be positive", problems);
  require(config.wm.random_start_fraction >= 0.0 &&
              config.wm.random_start_fraction <= 1.0,
          "random_start_fraction must lie in [0, 1]", problems);

  // Verification settings.
  config.verify.contraction_trials =
      static_cast<std::size_t>(int_of("contraction_trials", 100));
  config.verify.contraction_samples =
      static_cast<std::size_t>(int_of("contraction_samples", 64));
  config.verify.contraction_horizon =
      static_cast<std::size_t>(int_of("contraction_horizon", 1));
  config.verify.doeblin_m = static_cast<std::size_t>(int_of("doeblin_m", 1));
  require(config.verify.contraction_trials >= 1 &&
              config.verify.contraction_samples >= 2 &&
              config.verify.contraction_horizon >= 1 && config.verify.doeblin_m >= 1,
          "verification counts must be positive (samples at least 2)", problems);

  if (!problems.empty()) {
    std::string joined = "invalid configuration:";
    for (const std::string& p : problems) joined += "\n  - " + p;
    throw ConfigError(joined);
  }
}

}  // namespace wgf
