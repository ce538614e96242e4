#include "wgf/trajopt.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "wgf/errors.hpp"
#include "wgf/rng.hpp"
#include "wgf/run.hpp"

namespace wgf {

namespace {

Vector draw_noise(const EnvModel& env, std::mt19937_64* rng) {
  Vector noise(static_cast<std::size_t>(env.noise_dim()), 0.0);
  if (rng != nullptr && env.noise_dim() > 0) {
    std::normal_distribution<double> dist(0.0, env.scalar_params().sigma);
    for (double& x : noise) x = dist(*rng);
  }
  return noise;
}

void check_finite(const Vector& state, std::size_t step) {
  for (double x : state) {
    if (!std::isfinite(x)) {
      throw Error("rollout diverged at step " + std::to_string(step) +
                  ": non-finite state coordinate");
    }
  }
}

}  // namespace

double clip_gradient(Vector& grad, double max_norm) {
  const double n = norm2(grad);
  if (n > max_norm && n > 0.0) {
    const double s = max_norm / n;
    for (double& g : grad) g *= s;
  }
  return n;
}

Vector random_state(const EnvModel& env, std::mt19937_64& rng) {
  const Vector lo = env.state_lower();
  const Vector hi = env.state_upper();
  Vector s(lo.size());
  for (std::size_t d = 0; d < lo.size(); ++d) {
    std::uniform_real_distribution<double> dist(lo[d], hi[d]);
    s[d] = dist(rng);
  }
  return s;
}

RolloutResult rollout(const EnvModel& env, const MlpPolicy& policy,
                      const Vector& theta, const std::vector<Vector>& starts,
                      std::size_t horizon, bool record,
                      std::mt19937_64* noise_rng) {
  if (starts.empty()) throw DomainError("rollout requires at least one start state");
  if (horizon == 0) throw DomainError("rollout horizon must be at least 1");
  RolloutResult result;
  const double inv_h = 1.0 / static_cast<double>(horizon);
  const double inv_b = 1.0 / static_cast<double>(starts.size());
  if (record) result.grad.assign(policy.n_params(), 0.0);

  for (std::size_t b = 0; b < starts.size(); ++b) {
    // Noise is drawn identically on both paths so the recorded and fast
    // rollouts agree trajectory for trajectory.
    if (!record) {
      EnvState state{env.kind(), starts[b]};
      double j = 0.0;
      for (std::size_t t = 0; t < horizon; ++t) {
        const Vector action = policy.forward(theta, state.coords);
        const double c = env.cost(state, action);
        j += c * inv_h;
        if (b == 0) {
          result.trace_states.push_back(state.coords);
          result.trace_actions.push_back(action);
          result.trace_costs.push_back(c);
        }
        state = env.step(state, action, draw_noise(env, noise_rng));
        check_finite(state.coords, t);
        result.visited.push_back(state.coords);
      }
      if (b == 0) result.trace_states.push_back(state.coords);
      result.j += j * inv_b;
      continue;
    }

    Tape tape;
    std::vector<Var> theta_vars(theta.size());
    for (std::size_t i = 0; i < theta.size(); ++i) theta_vars[i] = tape.leaf(theta[i]);
    std::vector<Var> state_vars(starts[b].size());
    for (std::size_t d = 0; d < starts[b].size(); ++d) {
      state_vars[d] = tape.constant(starts[b][d]);
    }
    Var j_var = tape.constant(0.0);
    for (std::size_t t = 0; t < horizon; ++t) {
      const std::vector<Var> action = policy.forward_recorded(tape, theta_vars, state_vars);
      const Var c = env.cost_recorded(tape, state_vars, action);
      j_var = tape.add(j_var, tape.mul(c, inv_h));
      if (b == 0) {
        Vector sv(state_vars.size()), av(action.size());
        for (std::size_t d = 0; d < sv.size(); ++d) sv[d] = state_vars[d].value();
        for (std::size_t d = 0; d < av.size(); ++d) av[d] = action[d].value();
        result.trace_states.push_back(sv);
        result.trace_actions.push_back(av);
        result.trace_costs.push_back(c.value());
      }
      state_vars = env.step_recorded(tape, state_vars, action, draw_noise(env, noise_rng));
      Vector sv(state_vars.size());
      for (std::size_t d = 0; d < sv.size(); ++d) sv[d] = state_vars[d].value();
      check_finite(sv, t);
      result.visited.push_back(sv);
      if (b == 0 && t + 1 == horizon) result.trace_states.push_back(sv);
    }
    result.j += j_var.value() * inv_b;
    const Vector g = tape.gradient(j_var, theta_vars);
    for (std::size_t i = 0; i < g.size(); ++i) result.grad[i] += g[i] * inv_b;
  }
  return result;
}

void adam_step(AdamState& state, Vector& theta, const Vector& grad) {
  if (theta.size() != grad.size()) throw DomainError("Adam gradient length mismatch");
  if (state.m.empty()) {
    state.m.assign(theta.size(), 0.0);
    state.v.assign(theta.size(), 0.0);
  }
  state.t += 1;
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.t));
  for (std::size_t i = 0; i < theta.size(); ++i) {
    state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * grad[i];
    state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * grad[i] * grad[i];
    const double m_hat = state.m[i] / bc1;
    const double v_hat = state.v[i] / bc2;
    theta[i] -= state.lr * m_hat / (std::sqrt(v_hat) + state.eps);
  }
}

NgStepInfo natural_gradient_step(const MlpPolicy& policy, Vector& theta,
                                 const Vector& grad,
                                 const std::vector<Vector>& metric_states,
                                 double lr, const CgConfig& cg) {
  const GramOperator gram(policy, theta, metric_states);
  const auto op = [&gram](const Vector& v) { return gram.matvec(v); };
  const CgResult sol = conjugate_gradient(op, grad, cg.tol, cg.max_iter, cg.damping);
  NgStepInfo info;
  info.cg_converged = sol.converged;
  double scale = lr;
  const double raw_norm = lr * norm2(sol.x);
  if (cg.step_cap > 0.0 && raw_norm > cg.step_cap) scale *= cg.step_cap / raw_norm;
  for (std::size_t i = 0; i < theta.size(); ++i) theta[i] -= scale * sol.x[i];
  info.step_norm = scale * norm2(sol.x);
  return info;
}

void OptimizerConfig::validate() const {
  std::string problems;
  if (horizon < 1) problems += "horizon must be at least 1; ";
  if (batch < 1) problems += "batch size must be at least 1; ";
  if (!(learning_rate > 0.0)) problems += "learning rate must be positive; ";
  if (!(grad_clip > 0.0)) problems += "gradient clip must be positive; ";
  if (metric_batch < 1) problems += "metric batch must be at least 1; ";
  if (start_capacity < batch) problems += "start buffer must hold at least one batch; ";
  if (!problems.empty()) throw ConfigError("invalid optimizer config: " + problems);
}

TrainResult train(const EnvModel& env, const MlpPolicy& policy,
                  const OptimizerConfig& config) {
  config.validate();
  TrainResult result;
  result.theta = policy.init_params(split_seed(config.seed, "policy-init"));

  auto rng_starts = make_rng(split_seed(config.seed, "start-buffer"));
  auto rng_noise = make_rng(split_seed(config.seed, "process-noise"));

  StateBuffer starts(config.start_capacity);
  const std::size_t n_seed_states =
      std::max<std::size_t>(std::max<std::size_t>(256, config.batch),
                            config.start_capacity / 256);
  for (std::size_t i = 0; i < n_seed_states; ++i) {
    starts.push(random_state(env, rng_starts));
  }

  AdamState adam;
  adam.lr = config.learning_rate;

  // Checkpointing: score iterates by a deterministic noise-free rollout from
  // the canonical start and keep the best one. Training with a hot learning
  // rate hops between basins, so the last iterate is often not the best.
  const std::vector<Vector> eval_start{evaluation_start(env)};
  const std::size_t eval_horizon = std::max<std::size_t>(config.horizon, 200);
  Vector best_theta = result.theta;
  double best_eval = std::numeric_limits<double>::quiet_NaN();
  const auto maybe_checkpoint = [&](std::size_t it) {
    if (config.eval_every == 0) return;
    if (it % config.eval_every != 0 && it + 1 != config.iterations) return;
    const RolloutResult ev = rollout(env, policy, result.theta, eval_start,
                                     eval_horizon, /*record=*/false, nullptr);
    if (std::isnan(best_eval) || ev.j < best_eval) {
      best_eval = ev.j;
      best_theta = result.theta;
    }
  };

  for (std::size_t it = 0; it < config.iterations; ++it) {
    // Cosine decay from the base rate to lr_final across the run.
    double lr = config.learning_rate;
    if (config.lr_final > 0.0 && config.iterations > 1) {
      const double phase = static_cast<double>(it) /
                           static_cast<double>(config.iterations - 1);
      lr = config.lr_final + 0.5 * (config.learning_rate - config.lr_final) *
                                 (1.0 + std::cos(std::numbers::pi * phase));
    }
    adam.lr = lr;

    std::vector<Vector> batch(config.batch);
    for (Vector& s : batch) s = starts.sample(rng_starts);
    RolloutResult rr = rollout(env, policy, result.theta, batch, config.horizon,
                               /*record=*/true, &rng_noise);

    TrainHistoryRow row;
    row.j = rr.j;
    row.grad_norm = clip_gradient(rr.grad, config.grad_clip);

    if (config.method == Method::kAdam) {
      Vector before = result.theta;
      adam_step(adam, result.theta, rr.grad);
      double d2 = 0.0;
      for (std::size_t i = 0; i < before.size(); ++i) {
        const double d = result.theta[i] - before[i];
        d2 += d * d;
      }
      row.step_norm = std::sqrt(d2);
    } else {
      // The metric buffer holds this iteration's visited states and is
      // discarded after the step; a capped uniform subsample keeps the
      // Jacobian batch affordable.
      std::vector<Vector> metric_states;
      if (rr.visited.size() <= config.metric_batch) {
        metric_states = rr.visited;
      } else {
        metric_states.reserve(config.metric_batch);
        std::uniform_int_distribution<std::size_t> pick(0, rr.visited.size() - 1);
        for (std::size_t i = 0; i < config.metric_batch; ++i) {
          metric_states.push_back(rr.visited[pick(rng_starts)]);
        }
      }
      const NgStepInfo info =
          natural_gradient_step(policy, result.theta, rr.grad, metric_states,
                                lr, config.cg);
      row.step_norm = info.step_norm;
      if (!info.cg_converged) ++result.cg_warnings;
    }

    for (Vector& s : rr.visited) starts.push(std::move(s));
    result.history.push_back(row);
    maybe_checkpoint(it);
  }
  if (config.eval_every > 0 && !std::isnan(best_eval)) {
    result.theta = best_theta;
    result.best_eval = best_eval;
  } else {
    result.best_eval = std::numeric_limits<double>::quiet_NaN();
  }
  return result;
}

}  // namespace wgf
