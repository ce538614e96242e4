#include "wgf/world_model.hpp"

#include <cmath>
#include <numbers>

#include "wgf/errors.hpp"
#include "wgf/rng.hpp"

namespace wgf {

namespace {

Vector concat(const Vector& s, const Vector& a) {
  Vector x;
  x.reserve(s.size() + a.size());
  x.insert(x.end(), s.begin(), s.end());
  x.insert(x.end(), a.begin(), a.end());
  return x;
}

double env_dt(const EnvModel& env) {
  switch (env.kind()) {
    case EnvKind::kPendulum:
      return env.pendulum_params().dt;
    case EnvKind::kOscillators:
      return env.oscillator_params().dt;
    case EnvKind::kScalar:
      return 1.0;  // the map itself is the unit-time flow
  }
  return 1.0;
}

}  // namespace

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity_ == 0) throw DomainError("replay capacity must be positive");
}

void ReplayBuffer::push(Transition t) {
  if (items_.size() < capacity_) {
    items_.push_back(std::move(t));
  } else {
    items_[next_] = std::move(t);
  }
  next_ = (next_ + 1) % capacity_;
}

const Transition& ReplayBuffer::sample(std::mt19937_64& rng) const {
  if (items_.empty()) throw DomainError("cannot sample from an empty replay buffer");
  std::uniform_int_distribution<std::size_t> dist(0, items_.size() - 1);
  return items_[dist(rng)];
}

WorldModel::WorldModel(int state_dim, int action_dim, double dt,
                       const WorldModelConfig& config, std::uint64_t seed)
    : state_dim_(state_dim),
      action_dim_(action_dim),
      dt_(dt),
      lambda_(config.ridge_lambda),
      body_(state_dim + action_dim, config.body_hidden, config.feature_dim,
            Vector(static_cast<std::size_t>(config.feature_dim), 1.0)),
      body_theta_(body_.init_params(seed)),
      head_(static_cast<std::size_t>(config.feature_dim),
            static_cast<std::size_t>(state_dim)) {
  if (!(dt > 0.0)) throw DomainError("world-model dt must be positive");
  if (!(lambda_ >= 0.0)) throw DomainError("ridge lambda must be nonnegative");
}

Vector WorldModel::features(const Vector& s, const Vector& a) const {
  return body_.forward(body_theta_, concat(s, a));
}

Vector WorldModel::predict(const Vector& s, const Vector& a) const {
  const Vector f = features(s, a);
  Vector next = s;
  for (int d = 0; d < state_dim_; ++d) {
    double v = 0.0;
    for (std::size_t k = 0; k < f.size(); ++k) v += f[k] * head_(k, d);
    next[d] += v * dt_;
  }
  return next;
}

std::vector<Var> WorldModel::record_body_theta(Tape& tape) const {
  std::vector<Var> vars(body_theta_.size());
  for (std::size_t i = 0; i < body_theta_.size(); ++i) {
    vars[i] = tape.constant(body_theta_[i]);
  }
  return vars;
}

std::vector<Var> WorldModel::predict_recorded_cached(
    Tape& tape, const std::vector<Var>& body_theta_vars, const std::vector<Var>& s,
    const std::vector<Var>& a) const {
  std::vector<Var> x(s.size() + a.size());
  std::copy(s.begin(), s.end(), x.begin());
  std::copy(a.begin(), a.end(), x.begin() + s.size());
  const std::vector<Var> f = body_.forward_recorded(tape, body_theta_vars, x);
  Vector col(f.size());
  std::vector<Var> next(s.size());
  for (int d = 0; d < state_dim_; ++d) {
    for (std::size_t k = 0; k < f.size(); ++k) col[k] = head_(k, d);
    const Var v = tape.lincomb(f[0].idx, col.data(), static_cast<std::int32_t>(col.size()));
    next[d] = tape.add(s[d], tape.mul(v, dt_));
  }
  return next;
}

std::vector<Var> WorldModel::predict_recorded(Tape& tape, const std::vector<Var>& s,
                                              const std::vector<Var>& a) const {
  return predict_recorded_cached(tape, record_body_theta(tape), s, a);
}

Vector velocity_target(const Vector& s, const Vector& s_next, double dt,
                       const std::vector<bool>& wraps) {
  Vector y(s.size());
  for (std::size_t d = 0; d < s.size(); ++d) {
    double diff = s_next[d] - s[d];
    if (wraps[d]) diff = wrap_angle_value(diff);
    y[d] = diff / dt;
  }
  return y;
}

double fit_head(WorldModel& wm, const std::vector<Transition>& batch,
                const std::vector<bool>& wraps) {
  if (batch.empty()) throw DomainError("head refit requires a non-empty batch");
  const std::size_t b = batch.size();
  const int fdim = wm.body().output_dim();
  DenseMatrix phi(b, static_cast<std::size_t>(fdim));
  DenseMatrix y(b, static_cast<std::size_t>(wm.state_dim()));
  for (std::size_t i = 0; i < b; ++i) {
    const Vector f = wm.features(batch[i].s, batch[i].a);
    for (int k = 0; k < fdim; ++k) phi(i, k) = f[k];
    const Vector yi = velocity_target(batch[i].s, batch[i].s_next, wm.dt(), wraps);
    for (int d = 0; d < wm.state_dim(); ++d) y(i, d) = yi[d];
  }

  // Divergence guard: an integrated rollout stays tame only while
  // ||W||_F * dt is modest; otherwise back off with a stiffer ridge.
  for (int attempt = 0; attempt < 8; ++attempt) {
    wm.head() = ridge_solve(phi, y, wm.ridge_lambda());
    double fro2 = 0.0;
    for (std::size_t k = 0; k < wm.head().rows(); ++k) {
      for (std::size_t d = 0; d < wm.head().cols(); ++d) {
        fro2 += wm.head()(k, d) * wm.head()(k, d);
      }
    }
    if (std::sqrt(fro2) * wm.dt() < 10.0) break;
    wm.set_ridge_lambda(wm.ridge_lambda() * 10.0);
  }

  double loss = 0.0;
  for (std::size_t i = 0; i < b; ++i) {
    for (int d = 0; d < wm.state_dim(); ++d) {
      double pred = 0.0;
      for (int k = 0; k < fdim; ++k) pred += phi(i, k) * wm.head()(k, d);
      const double r = pred - y(i, d);
      loss += r * r;
    }
  }
  return loss / static_cast<double>(b);
}

std::vector<double> train_world_model(WorldModel& wm, const ReplayBuffer& buffer,
                                      const WorldModelConfig& config,
                                      const std::vector<bool>& wraps,
                                      AdamState& body_adam, std::mt19937_64& rng) {
  if (buffer.empty()) throw DomainError("world-model training requires transitions");
  std::vector<double> losses;
  losses.reserve(config.n_updates);

  for (std::size_t u = 0; u < config.n_updates; ++u) {
    std::vector<Transition> batch(std::min<std::size_t>(config.batch, buffer.size()));
    for (Transition& t : batch) t = buffer.sample(rng);
    losses.push_back(fit_head(wm, batch, wraps));

    // One Adam step on the body with the freshly solved head frozen.
    Tape tape;
    std::vector<Var> theta_vars(wm.body_theta().size());
    for (std::size_t i = 0; i < theta_vars.size(); ++i) {
      theta_vars[i] = tape.leaf(wm.body_theta()[i]);
    }
    Var loss_var = tape.constant(0.0);
    Vector col(static_cast<std::size_t>(wm.body().output_dim()));
    for (const Transition& t : batch) {
      std::vector<Var> x(t.s.size() + t.a.size());
      for (std::size_t d = 0; d < t.s.size(); ++d) x[d] = tape.constant(t.s[d]);
      for (std::size_t d = 0; d < t.a.size(); ++d) {
        x[t.s.size() + d] = tape.constant(t.a[d]);
      }
      const std::vector<Var> f = wm.body().forward_recorded(tape, theta_vars, x);
      const Vector y = velocity_target(t.s, t.s_next, wm.dt(), wraps);
      for (int d = 0; d < wm.state_dim(); ++d) {
        for (std::size_t k = 0; k < col.size(); ++k) col[k] = wm.head()(k, d);
        const Var pred =
            tape.lincomb(f[0].idx, col.data(), static_cast<std::int32_t>(col.size()));
        loss_var = tape.add(loss_var, tape.square(tape.add(pred, -y[d])));
      }
    }
    loss_var = tape.mul(loss_var, 1.0 / static_cast<double>(batch.size()));
    Vector grad = tape.gradient(loss_var, theta_vars);
    adam_step(body_adam, wm.body_theta(), grad);
  }
  return losses;
}

double one_step_error(const WorldModel& wm, const std::vector<Transition>& batch,
                      const std::vector<bool>& wraps) {
  if (batch.empty()) throw DomainError("held-out evaluation requires transitions");
  double err = 0.0;
  for (const Transition& t : batch) {
    const Vector f = wm.features(t.s, t.a);
    const Vector y = velocity_target(t.s, t.s_next, wm.dt(), wraps);
    for (int d = 0; d < wm.state_dim(); ++d) {
      double pred = 0.0;
      for (std::size_t k = 0; k < f.size(); ++k) pred += f[k] * wm.head()(k, d);
      const double r = pred - y[d];
      err += r * r;
    }
  }
  return err / static_cast<double>(batch.size());
}

void JointTrainConfig::validate() const {
  std::string problems;
  if (horizon < 1) problems += "horizon must be at least 1; ";
  if (batch_policy < 1) problems += "policy batch must be at least 1; ";
  if (collect_rollouts < 1) problems += "must collect at least one rollout; ";
  if (!(policy_lr > 0.0)) problems += "policy learning rate must be positive; ";
  if (random_start_fraction < 0.0 || random_start_fraction > 1.0) {
    problems += "random start fraction must lie in [0, 1]; ";
  }
  if (!problems.empty()) throw ConfigError("invalid joint training config: " + problems);
}

JointTrainResult joint_train(const EnvModel& env, const MlpPolicy& policy,
                             JointTrainConfig config) {
  config.validate();
  JointTrainResult result;
  result.theta = policy.init_params(split_seed(config.seed, "policy-init"));

  const std::vector<bool> wraps = env.state_wraps();
  const double dt = env_dt(env);
  auto rng_collect = make_rng(split_seed(config.seed, "collect"));
  auto rng_noise = make_rng(split_seed(config.seed, "process-noise"));
  auto rng_wm = make_rng(split_seed(config.seed, "wm-batch"));
  auto rng_imagine = make_rng(split_seed(config.seed, "imagine"));

  WorldModel wm(env.state_dim(), env.action_dim(), dt, config.wm,
                split_seed(config.seed, "wm-init"));
  AdamState body_adam;
  body_adam.lr = config.wm.body_lr;
  ReplayBuffer replay(config.replay_capacity);

  for (std::size_t outer = 0; outer < config.outer_iterations; ++outer) {
    // 1. Real-environment data collection with the current policy.
    for (std::size_t r = 0; r < config.collect_rollouts; ++r) {
      Vector start;
      if (env.kind() == EnvKind::kPendulum && r % 2 == 0) {
        std::uniform_real_distribution<double> dtheta(-0.3, 0.3);
        std::uniform_real_distribution<double> dvel(-1.0, 1.0);
        start = {wrap_angle_value(std::numbers::pi + dtheta(rng_collect)),
                 dvel(rng_collect)};
      } else {
        start = random_state(env, rng_collect);
      }
      EnvState state{env.kind(), start};
      for (std::size_t t = 0; t < config.horizon; ++t) {
        const Vector action = policy.forward(result.theta, state.coords);
        Vector noise(static_cast<std::size_t>(env.noise_dim()), 0.0);
        if (env.noise_dim() > 0) {
          std::normal_distribution<double> dist(0.0, env.scalar_params().sigma);
          for (double& x : noise) x = dist(rng_noise);
        }
        const EnvState next = env.step(state, action, noise);
        replay.push({state.coords, action, next.coords});
        state = next;
      }
    }

    // 2. World-model refit (skipped when imagining through true dynamics).
    if (!config.oracle_dynamics) {
      std::vector<double> losses =
          train_world_model(wm, replay, config.wm, wraps, body_adam, rng_wm);
      result.wm_loss.insert(result.wm_loss.end(), losses.begin(), losses.end());
    }

    // 3. Policy update through imagined rollouts.
    std::vector<Vector> starts(config.batch_policy);
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    for (Vector& s : starts) {
      if (coin(rng_imagine) < config.random_start_fraction) {
        s = random_state(env, rng_imagine);
      } else {
        s = replay.sample(rng_imagine).s;
      }
    }

    Vector grad(result.theta.size(), 0.0);
    double mean_j = 0.0;
    std::vector<Vector> visited;
    const double inv_h = 1.0 / static_cast<double>(config.horizon);
    const double inv_b = 1.0 / static_cast<double>(starts.size());
    const Vector zero_noise(static_cast<std::size_t>(env.noise_dim()), 0.0);

    for (const Vector& start : starts) {
      Tape tape;
      std::vector<Var> theta_vars(result.theta.size());
      for (std::size_t i = 0; i < theta_vars.size(); ++i) {
        theta_vars[i] = tape.leaf(result.theta[i]);
      }
      const std::vector<Var> body_vars =
          config.oracle_dynamics ? std::vector<Var>{} : wm.record_body_theta(tape);
      std::vector<Var> state_vars(start.size());
      for (std::size_t d = 0; d < start.size(); ++d) {
        state_vars[d] = tape.constant(start[d]);
      }
      Var j_var = tape.constant(0.0);
      for (std::size_t t = 0; t < config.horizon; ++t) {
        const std::vector<Var> action =
            policy.forward_recorded(tape, theta_vars, state_vars);
        j_var = tape.add(j_var,
                         tape.mul(env.cost_recorded(tape, state_vars, action), inv_h));
        state_vars =
            config.oracle_dynamics
                ? env.step_recorded(tape, state_vars, action, zero_noise)
                : wm.predict_recorded_cached(tape, body_vars, state_vars, action);
        for (std::size_t d = 0; d < state_vars.size(); ++d) {
          if (wraps[d]) state_vars[d] = tape.wrap_angle(state_vars[d]);
        }
        Vector sv(state_vars.size());
        for (std::size_t d = 0; d < sv.size(); ++d) sv[d] = state_vars[d].value();
        visited.push_back(std::move(sv));
      }
      mean_j += j_var.value() * inv_b;
      const Vector g = tape.gradient(j_var, theta_vars);
      for (std::size_t i = 0; i < g.size(); ++i) grad[i] += g[i] * inv_b;
    }
    result.policy_loss.push_back(mean_j);
    clip_gradient(grad, config.grad_clip);

    std::vector<Vector> metric_states;
    if (visited.size() <= config.metric_batch) {
      metric_states = visited;
    } else {
      metric_states.reserve(config.metric_batch);
      std::uniform_int_distribution<std::size_t> pick(0, visited.size() - 1);
      for (std::size_t i = 0; i < config.metric_batch; ++i) {
        metric_states.push_back(visited[pick(rng_imagine)]);
      }
    }
    const NgStepInfo info = natural_gradient_step(policy, result.theta, grad,
                                                  metric_states, config.policy_lr,
                                                  config.cg);
    if (!info.cg_converged) ++result.cg_warnings;
  }
  return result;
}

}  // namespace wgf
