#include <cmath>
#include <random>

#include "doctest.h"
#include "wgf/env.hpp"
#include "wgf/errors.hpp"
#include "wgf/rng.hpp"
#include "wgf/trajopt.hpp"

using namespace wgf;

TEST_CASE("one-step rollout of the zero policy is the start cost") {
  const EnvModel env = EnvModel::scalar();
  MlpPolicy policy(1, {4}, 1, {5.0});
  const Vector theta(policy.n_params(), 0.0);
  const RolloutResult r = rollout(env, policy, theta, {{2.0}}, 1, false);
  CHECK(r.j == doctest::Approx(4.0).epsilon(1e-12));  // cost(2, 0) = 2^2
  CHECK(r.visited.size() == 1);
  CHECK(r.trace_states.size() == 2);
  CHECK(r.trace_actions.size() == 1);
}

TEST_CASE("rollout averages over the batch") {
  const EnvModel env = EnvModel::scalar();
  MlpPolicy policy(1, {4}, 1, {5.0});
  const Vector theta(policy.n_params(), 0.0);
  const RolloutResult r = rollout(env, policy, theta, {{2.0}, {0.0}}, 1, false);
  CHECK(r.j == doctest::Approx(2.0).epsilon(1e-12));  // (4 + 0) / 2
  CHECK(r.visited.size() == 2);
}

TEST_CASE("recorded and fast rollouts agree on trajectory and cost") {
  const EnvModel env = EnvModel::pendulum();
  MlpPolicy policy(2, {8, 8}, 1, {2.0});
  const Vector theta = policy.init_params(5);
  const std::vector<Vector> starts{{1.0, 0.5}, {-2.0, 1.0}};
  const RolloutResult fast = rollout(env, policy, theta, starts, 25, false);
  const RolloutResult rec = rollout(env, policy, theta, starts, 25, true);
  CHECK(fast.j == rec.j);
  REQUIRE(fast.trace_states.size() == rec.trace_states.size());
  for (std::size_t t = 0; t < fast.trace_states.size(); ++t) {
    CHECK(fast.trace_states[t] == rec.trace_states[t]);
  }
  CHECK(rec.grad.size() == policy.n_params());
  CHECK(fast.grad.empty());
}

TEST_CASE("rollout gradient matches finite differences") {
  const EnvModel env = EnvModel::pendulum();
  MlpPolicy policy(2, {6}, 1, {2.0});
  Vector theta = policy.init_params(9);
  const std::vector<Vector> starts{{2.5, 0.0}, {-1.0, 1.0}};
  const std::size_t horizon = 12;
  const RolloutResult rec = rollout(env, policy, theta, starts, horizon, true);
  const double h = 1e-6;
  for (std::size_t i = 0; i < policy.n_params(); i += 5) {
    Vector tp = theta, tm = theta;
    tp[i] += h;
    tm[i] -= h;
    const double jp = rollout(env, policy, tp, starts, horizon, false).j;
    const double jm = rollout(env, policy, tm, starts, horizon, false).j;
    const double fd = (jp - jm) / (2.0 * h);
    CHECK(rec.grad[i] == doctest::Approx(fd).epsilon(1e-4));
  }
}

TEST_CASE("rollout rejects empty starts and zero horizon") {
  const EnvModel env = EnvModel::scalar();
  MlpPolicy policy(1, {4}, 1, {5.0});
  const Vector theta(policy.n_params(), 0.0);
  CHECK_THROWS_AS(rollout(env, policy, theta, {}, 5, false), DomainError);
  CHECK_THROWS_AS(rollout(env, policy, theta, {{1.0}}, 0, false), DomainError);
}

TEST_CASE("clip_gradient rescales only above the threshold") {
  Vector g{3.0, 4.0};
  CHECK(clip_gradient(g, 10.0) == doctest::Approx(5.0));
  CHECK(g == Vector{3.0, 4.0});
  CHECK(clip_gradient(g, 1.0) == doctest::Approx(5.0));
  CHECK(norm2(g) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(g[0] == doctest::Approx(0.6).epsilon(1e-12));
}

TEST_CASE("adam first step moves by lr against the gradient sign") {
  AdamState state;
  state.lr = 0.1;
  Vector theta{1.0, -1.0, 0.0};
  const Vector grad{0.5, -2.0, 0.0};
  adam_step(state, theta, grad);
  // Bias-corrected first step is lr * g / (|g| + eps), i.e. nearly lr * sign(g).
  CHECK(theta[0] == doctest::Approx(1.0 - 0.1).epsilon(1e-6));
  CHECK(theta[1] == doctest::Approx(-1.0 + 0.1).epsilon(1e-6));
  CHECK(theta[2] == doctest::Approx(0.0));
}

TEST_CASE("adam rejects mismatched gradient lengths") {
  AdamState state;
  Vector theta{1.0};
  CHECK_THROWS_AS(adam_step(state, theta, {1.0, 2.0}), DomainError);
}

TEST_CASE("natural gradient with huge damping shrinks toward plain gradient direction") {
  MlpPolicy policy(2, {6}, 1, {2.0});
  Vector theta = policy.init_params(3);
  const Vector reference = theta;
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Vector grad(policy.n_params());
  for (double& x : grad) x = dist(rng);
  CgConfig cg;
  cg.damping = 1e9;  // metric is negligible next to the damping term
  const NgStepInfo info =
      natural_gradient_step(policy, theta, grad, {{0.1, 0.2}}, 1.0, cg);
  CHECK(info.cg_converged);
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const double step = reference[i] - theta[i];
    CHECK(step == doctest::Approx(grad[i] / 1e9).epsilon(1e-6));
  }
}

TEST_CASE("natural gradient step cap bounds the parameter motion") {
  MlpPolicy policy(2, {6}, 1, {2.0});
  Vector theta = policy.init_params(13);
  const Vector before = theta;
  Vector grad(policy.n_params(), 1.0);
  CgConfig cg;
  cg.damping = 1e-6;  // rank-deficient metric would otherwise explode the step
  cg.step_cap = 0.5;
  natural_gradient_step(policy, theta, grad, {{0.1, 0.2}}, 1.0, cg);
  double moved = 0.0;
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const double d = theta[i] - before[i];
    moved += d * d;
  }
  CHECK(std::sqrt(moved) <= 0.5 + 1e-9);
  CHECK(std::sqrt(moved) == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("optimizer config validation collects problems") {
  OptimizerConfig config;
  config.horizon = 0;
  config.batch = 0;
  config.learning_rate = -1.0;
  CHECK_THROWS_AS(config.validate(), ConfigError);
}

TEST_CASE("train on the scalar regulator reduces the objective") {
  const EnvModel env = EnvModel::scalar();
  MlpPolicy policy(1, {16}, 1, {5.0});
  OptimizerConfig config;
  config.method = Method::kAdam;
  config.learning_rate = 0.02;
  config.horizon = 20;
  config.batch = 8;
  config.iterations = 40;
  config.seed = 1;
  const TrainResult r = train(env, policy, config);
  REQUIRE(r.history.size() == 40);
  CHECK(r.theta.size() == policy.n_params());
  double early = 0.0, late = 0.0;
  for (std::size_t i = 0; i < 5; ++i) early += r.history[i].j;
  for (std::size_t i = 35; i < 40; ++i) late += r.history[i].j;
  CHECK(late < early);
}

TEST_CASE("train is deterministic per seed") {
  const EnvModel env = EnvModel::scalar();
  MlpPolicy policy(1, {8}, 1, {5.0});
  OptimizerConfig config;
  config.horizon = 10;
  config.batch = 4;
  config.iterations = 5;
  config.seed = 7;
  const TrainResult a = train(env, policy, config);
  const TrainResult b = train(env, policy, config);
  CHECK(a.theta == b.theta);
  for (std::size_t i = 0; i < a.history.size(); ++i) {
    CHECK(a.history[i].j == b.history[i].j);
  }
}
