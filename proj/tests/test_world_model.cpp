#include <cmath>
#include <random>

#include "doctest.h"
#include "wgf/matrix.hpp"
#include "wgf/rng.hpp"
#include "wgf/world_model.hpp"

using namespace wgf;

TEST_CASE("zero head predicts no motion") {
  WorldModelConfig config;
  config.body_hidden = {8};
  config.feature_dim = 4;
  WorldModel wm(2, 1, 0.05, config, 3);
  const Vector s{0.4, -0.7};
  const Vector next = wm.predict(s, {0.3});
  CHECK(next == s);
}

TEST_CASE("predict integrates head-projected features") {
  WorldModelConfig config;
  config.body_hidden = {8};
  config.feature_dim = 3;
  WorldModel wm(1, 1, 0.1, config, 5);
  wm.head()(0, 0) = 1.0;
  wm.head()(1, 0) = -2.0;
  wm.head()(2, 0) = 0.5;
  const Vector s{0.2};
  const Vector phi = wm.features(s, {0.1});
  const double vel = phi[0] - 2.0 * phi[1] + 0.5 * phi[2];
  CHECK(wm.predict(s, {0.1})[0] == doctest::Approx(0.2 + 0.1 * vel).epsilon(1e-12));
}

TEST_CASE("predict_recorded matches predict") {
  WorldModelConfig config;
  config.body_hidden = {8};
  config.feature_dim = 6;
  WorldModel wm(2, 1, 0.05, config, 7);
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t j = 0; j < 2; ++j) wm.head()(i, j) = dist(rng);
  const Vector s{0.3, -0.2};
  const Vector a{0.5};
  const Vector plain = wm.predict(s, a);
  Tape tape;
  std::vector<Var> sv{tape.leaf(s[0]), tape.leaf(s[1])};
  std::vector<Var> av{tape.leaf(a[0])};
  const std::vector<Var> out = wm.predict_recorded(tape, sv, av);
  CHECK(out[0].value() == doctest::Approx(plain[0]).epsilon(1e-14));
  CHECK(out[1].value() == doctest::Approx(plain[1]).epsilon(1e-14));
}

TEST_CASE("velocity_target is wrap-aware") {
  const std::vector<bool> wraps{true, false};
  // Crossing the cut: from +3.1 to -3.1 is +0.083 of circular motion, not -6.2.
  const Vector v = velocity_target({3.1, 0.0}, {-3.1, 1.0}, 0.1, wraps);
  CHECK(v[0] == doctest::Approx((2.0 * M_PI - 6.2) / 0.1).epsilon(1e-9));
  CHECK(v[1] == doctest::Approx(10.0).epsilon(1e-12));
}

TEST_CASE("fit_head solves the ridge normal equations") {
  WorldModelConfig config;
  config.body_hidden = {8};
  config.feature_dim = 5;
  WorldModel wm(1, 1, 0.1, config, 11);
  wm.set_ridge_lambda(0.01);
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<Transition> batch;
  for (int i = 0; i < 30; ++i) {
    Transition t;
    t.s = {dist(rng)};
    t.a = {dist(rng)};
    t.s_next = {t.s[0] + 0.1 * dist(rng)};
    batch.push_back(t);
  }
  fit_head(wm, batch, {false});

  DenseMatrix phi(batch.size(), 5), y(batch.size(), 1);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const Vector f = wm.features(batch[i].s, batch[i].a);
    for (int j = 0; j < 5; ++j) phi(i, j) = f[j];
    y(i, 0) = (batch[i].s_next[0] - batch[i].s[0]) / 0.1;
  }
  const DenseMatrix lhs = phi.transpose().matmul(phi.matmul(wm.head()));
  const DenseMatrix rhs = phi.transpose().matmul(y);
  for (int i = 0; i < 5; ++i) {
    const double full = lhs(i, 0) + 0.01 * wm.head()(i, 0);
    CHECK(std::abs(full - rhs(i, 0)) <= 1e-8 * (1.0 + std::abs(rhs(i, 0))));
  }
}

TEST_CASE("train_world_model recovers linear dynamics") {
  // True dynamics sdot = 2 s - a, well inside the model class.
  WorldModelConfig config;
  config.body_hidden = {16};
  config.feature_dim = 8;
  config.n_updates = 200;
  config.batch = 64;
  WorldModel wm(1, 1, 0.05, config, 17);
  ReplayBuffer buffer(10000);
  std::mt19937_64 data_rng = make_rng(19, "wm-test-data");
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (int i = 0; i < 2000; ++i) {
    Transition t;
    t.s = {dist(data_rng)};
    t.a = {dist(data_rng)};
    t.s_next = {t.s[0] + 0.05 * (2.0 * t.s[0] - t.a[0])};
    buffer.push(t);
  }
  AdamState adam;
  adam.lr = config.body_lr;
  std::mt19937_64 rng = make_rng(19, "wm-test-train");
  const std::vector<double> losses =
      train_world_model(wm, buffer, config, {false}, adam, rng);
  REQUIRE(losses.size() == 200);
  CHECK(losses.back() < 1e-4);

  // Spot-check a held-out prediction.
  const Vector pred = wm.predict({0.3}, {-0.2});
  const double truth = 0.3 + 0.05 * (2.0 * 0.3 + 0.2);
  CHECK(pred[0] == doctest::Approx(truth).epsilon(1e-2));
}

TEST_CASE("zero updates leave the model untouched") {
  WorldModelConfig config;
  config.body_hidden = {8};
  config.feature_dim = 4;
  config.n_updates = 0;
  WorldModel wm(1, 1, 0.05, config, 23);
  const Vector theta_before = wm.body_theta();
  ReplayBuffer buffer(16);
  buffer.push({{0.0}, {0.0}, {0.1}});
  AdamState adam;
  std::mt19937_64 rng = make_rng(23, "wm-test-none");
  const std::vector<double> losses =
      train_world_model(wm, buffer, config, {false}, adam, rng);
  CHECK(losses.empty());
  CHECK(wm.body_theta() == theta_before);
}

TEST_CASE("one_step_error is zero for a perfect model") {
  WorldModelConfig config;
  config.body_hidden = {8};
  config.feature_dim = 4;
  WorldModel wm(1, 1, 0.05, config, 29);
  // Head = 0 predicts sdot = 0; feed transitions with s_next = s.
  std::vector<Transition> batch{{{0.5}, {0.1}, {0.5}}, {{-1.0}, {0.0}, {-1.0}}};
  CHECK(one_step_error(wm, batch, {false}) == doctest::Approx(0.0));
}

TEST_CASE("ReplayBuffer is a bounded FIFO") {
  ReplayBuffer buf(2);
  buf.push({{1.0}, {0.0}, {1.0}});
  buf.push({{2.0}, {0.0}, {2.0}});
  buf.push({{3.0}, {0.0}, {3.0}});
  CHECK(buf.size() == 2);
  std::mt19937_64 rng(31);
  for (int i = 0; i < 50; ++i) {
    CHECK(buf.sample(rng).s[0] >= 2.0);
  }
}

TEST_CASE("joint config validation rejects nonsense") {
  JointTrainConfig config;
  config.horizon = 0;
  config.random_start_fraction = 2.0;
  CHECK_THROWS_AS(config.validate(), ConfigError);
}
