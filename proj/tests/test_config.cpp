#include <string>

#include "doctest.h"
#include "wgf/config.hpp"
#include "wgf/errors.hpp"

using namespace wgf;

namespace {

RunConfig resolved(const std::string& text, const std::string& command,
                   const std::string& env_name) {
  RunConfig c = parse_config_text(text);
  c.command = command;
  c.env_name = env_name;
  resolve(c);
  return c;
}

}  // namespace

TEST_CASE("parse accepts comments, blanks, and whitespace around key=value") {
  const RunConfig c = parse_config_text(
      "# a comment\n"
      "\n"
      "  lr = 0.02  # trailing comment\n"
      "method=ng\n");
  REQUIRE(c.overrides.size() == 2);
  CHECK(c.overrides[0].first == "lr");
  CHECK(c.overrides[0].second == "0.02");
  CHECK(c.overrides[1].first == "method");
  CHECK(c.overrides[1].second == "ng");
}

TEST_CASE("unknown keys are rejected with their line number") {
  try {
    parse_config_text("lr=0.1\n\nlearningrate=0.2\n");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("line 3") != std::string::npos);
    CHECK(msg.find("learningrate") != std::string::npos);
  }
}

TEST_CASE("lines without '=' and keys without values are rejected") {
  CHECK_THROWS_AS(parse_config_text("just words\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("lr=\n"), ConfigError);
}

TEST_CASE("all range violations are collected into one error") {
  try {
    resolved("lr=-1\nbatch=0\nhorizon=0\ngamma=2\n", "traj", "scalar");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("lr must be positive") != std::string::npos);
    CHECK(msg.find("batch must be at least 1") != std::string::npos);
    CHECK(msg.find("horizon must be at least 1") != std::string::npos);
    CHECK(msg.find("gamma must lie in (0, 1]") != std::string::npos);
  }
}

TEST_CASE("non-numeric values are reported by key") {
  try {
    resolved("lr=fast\n", "traj", "scalar");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("'lr' expects a number") != std::string::npos);
  }
}

TEST_CASE("the grid command rejects the oscillator chain") {
  CHECK_THROWS_AS(resolved("", "grid", "oscillators"), ConfigError);
  CHECK_NOTHROW(resolved("", "grid", "pendulum"));
  CHECK_NOTHROW(resolved("", "traj", "oscillators"));
}

TEST_CASE("unknown environments are rejected") {
  CHECK_THROWS_AS(resolved("", "traj", "cartpole"), ConfigError);
}

TEST_CASE("scalar defaults") {
  const RunConfig c = resolved("", "traj", "scalar");
  CHECK(c.scalar.alpha == 0.5);
  CHECK(c.scalar.beta == 0.1);
  CHECK(c.scalar.delta == 0.2);
  CHECK(c.scalar.sigma == 0.2);
  CHECK(c.traj.method == Method::kAdam);
  CHECK(c.traj.learning_rate == 0.01);
  CHECK(c.traj.horizon == 30);
  CHECK(c.traj.iterations == 200);
  CHECK(c.traj.start_capacity == 4096);
  CHECK(c.traj.grad_clip == 10.0);
  CHECK(c.traj.cg.damping == 1e-3);
  CHECK(c.traj.cg.step_cap == 1.0);
  CHECK(c.hidden == std::vector<int>{64, 64});
  CHECK(c.grid.resolution == std::vector<int>{81});
  CHECK(c.grid.sigma_smooth == c.scalar.sigma);
}

TEST_CASE("pendulum defaults differ where the landscape demands it") {
  const RunConfig c = resolved("", "traj", "pendulum");
  CHECK(c.pendulum.g == 10.0);
  CHECK(c.pendulum.dt == 0.05);
  CHECK(c.pendulum.u_max == 2.0);
  CHECK(c.traj.learning_rate == 0.05);
  CHECK(c.traj.horizon == 80);
  CHECK(c.traj.iterations == 600);
  CHECK(c.traj.start_capacity == (1u << 20));
  CHECK(c.grid.resolution == std::vector<int>({41, 41}));
  CHECK(c.grid.sigma_smooth == 0.1);
}

TEST_CASE("oscillator defaults") {
  const RunConfig c = resolved("method=ng", "traj", "oscillators");
  CHECK(c.traj.method == Method::kNg);
  CHECK(c.traj.learning_rate == 0.3);
  CHECK(c.traj.horizon == 60);
  CHECK(c.hidden == std::vector<int>({128, 128}));
}

TEST_CASE("overrides reach the resolved config") {
  const RunConfig c = resolved(
      "lr=0.07\nhorizon=17\nhidden=8,4\nresolution=5,6\nstep_cap=0.25\n"
      "feature_dim=32\ncontraction_trials=7\n",
      "traj", "pendulum");
  CHECK(c.traj.learning_rate == 0.07);
  CHECK(c.traj.horizon == 17);
  CHECK(c.hidden == std::vector<int>({8, 4}));
  CHECK(c.grid.resolution == std::vector<int>({5, 6}));
  CHECK(c.traj.cg.step_cap == 0.25);
  CHECK(c.wm.cg.step_cap == 0.25);  // world model inherits the CG settings
  CHECK(c.wm.wm.feature_dim == 32);
  CHECK(c.verify.contraction_trials == 7);
}

TEST_CASE("seed propagates to every sub-config") {
  RunConfig c = parse_config_text("");
  c.command = "traj";
  c.env_name = "scalar";
  c.seed = 99;
  resolve(c);
  CHECK(c.grid.seed == 99);
  CHECK(c.traj.seed == 99);
  CHECK(c.wm.seed == 99);
}

TEST_CASE("make_env builds the named environment") {
  RunConfig c = resolved("", "traj", "pendulum");
  CHECK(c.make_env().state_dim() == 2);
  c.env_name = "nonesuch";
  CHECK_THROWS_AS(c.make_env(), ConfigError);
}

TEST_CASE("load_config fails cleanly on a missing file") {
  CHECK_THROWS_AS(load_config("/nonexistent/path/run.cfg"), ConfigError);
}
