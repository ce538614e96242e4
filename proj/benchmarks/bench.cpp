#include <benchmark/benchmark.h>

#include "wgf/grid.hpp"
#include "wgf/mlp.hpp"
#include "wgf/trajopt.hpp"

namespace {

void BM_BuildKernelScalar(benchmark::State& state) {
  const wgf::EnvModel env = wgf::EnvModel::scalar();
  const wgf::StateGrid grid(env, {static_cast<int>(state.range(0))});
  const wgf::ParticlePolicy policy =
      wgf::random_particle_policy(env, grid.size(), 3, 7);
  for (auto _ : state) {
    benchmark::DoNotOptimize(wgf::build_kernel(env, grid, policy, 0.2, 0.95));
  }
}
BENCHMARK(BM_BuildKernelScalar)->Arg(41)->Arg(81);

void BM_RecordedRolloutPendulum(benchmark::State& state) {
  const wgf::EnvModel env = wgf::EnvModel::pendulum();
  const wgf::MlpPolicy policy(2, {64, 64}, 1, {2.0});
  const wgf::Vector theta = policy.init_params(11);
  const std::vector<wgf::Vector> starts{{3.0, 0.0}};
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        wgf::rollout(env, policy, theta, starts, state.range(0), true));
  }
}
BENCHMARK(BM_RecordedRolloutPendulum)->Arg(20)->Arg(80);

void BM_GramMatvec(benchmark::State& state) {
  const wgf::EnvModel env = wgf::EnvModel::pendulum();
  const wgf::MlpPolicy policy(2, {64, 64}, 1, {2.0});
  const wgf::Vector theta = policy.init_params(11);
  std::vector<wgf::Vector> states;
  for (int i = 0; i < state.range(0); ++i) {
    states.push_back({0.1 * i, -0.05 * i});
  }
  const wgf::GramOperator gram(policy, theta, states);
  const wgf::Vector v(policy.n_params(), 1.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(gram.matvec(v));
  }
}
BENCHMARK(BM_GramMatvec)->Arg(16)->Arg(64);

}  // namespace

BENCHMARK_MAIN();
