#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "wgf/env.hpp"
#include "wgf/matrix.hpp"
#include "wgf/mlp.hpp"

namespace wgf {

/// Horizon-average cost of a batch of rollouts, with everything the training
/// loop needs afterwards: the visited states for the buffers, a single-
/// trajectory trace for reporting, and the batch-mean parameter gradient
/// when recording was requested.
struct RolloutResult {
  double j = 0.0;
  std::vector<Vector> visited;         // every state entered, all batch elements
  std::vector<Vector> trace_states;    // first batch element, length horizon+1
  std::vector<Vector> trace_actions;   // length horizon
  Vector trace_costs;                  // length horizon
  Vector grad;                         // dJ/dtheta, empty on the fast path
};

/// Unrolls H environment steps per start state. With record = true the whole
/// batch is differentiated (one tape per element, gradients averaged in batch
/// order). noise_rng, when given, drives the scalar regulator's process
/// noise; deterministic systems ignore it.
RolloutResult rollout(const EnvModel& env, const MlpPolicy& policy,
                      const Vector& theta, const std::vector<Vector>& starts,
                      std::size_t horizon, bool record,
                      std::mt19937_64* noise_rng = nullptr);

struct AdamState {
  Vector m, v;
  std::size_t t = 0;
  double lr = 1e-2;
  double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
};

/// Bias-corrected update theta -= lr * m_hat / (sqrt(v_hat) + eps).
void adam_step(AdamState& state, Vector& theta, const Vector& grad);

struct CgConfig {
  double tol = 1e-10;
  std::size_t max_iter = 50;
  double damping = 1e-3;
  /// Trust radius on the applied parameter step. The estimated metric is low
  /// rank (one Jacobian per buffer state), so the CG solution can be huge
  /// along unobserved directions; an uncapped step saturates every tanh unit
  /// and freezes training.
  double step_cap = 1.0;
};

struct NgStepInfo {
  bool cg_converged = true;
  double step_norm = 0.0;
};

/// Preconditions the gradient with the inverse pullback metric estimated on
/// metric_states: solve (M + damping I) d = grad by conjugate gradient, then
/// theta -= lr * d. A non-converged solve still applies the damped iterate;
/// the caller logs the warning.
NgStepInfo natural_gradient_step(const MlpPolicy& policy, Vector& theta,
                                 const Vector& grad,
                                 const std::vector<Vector>& metric_states,
                                 double lr, const CgConfig& cg);

enum class Method { kAdam, kNg };

struct OptimizerConfig {
  Method method = Method::kAdam;
  double learning_rate = 1e-2;
  std::size_t horizon = 80;
  std::size_t batch = 32;
  std::size_t iterations = 200;
  CgConfig cg;
  std::size_t start_capacity = 4096;
  std::size_t metric_batch = 64;
  double grad_clip = 10.0;
  /// Cosine-decay floor for the learning rate; 0 disables the schedule.
  double lr_final = 0.0;
  /// Every eval_every iterations the current policy is scored by a
  /// deterministic rollout from the canonical start, and train() returns the
  /// best-scoring iterate instead of the last one; 0 disables checkpointing.
  std::size_t eval_every = 10;
  std::uint64_t seed = 0;

  void validate() const;
};

struct TrainHistoryRow {
  double j = 0.0;
  double grad_norm = 0.0;
  double step_norm = 0.0;
};

struct TrainResult {
  std::vector<TrainHistoryRow> history;
  Vector theta;
  std::size_t cg_warnings = 0;
  /// Deterministic evaluation score of the returned iterate (canonical
  /// start, no process noise); NaN when checkpointing is disabled.
  double best_eval = 0.0;
};

/// Seeds the start buffer (uniform in bounds; the pendulum mixes in states
/// near the hanging position so swing-up is exercised), then iterates
/// sample-starts / recorded rollout / clipped gradient / Adam-or-NG update.
TrainResult train(const EnvModel& env, const MlpPolicy& policy,
                  const OptimizerConfig& config);

/// Scales grad to global norm max_norm when it exceeds it; returns the
/// pre-clip norm.
double clip_gradient(Vector& grad, double max_norm);

/// Uniform state inside the environment box.
Vector random_state(const EnvModel& env, std::mt19937_64& rng);

}  // namespace wgf
