#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "wgf/env.hpp"
#include "wgf/matrix.hpp"
#include "wgf/mlp.hpp"
#include "wgf/trajopt.hpp"

namespace wgf {

struct Transition {
  Vector s, a, s_next;
};

/// Bounded FIFO of transitions with seeded uniform sampling.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);
  void push(Transition t);
  const Transition& sample(std::mt19937_64& rng) const;
  const std::vector<Transition>& items() const { return items_; }
  std::size_t size() const { return items_.size(); }
  bool empty() const { return items_.empty(); }

 private:
  std::size_t capacity_;
  std::size_t next_ = 0;
  std::vector<Transition> items_;
};

struct WorldModelConfig {
  std::vector<int> body_hidden = {128};
  int feature_dim = 128;
  double ridge_lambda = 1e-3;
  double body_lr = 1e-3;
  std::size_t n_updates = 50;
  std::size_t batch = 256;
};

/// Separable dynamics model: nonlinear tanh body producing features, linear
/// head solved in closed form by ridge regression. predict integrates the
/// learned velocity, s' = s + (features . W) * dt, with no clipping; the
/// model is trained on unclipped velocity targets (wrap-aware on angle
/// dimensions).
class WorldModel {
 public:
  WorldModel(int state_dim, int action_dim, double dt,
             const WorldModelConfig& config, std::uint64_t seed);

  int state_dim() const { return state_dim_; }
  int action_dim() const { return action_dim_; }
  double dt() const { return dt_; }
  const MlpPolicy& body() const { return body_; }
  Vector& body_theta() { return body_theta_; }
  const Vector& body_theta() const { return body_theta_; }
  DenseMatrix& head() { return head_; }
  const DenseMatrix& head() const { return head_; }
  double ridge_lambda() const { return lambda_; }
  void set_ridge_lambda(double l) { lambda_ = l; }

  Vector features(const Vector& s, const Vector& a) const;
  Vector predict(const Vector& s, const Vector& a) const;
  /// Body parameters enter as constants; only s and a carry derivatives.
  std::vector<Var> predict_recorded(Tape& tape, const std::vector<Var>& s,
                                    const std::vector<Var>& a) const;
  /// Records the body parameters once so multi-step imagined rollouts reuse
  /// the same constant block.
  std::vector<Var> record_body_theta(Tape& tape) const;
  std::vector<Var> predict_recorded_cached(Tape& tape,
                                           const std::vector<Var>& body_theta_vars,
                                           const std::vector<Var>& s,
                                           const std::vector<Var>& a) const;

 private:
  int state_dim_, action_dim_;
  double dt_;
  double lambda_;
  MlpPolicy body_;
  Vector body_theta_;
  DenseMatrix head_;  // feature_dim x state_dim
};

/// Velocity target (s' - s)/dt, measured along the circle on wrapping
/// dimensions.
Vector velocity_target(const Vector& s, const Vector& s_next, double dt,
                       const std::vector<bool>& wraps);

/// Refits the linear head on the batch by ridge regression and returns the
/// batch-mean squared residual of the refit model.
double fit_head(WorldModel& wm, const std::vector<Transition>& batch,
                const std::vector<bool>& wraps);

/// VarPro alternation: per update, sample a batch, solve the head exactly,
/// then take one Adam step on the body with the head frozen. Returns the
/// post-refit loss per update.
std::vector<double> train_world_model(WorldModel& wm, const ReplayBuffer& buffer,
                                      const WorldModelConfig& config,
                                      const std::vector<bool>& wraps,
                                      AdamState& body_adam, std::mt19937_64& rng);

/// Batch-mean squared one-step velocity error on held-out transitions.
double one_step_error(const WorldModel& wm, const std::vector<Transition>& batch,
                      const std::vector<bool>& wraps);

struct JointTrainConfig {
  WorldModelConfig wm;
  std::size_t outer_iterations = 40;
  std::size_t horizon = 80;
  std::size_t batch_policy = 32;
  std::size_t collect_rollouts = 4;
  double policy_lr = 0.05;
  CgConfig cg;
  double grad_clip = 10.0;
  std::size_t metric_batch = 64;
  std::size_t replay_capacity = 100000;
  double random_start_fraction = 0.1;
  /// Ablation: imagination runs through the true dynamics instead of the
  /// learned model (the policy-optimization path is otherwise identical).
  bool oracle_dynamics = false;
  std::uint64_t seed = 0;

  void validate() const;
};

struct JointTrainResult {
  std::vector<double> policy_loss;  // imagined J per outer iteration
  std::vector<double> wm_loss;      // per model update, in order
  std::size_t cg_warnings = 0;
  Vector theta;
};

/// Algorithm: collect real transitions with the current policy, refit the
/// world model, then update the policy by natural gradient through imagined
/// rollouts started from replayed states (with a uniform-random mixture).
JointTrainResult joint_train(const EnvModel& env, const MlpPolicy& policy,
                             JointTrainConfig config);

}  // namespace wgf
