#pragma once

#include <cstdint>
#include <vector>

#include "wgf/env.hpp"
#include "wgf/matrix.hpp"

namespace wgf {

/// Regular lattice over the environment's state box, lexicographically
/// ordered. Wrapping dimensions (pendulum angle) measure distance on the
/// circle when the transition kernel assigns Gaussian mass.
class StateGrid {
 public:
  StateGrid(const EnvModel& env, const std::vector<int>& resolution);
  /// Arbitrary box, for small test instances.
  StateGrid(Vector lower, Vector upper, std::vector<bool> wraps,
            const std::vector<int>& resolution);

  std::size_t size() const { return points_.size(); }
  int dim() const { return static_cast<int>(lower_.size()); }
  const std::vector<Vector>& points() const { return points_; }
  const Vector& point(std::size_t i) const { return points_[i]; }
  const Vector& lower() const { return lower_; }
  const Vector& upper() const { return upper_; }
  double range(int d) const { return upper_[d] - lower_[d]; }
  bool wraps(int d) const { return wraps_[d]; }

 private:
  void build(const std::vector<int>& resolution);
  Vector lower_, upper_;
  std::vector<bool> wraps_;
  std::vector<Vector> points_;
};

/// M action particles per grid state; the policy is the uniform mixture of
/// Diracs at the particle locations.
struct ParticlePolicy {
  std::size_t n_states = 0;
  std::size_t n_particles = 0;
  int action_dim = 0;
  Vector actions;  // (state, particle, action-dim), row-major

  double& at(std::size_t s, std::size_t i, int d) {
    return actions[(s * n_particles + i) * action_dim + d];
  }
  double at(std::size_t s, std::size_t i, int d) const {
    return actions[(s * n_particles + i) * action_dim + d];
  }
};

ParticlePolicy random_particle_policy(const EnvModel& env, std::size_t n_states,
                                      std::size_t n_particles, std::uint64_t seed);

/// Discrete MDP induced by the smoothed kernel. sigma holds the per-dimension
/// Gaussian widths in state units.
struct GridMdp {
  std::size_t n_states = 0;
  std::size_t n_particles = 0;
  Vector per_particle_kernel;  // (state, particle, next-state)
  Vector per_particle_cost;    // (state, particle)
  DenseMatrix mean_kernel;     // P^pi, row-stochastic
  Vector mean_cost;            // C^pi
  double gamma = 0.95;
  Vector sigma;

  double kernel(std::size_t s, std::size_t i, std::size_t sp) const {
    return per_particle_kernel[(s * n_particles + i) * n_states + sp];
  }
};

struct ValueSolution {
  ProbabilityVector mu;
  Vector v;
  double avg_cost = 0.0;
};

/// Per-dimension kernel widths from a single smoothing parameter:
/// sigma_d = sigma_smooth * range_d / max_range, so sigma_smooth is in state
/// units of the widest dimension (for the scalar regulator this is plain
/// state units and the default equals the environment noise level).
Vector kernel_sigmas(const StateGrid& grid, double sigma_smooth);

GridMdp build_kernel(const EnvModel& env, const StateGrid& grid,
                     const ParticlePolicy& policy, double sigma_smooth,
                     double gamma = 0.95);

/// Solves mu P = mu, sum mu = 1 by the balance system with one equation
/// replaced by normalization. Rank deficiency beyond one dimension raises
/// NonUniqueStationaryError (run the Doeblin coefficient as a diagnostic).
ProbabilityVector stationary_distribution(const DenseMatrix& p);

ValueSolution solve_values(const GridMdp& mdp);

/// Q_{s,i} = c_{s,i} + gamma * sum_{s'} P(s'|s,i) V_{s'}; the cost term is
/// centered by the average cost when gamma = 1.
Vector q_values(const GridMdp& mdp, const ValueSolution& sol);

/// Gradient of J_surrogate = sum_{s,i} Q_{s,i} with respect to the particle
/// actions, differentiating through cost, dynamics and kernel weights with V
/// frozen. Shape (state, particle, action-dim).
Vector particle_gradient(const EnvModel& env, const StateGrid& grid,
                         const ParticlePolicy& policy, const GridMdp& mdp,
                         const ValueSolution& sol);

/// Action-gradients of sum_{s'} P(s'|s,a) f(s') (+ the immediate cost when
/// include_cost) at every particle; the building block behind
/// particle_gradient and the geometry checks.
Vector particle_action_gradients(const EnvModel& env, const StateGrid& grid,
                                 const ParticlePolicy& policy, const Vector& sigma,
                                 const Vector& f, double gamma, bool include_cost);

struct PolicyIterationConfig {
  std::vector<int> resolution;
  std::size_t n_particles = 3;
  double sigma_smooth = 0.2;
  double gamma = 0.95;
  double learning_rate = 0.5;
  std::size_t iterations = 60;
  std::uint64_t seed = 0;
};

struct PolicyIterationResult {
  std::vector<double> avg_cost_history;
  ParticlePolicy policy;
  ValueSolution solution;
  GridMdp mdp;
};

PolicyIterationResult policy_iteration(const EnvModel& env, const StateGrid& grid,
                                       const PolicyIterationConfig& config);

}  // namespace wgf
