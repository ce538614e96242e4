#pragma once

#include <cstdint>
#include <vector>

#include "wgf/env.hpp"
#include "wgf/grid.hpp"
#include "wgf/matrix.hpp"

namespace wgf {

/// One displacement direction per action particle: the tangent field of a
/// straight-line particle motion a_i(t) = a_i + t * v_i.
struct VelocityField {
  std::size_t n_states = 0;
  std::size_t n_particles = 0;
  int action_dim = 0;
  Vector v;  // (state, particle, action-dim)

  double& at(std::size_t s, std::size_t i, int d) {
    return v[(s * n_particles + i) * action_dim + d];
  }
  double at(std::size_t s, std::size_t i, int d) const {
    return v[(s * n_particles + i) * action_dim + d];
  }
};

VelocityField random_velocity_field(std::size_t n_states, std::size_t n_particles,
                                    int action_dim, std::uint64_t seed,
                                    double scale = 1.0);

struct GradientIdentityReport {
  double analytic = 0.0;      // stationary-weighted pairing <grad, v>
  double fd_slope = 0.0;      // dF/de at 0, F(e) = average cost of shifted policy
  double relative_error = 0.0;
};

/// Average cost of the policy with every particle displaced by eps * v,
/// with the stationary distribution and values re-solved from scratch.
double shifted_average_cost(const EnvModel& env, const StateGrid& grid,
                            const ParticlePolicy& policy, const VelocityField& v,
                            double eps, double sigma_smooth);

GradientIdentityReport gradient_identity_check(const EnvModel& env,
                                               const StateGrid& grid,
                                               const ParticlePolicy& policy,
                                               const VelocityField& v,
                                               double sigma_smooth,
                                               double fd_step = 1e-3);

struct HessianReport {
  double t1 = 0.0;
  double t2_local = 0.0;
  double total = 0.0;          // t2_local + 2 * t1
  double fd_second = 0.0;      // Richardson-extrapolated second difference
  double relative_error = 0.0;
  double psi_residual = 0.0;   // ||(I - P)psi - centered source||_inf
  double psi_mean = 0.0;       // <mu, psi>
};

HessianReport hessian_check(const EnvModel& env, const StateGrid& grid,
                            const ParticlePolicy& policy, const VelocityField& v,
                            double sigma_smooth);

/// Minimum observed second difference of the average cost along random
/// particle directions, for dynamics that ignore the action; nonnegative (up
/// to finite-difference noise) exactly when the immediate cost is convex in
/// the action.
double convexity_probe(const EnvModel& env, const StateGrid& grid,
                       std::size_t n_particles, std::size_t trials,
                       double sigma_smooth, std::uint64_t seed);

struct ContractionReport {
  double empirical_kappa = 0.0;
  double bound = 0.0;  // sup_s |f'(s)| + delta * K_pi (constant policy: 0)
  std::vector<double> ratios;
  std::size_t skipped = 0;
};

/// Pushes paired sample clouds through the scalar dynamics with common
/// noise assigned by rank (a coupling, hence an upper bound on W2) and
/// reports the per-step contraction ratios.
ContractionReport contraction_estimate(const EnvModel& env, double constant_action,
                                       std::size_t trials, std::size_t samples,
                                       std::size_t horizon, std::uint64_t seed);

/// alpha = sum_{s'} min_s P^m(s, s'): the mass of the best state-independent
/// minorizing measure; positive alpha certifies a unique stationary law.
double doeblin_coefficient(const DenseMatrix& p, std::size_t m);

}  // namespace wgf
