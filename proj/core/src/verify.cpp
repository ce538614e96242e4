#include "wgf/verify.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>

#include "wgf/errors.hpp"
#include "wgf/finite_diff.hpp"
#include "wgf/rng.hpp"
#include "wgf/transport.hpp"

namespace wgf {

namespace {

ParticlePolicy shifted_policy(const ParticlePolicy& base, const VelocityField& v,
                              double eps) {
  ParticlePolicy out = base;
  for (std::size_t k = 0; k < out.actions.size(); ++k) {
    out.actions[k] += eps * v.v[k];
  }
  return out;
}

/// <mu, (1/M) sum_i <g_i, v_i>> for per-particle gradient tensors.
double weighted_pairing(const ProbabilityVector& mu, const Vector& g,
                        const VelocityField& v) {
  const std::size_t m = v.n_particles;
  const std::size_t block = m * static_cast<std::size_t>(v.action_dim);
  double total = 0.0;
  for (std::size_t s = 0; s < v.n_states; ++s) {
    double acc = 0.0;
    for (std::size_t k = 0; k < block; ++k) {
      acc += g[s * block + k] * v.v[s * block + k];
    }
    total += mu.weights()[s] * acc / static_cast<double>(m);
  }
  return total;
}

/// Solves (I - P)psi = source - <mu, source> * 1 with <mu, psi> = 0 by
/// replacing the heaviest-mu balance row with the centering constraint.
Vector solve_poisson(const DenseMatrix& p, const ProbabilityVector& mu,
                     const Vector& source) {
  const std::size_t n = p.rows();
  const double mean = dot(mu.weights(), source);
  std::size_t pin = 0;
  for (std::size_t i = 1; i < n; ++i) {
    if (mu.weights()[i] > mu.weights()[pin]) pin = i;
  }
  DenseMatrix a(n, n);
  Vector b(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (i == pin) {
      for (std::size_t j = 0; j < n; ++j) a(i, j) = mu.weights()[j];
      b[i] = 0.0;
      continue;
    }
    for (std::size_t j = 0; j < n; ++j) a(i, j) = (i == j ? 1.0 : 0.0) - p(i, j);
    b[i] = source[i] - mean;
  }
  return linear_solve(a, b);
}

/// Plain second central difference of F at 0 with step h.
double second_difference(const std::function<double(double)>& f, double f0, double h) {
  return (f(h) - 2.0 * f0 + f(-h)) / (h * h);
}

/// Two-level Richardson extrapolation over the step ladder {h, h/2, h/4}.
double richardson_second(const std::function<double(double)>& f, double h) {
  const double f0 = f(0.0);
  const double d1 = second_difference(f, f0, h);
  const double d2 = second_difference(f, f0, h / 2.0);
  const double d3 = second_difference(f, f0, h / 4.0);
  const double r12 = (4.0 * d2 - d1) / 3.0;
  const double r23 = (4.0 * d3 - d2) / 3.0;
  return (16.0 * r23 - r12) / 15.0;
}

}  // namespace

VelocityField random_velocity_field(std::size_t n_states, std::size_t n_particles,
                                    int action_dim, std::uint64_t seed,
                                    double scale) {
  VelocityField field;
  field.n_states = n_states;
  field.n_particles = n_particles;
  field.action_dim = action_dim;
  field.v.resize(n_states * n_particles * static_cast<std::size_t>(action_dim));
  auto rng = make_rng(seed);
  std::normal_distribution<double> dist(0.0, scale);
  for (double& x : field.v) x = dist(rng);
  return field;
}

double shifted_average_cost(const EnvModel& env, const StateGrid& grid,
                            const ParticlePolicy& policy, const VelocityField& v,
                            double eps, double sigma_smooth) {
  const ParticlePolicy moved = shifted_policy(policy, v, eps);
  const GridMdp mdp = build_kernel(env, grid, moved, sigma_smooth, /*gamma=*/1.0);
  return solve_values(mdp).avg_cost;
}

GradientIdentityReport gradient_identity_check(const EnvModel& env,
                                               const StateGrid& grid,
                                               const ParticlePolicy& policy,
                                               const VelocityField& v,
                                               double sigma_smooth,
                                               double fd_step) {
  const GridMdp mdp = build_kernel(env, grid, policy, sigma_smooth, 1.0);
  const ValueSolution sol = solve_values(mdp);
  const Vector grad_q = particle_action_gradients(env, grid, policy, mdp.sigma,
                                                  sol.v, 1.0, /*include_cost=*/true);
  GradientIdentityReport report;
  report.analytic = weighted_pairing(sol.mu, grad_q, v);
  const auto f = [&](double eps) {
    return shifted_average_cost(env, grid, policy, v, eps, sigma_smooth);
  };
  report.fd_slope = finite_diff(f, 0.0, fd_step).value;
  report.relative_error =
      std::abs(report.analytic - report.fd_slope) / (std::abs(report.analytic) + 1e-12);
  return report;
}

HessianReport hessian_check(const EnvModel& env, const StateGrid& grid,
                            const ParticlePolicy& policy, const VelocityField& v,
                            double sigma_smooth) {
  const GridMdp mdp = build_kernel(env, grid, policy, sigma_smooth, 1.0);
  const ValueSolution sol = solve_values(mdp);
  const Vector grad_q = particle_action_gradients(env, grid, policy, mdp.sigma,
                                                  sol.v, 1.0, /*include_cost=*/true);

  HessianReport report;
  const std::size_t m = policy.n_particles;
  const std::size_t adim = static_cast<std::size_t>(policy.action_dim);

  // Directional action curvature v' Hess_a Q v per particle, by a central
  // difference of the reverse-mode gradient along v (each particle's Q
  // depends only on its own action, so the whole field shifts at once).
  const double h = 1e-4;
  const Vector grad_plus = particle_action_gradients(
      env, grid, shifted_policy(policy, v, h), mdp.sigma, sol.v, 1.0, true);
  const Vector grad_minus = particle_action_gradients(
      env, grid, shifted_policy(policy, v, -h), mdp.sigma, sol.v, 1.0, true);
  for (std::size_t s = 0; s < grid.size(); ++s) {
    double acc = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t d = 0; d < adim; ++d) {
        const std::size_t k = (s * m + i) * adim + d;
        acc += (grad_plus[k] - grad_minus[k]) / (2.0 * h) * v.v[k];
      }
    }
    report.t2_local += sol.mu.weights()[s] * acc / static_cast<double>(m);
  }

  // Local alignment G[v](s) = (1/M) sum_i <grad_a Q, v_i>, the Poisson
  // source for the measure-variation term. The source is centered by its
  // stationary mean so the singular balance system stays solvable; the
  // constant offset cannot enter T1 because kernel rows sum to one.
  Vector source(grid.size(), 0.0);
  for (std::size_t s = 0; s < grid.size(); ++s) {
    double acc = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t d = 0; d < adim; ++d) {
        const std::size_t k = (s * m + i) * adim + d;
        acc += grad_q[k] * v.v[k];
      }
    }
    source[s] = acc / static_cast<double>(m);
  }
  const Vector psi = solve_poisson(mdp.mean_kernel, sol.mu, source);

  const double source_mean = dot(sol.mu.weights(), source);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    double row = psi[i];
    for (std::size_t j = 0; j < grid.size(); ++j) {
      row -= mdp.mean_kernel(i, j) * psi[j];
    }
    report.psi_residual =
        std::max(report.psi_residual, std::abs(row - (source[i] - source_mean)));
  }
  report.psi_mean = dot(sol.mu.weights(), psi);

  const Vector grad_q_psi = particle_action_gradients(env, grid, policy, mdp.sigma,
                                                      psi, 1.0, /*include_cost=*/false);
  report.t1 = weighted_pairing(sol.mu, grad_q_psi, v);
  report.total = report.t2_local + 2.0 * report.t1;

  const std::function<double(double)> f = [&](double eps) {
    return shifted_average_cost(env, grid, policy, v, eps, sigma_smooth);
  };
  report.fd_second = richardson_second(f, 1e-2);
  report.relative_error =
      std::abs(report.total - report.fd_second) / (std::abs(report.fd_second) + 1e-9);
  return report;
}

double convexity_probe(const EnvModel& env, const StateGrid& grid,
                       std::size_t n_particles, std::size_t trials,
                       double sigma_smooth, std::uint64_t seed) {
  double min_curvature = std::numeric_limits<double>::infinity();
  for (std::size_t trial = 0; trial < trials; ++trial) {
    const ParticlePolicy policy = random_particle_policy(
        env, grid.size(), n_particles, split_seed(seed, "probe-policy") + trial);
    const VelocityField v =
        random_velocity_field(grid.size(), n_particles, policy.action_dim,
                              split_seed(seed, "probe-velocity") + trial);
    const std::function<double(double)> f = [&](double eps) {
      return shifted_average_cost(env, grid, policy, v, eps, sigma_smooth);
    };
    min_curvature = std::min(min_curvature, richardson_second(f, 1e-2));
  }
  return min_curvature;
}

ContractionReport contraction_estimate(const EnvModel& env, double constant_action,
                                       std::size_t trials, std::size_t samples,
                                       std::size_t horizon, std::uint64_t seed) {
  if (env.kind() != EnvKind::kScalar) {
    throw DomainError("the contraction estimate needs the 1-D state space");
  }
  const ScalarRegulatorParams& p = env.scalar_params();
  ContractionReport report;
  // sup_s |f'(s)| for f(s) = alpha*s + beta*sin(s): attained on a fine scan.
  for (int i = 0; i <= 6000; ++i) {
    const double s = p.s_min + (p.s_max - p.s_min) * i / 6000.0;
    report.bound = std::max(report.bound, std::abs(p.alpha + p.beta * std::cos(s)));
  }

  auto rng = make_rng(split_seed(seed, "contraction"));
  std::uniform_real_distribution<double> init(p.s_min, p.s_max);
  std::normal_distribution<double> noise(0.0, p.sigma);
  const Vector action{constant_action};

  for (std::size_t trial = 0; trial < trials; ++trial) {
    Vector cloud1(samples), cloud2(samples);
    for (double& x : cloud1) x = init(rng);
    for (double& x : cloud2) x = init(rng);
    for (std::size_t t = 0; t < horizon; ++t) {
      const double before =
          wasserstein2_1d(EmpiricalMeasure1D{cloud1}, EmpiricalMeasure1D{cloud2});
      if (before < 1e-12) {
        ++report.skipped;
        break;
      }
      // Common noise assigned by rank keeps the sorted coupling optimal for
      // both clouds, so the pushed-forward distance is a genuine W2 bound.
      std::sort(cloud1.begin(), cloud1.end());
      std::sort(cloud2.begin(), cloud2.end());
      for (std::size_t j = 0; j < samples; ++j) {
        const Vector xi{noise(rng)};
        cloud1[j] = env.step({env.kind(), {cloud1[j]}}, action, xi).coords[0];
        cloud2[j] = env.step({env.kind(), {cloud2[j]}}, action, xi).coords[0];
      }
      const double after =
          wasserstein2_1d(EmpiricalMeasure1D{cloud1}, EmpiricalMeasure1D{cloud2});
      report.ratios.push_back(after / before);
    }
  }
  for (double r : report.ratios) report.empirical_kappa = std::max(report.empirical_kappa, r);
  return report;
}

double doeblin_coefficient(const DenseMatrix& p, std::size_t m) {
  if (p.rows() != p.cols()) throw DomainError("Doeblin coefficient needs a square kernel");
  if (m < 1) throw DomainError("Doeblin step count must be at least 1");
  DenseMatrix pm = p;
  for (std::size_t k = 1; k < m; ++k) pm = pm.matmul(p);
  double alpha = 0.0;
  for (std::size_t j = 0; j < p.cols(); ++j) {
    double col_min = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < p.rows(); ++i) col_min = std::min(col_min, pm(i, j));
    alpha += col_min;
  }
  return alpha;
}

}  // namespace wgf
