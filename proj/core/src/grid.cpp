#include "wgf/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "wgf/errors.hpp"
#include "wgf/rng.hpp"
#include "wgf/tape.hpp"

namespace wgf {

namespace {

// Signed distance between two coordinates; wrapping dimensions are angles
// and measure along the circle.
double coord_distance(double a, double b, bool wrap) {
  return wrap ? wrap_angle_value(a - b) : a - b;
}

}  // namespace

StateGrid::StateGrid(const EnvModel& env, const std::vector<int>& resolution)
    : lower_(env.state_lower()),
      upper_(env.state_upper()),
      wraps_(env.state_wraps()) {
  if (env.kind() == EnvKind::kOscillators) {
    throw DomainError(
        "grid solver supports the scalar and pendulum state spaces only; the "
        "oscillator chain is 10-dimensional");
  }
  build(resolution);
}

StateGrid::StateGrid(Vector lower, Vector upper, std::vector<bool> wraps,
                     const std::vector<int>& resolution)
    : lower_(std::move(lower)), upper_(std::move(upper)), wraps_(std::move(wraps)) {
  build(resolution);
}

void StateGrid::build(const std::vector<int>& resolution) {
  const int d = dim();
  if (static_cast<int>(resolution.size()) != d) {
    throw DomainError("grid resolution must list one entry per state dimension");
  }
  std::size_t total = 1;
  std::vector<Vector> axes(d);
  for (int k = 0; k < d; ++k) {
    const int r = resolution[k];
    if (r < 2) throw DomainError("grid resolution must be at least 2 per dimension");
    axes[k].resize(r);
    const double span = upper_[k] - lower_[k];
    // Wrapping axes identify both endpoints, so the duplicate is dropped.
    const double h = wraps_[k] ? span / r : span / (r - 1);
    for (int i = 0; i < r; ++i) axes[k][i] = lower_[k] + h * i;
    total *= static_cast<std::size_t>(r);
  }
  points_.resize(total, Vector(d));
  for (std::size_t idx = 0; idx < total; ++idx) {
    std::size_t rem = idx;
    for (int k = d - 1; k >= 0; --k) {
      const std::size_t r = axes[k].size();
      points_[idx][k] = axes[k][rem % r];
      rem /= r;
    }
  }
}

ParticlePolicy random_particle_policy(const EnvModel& env, std::size_t n_states,
                                      std::size_t n_particles, std::uint64_t seed) {
  ParticlePolicy policy;
  policy.n_states = n_states;
  policy.n_particles = n_particles;
  policy.action_dim = env.action_dim();
  policy.actions.resize(n_states * n_particles * policy.action_dim);
  auto rng = make_rng(split_seed(seed, "grid-particles"));
  for (std::size_t s = 0; s < n_states; ++s) {
    for (std::size_t i = 0; i < n_particles; ++i) {
      for (int d = 0; d < policy.action_dim; ++d) {
        std::uniform_real_distribution<double> dist(env.action_lower(d),
                                                    env.action_upper(d));
        policy.at(s, i, d) = dist(rng);
      }
    }
  }
  return policy;
}

Vector kernel_sigmas(const StateGrid& grid, double sigma_smooth) {
  if (!(sigma_smooth > 0.0)) throw DomainError("kernel smoothing width must be positive");
  double max_range = 0.0;
  for (int d = 0; d < grid.dim(); ++d) max_range = std::max(max_range, grid.range(d));
  Vector sigma(grid.dim());
  for (int d = 0; d < grid.dim(); ++d) {
    sigma[d] = sigma_smooth * grid.range(d) / max_range;
  }
  return sigma;
}

GridMdp build_kernel(const EnvModel& env, const StateGrid& grid,
                     const ParticlePolicy& policy, double sigma_smooth,
                     double gamma) {
  const std::size_t n = grid.size();
  const std::size_t m = policy.n_particles;
  if (policy.n_states != n) throw DomainError("particle policy does not match grid size");
  if (!(gamma > 0.0 && gamma <= 1.0)) throw DomainError("gamma must lie in (0, 1]");

  GridMdp mdp;
  mdp.n_states = n;
  mdp.n_particles = m;
  mdp.gamma = gamma;
  mdp.sigma = kernel_sigmas(grid, sigma_smooth);
  mdp.per_particle_kernel.assign(n * m * n, 0.0);
  mdp.per_particle_cost.assign(n * m, 0.0);
  mdp.mean_kernel = DenseMatrix(n, n);
  mdp.mean_cost.assign(n, 0.0);

  const Vector noise(static_cast<std::size_t>(env.noise_dim()), 0.0);
  const int dim = grid.dim();
  Vector action(policy.action_dim);
  Vector log_w(n);

  for (std::size_t s = 0; s < n; ++s) {
    const EnvState state{env.kind(), grid.point(s)};
    for (std::size_t i = 0; i < m; ++i) {
      for (int d = 0; d < policy.action_dim; ++d) action[d] = policy.at(s, i, d);
      mdp.per_particle_cost[s * m + i] = env.cost(state, action);
      const EnvState next = env.step(state, action, noise);

      double max_log = -std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < n; ++j) {
        double e = 0.0;
        for (int d = 0; d < dim; ++d) {
          const double diff =
              coord_distance(grid.point(j)[d], next.coords[d], grid.wraps(d));
          e += diff * diff / (2.0 * mdp.sigma[d] * mdp.sigma[d]);
        }
        log_w[j] = -e;
        max_log = std::max(max_log, log_w[j]);
      }
      double total = 0.0;
      double* row = &mdp.per_particle_kernel[(s * m + i) * n];
      for (std::size_t j = 0; j < n; ++j) {
        row[j] = std::exp(log_w[j] - max_log);
        total += row[j];
      }
      for (std::size_t j = 0; j < n; ++j) row[j] /= total;
    }
    for (std::size_t j = 0; j < n; ++j) {
      double p = 0.0;
      for (std::size_t i = 0; i < m; ++i) p += mdp.kernel(s, i, j);
      mdp.mean_kernel(s, j) = p / static_cast<double>(m);
    }
    double c = 0.0;
    for (std::size_t i = 0; i < m; ++i) c += mdp.per_particle_cost[s * m + i];
    mdp.mean_cost[s] = c / static_cast<double>(m);
  }
  return mdp;
}

ProbabilityVector stationary_distribution(const DenseMatrix& p) {
  const std::size_t n = p.rows();
  DenseMatrix a(n, n);
  Vector b(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < n; ++i) {
      a(j, i) = p(i, j) - (i == j ? 1.0 : 0.0);
    }
  }
  for (std::size_t i = 0; i < n; ++i) a(n - 1, i) = 1.0;
  b[n - 1] = 1.0;

  Vector mu;
  try {
    mu = linear_solve(a, b);
  } catch (const SingularMatrixError&) {
    throw NonUniqueStationaryError(
        "stationary distribution is not unique; the chain appears reducible "
        "(check the Doeblin coefficient of the kernel)");
  }
  double total = 0.0;
  for (double& x : mu) {
    if (x < -1e-9) {
      throw NonUniqueStationaryError(
          "stationary solve produced a significantly negative mass entry");
    }
    x = std::max(x, 0.0);
    total += x;
  }
  for (double& x : mu) x /= total;
  return ProbabilityVector(std::move(mu));
}

ValueSolution solve_values(const GridMdp& mdp) {
  const std::size_t n = mdp.n_states;
  ValueSolution sol;
  sol.mu = stationary_distribution(mdp.mean_kernel);
  sol.avg_cost = dot(sol.mu.weights(), mdp.mean_cost);

  if (mdp.gamma < 1.0) {
    DenseMatrix a(n, n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        a(i, j) = (i == j ? 1.0 : 0.0) - mdp.gamma * mdp.mean_kernel(i, j);
      }
    }
    sol.v = linear_solve(a, mdp.mean_cost);
    return sol;
  }

  // Average-cost case: (I - P)V = C - J*1 is rank deficient, so the row with
  // the largest stationary mass is replaced by the constraint <mu, V> = 0.
  std::size_t pin = 0;
  for (std::size_t i = 1; i < n; ++i) {
    if (sol.mu.weights()[i] > sol.mu.weights()[pin]) pin = i;
  }
  DenseMatrix a(n, n);
  Vector b(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (i == pin) {
      for (std::size_t j = 0; j < n; ++j) a(i, j) = sol.mu.weights()[j];
      b[i] = 0.0;
      continue;
    }
    for (std::size_t j = 0; j < n; ++j) {
      a(i, j) = (i == j ? 1.0 : 0.0) - mdp.mean_kernel(i, j);
    }
    b[i] = mdp.mean_cost[i] - sol.avg_cost;
  }
  sol.v = linear_solve(a, b);
  return sol;
}

Vector q_values(const GridMdp& mdp, const ValueSolution& sol) {
  const std::size_t n = mdp.n_states;
  const std::size_t m = mdp.n_particles;
  const double shift = (mdp.gamma == 1.0) ? sol.avg_cost : 0.0;
  Vector q(n * m);
  for (std::size_t s = 0; s < n; ++s) {
    for (std::size_t i = 0; i < m; ++i) {
      double acc = 0.0;
      for (std::size_t j = 0; j < n; ++j) acc += mdp.kernel(s, i, j) * sol.v[j];
      q[s * m + i] = mdp.per_particle_cost[s * m + i] - shift + mdp.gamma * acc;
    }
  }
  return q;
}

Vector particle_action_gradients(const EnvModel& env, const StateGrid& grid,
                                 const ParticlePolicy& policy, const Vector& sigma,
                                 const Vector& f, double gamma, bool include_cost) {
  const std::size_t n = grid.size();
  const std::size_t m = policy.n_particles;
  const int adim = policy.action_dim;
  const int dim = grid.dim();
  const Vector noise(static_cast<std::size_t>(env.noise_dim()), 0.0);
  Vector grad(n * m * adim, 0.0);
  Vector action(adim);

  for (std::size_t s = 0; s < n; ++s) {
    const EnvState state{env.kind(), grid.point(s)};
    for (std::size_t i = 0; i < m; ++i) {
      for (int d = 0; d < adim; ++d) action[d] = policy.at(s, i, d);
      // The exponent shift keeps exp() in range; it cancels after the weight
      // normalization, so the gradient is unaffected.
      const EnvState phys = env.step(state, action, noise);
      double min_e = std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < n; ++j) {
        double e = 0.0;
        for (int d = 0; d < dim; ++d) {
          const double diff =
              coord_distance(grid.point(j)[d], phys.coords[d], grid.wraps(d));
          e += diff * diff / (2.0 * sigma[d] * sigma[d]);
        }
        min_e = std::min(min_e, e);
      }

      Tape tape;
      std::vector<Var> a_vars(adim);
      for (int d = 0; d < adim; ++d) a_vars[d] = tape.leaf(action[d]);
      std::vector<Var> s_vars(dim);
      for (int d = 0; d < dim; ++d) s_vars[d] = tape.constant(state.coords[d]);
      const std::vector<Var> next = env.step_recorded(tape, s_vars, a_vars, noise);

      Var numer = tape.constant(0.0);
      Var denom = tape.constant(0.0);
      for (std::size_t j = 0; j < n; ++j) {
        Var e = tape.constant(-min_e);
        for (int d = 0; d < dim; ++d) {
          Var diff = tape.sub(grid.point(j)[d], next[d]);
          if (grid.wraps(d)) diff = tape.wrap_angle(diff);
          e = tape.add(e, tape.mul(tape.square(diff),
                                   1.0 / (2.0 * sigma[d] * sigma[d])));
        }
        const Var w = tape.exp(tape.neg(e));
        denom = tape.add(denom, w);
        numer = tape.add(numer, tape.mul(w, f[j]));
      }
      Var obj = tape.div(numer, denom);
      if (include_cost) {
        obj = tape.add(env.cost_recorded(tape, s_vars, a_vars), tape.mul(obj, gamma));
      }
      const Vector g = tape.gradient(obj, a_vars);
      for (int d = 0; d < adim; ++d) grad[(s * m + i) * adim + d] = g[d];
    }
  }
  return grad;
}

Vector particle_gradient(const EnvModel& env, const StateGrid& grid,
                         const ParticlePolicy& policy, const GridMdp& mdp,
                         const ValueSolution& sol) {
  return particle_action_gradients(env, grid, policy, mdp.sigma, sol.v, mdp.gamma,
                                   /*include_cost=*/true);
}

PolicyIterationResult policy_iteration(const EnvModel& env, const StateGrid& grid,
                                       const PolicyIterationConfig& config) {
  PolicyIterationResult result;
  result.policy = random_particle_policy(env, grid.size(), config.n_particles,
                                         config.seed);
  const int adim = result.policy.action_dim;

  for (std::size_t it = 0; it < config.iterations; ++it) {
    result.mdp = build_kernel(env, grid, result.policy, config.sigma_smooth,
                              config.gamma);
    result.solution = solve_values(result.mdp);
    result.avg_cost_history.push_back(result.solution.avg_cost);

    const Vector grad =
        particle_gradient(env, grid, result.policy, result.mdp, result.solution);
    for (std::size_t s = 0; s < grid.size(); ++s) {
      for (std::size_t i = 0; i < config.n_particles; ++i) {
        for (int d = 0; d < adim; ++d) {
          double a = result.policy.at(s, i, d) -
                     config.learning_rate * grad[(s * config.n_particles + i) * adim + d];
          a = std::clamp(a, env.action_lower(d), env.action_upper(d));
          result.policy.at(s, i, d) = a;
        }
      }
    }
  }
  result.mdp = build_kernel(env, grid, result.policy, config.sigma_smooth,
                            config.gamma);
  result.solution = solve_values(result.mdp);
  result.avg_cost_history.push_back(result.solution.avg_cost);
  return result;
}

}  // namespace wgf
