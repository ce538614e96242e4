#include "wgf/env.hpp"

#include <cmath>

namespace wgf {

namespace {

double clip_value(double v, double lo, double hi) {
  return v < lo ? lo : (v > hi ? hi : v);
}

void require_dims(const EnvModel& env, const EnvState& s, const Vector& a,
                  const Vector& noise) {
  if (s.kind != env.kind()) throw UsageError("env: state kind mismatch");
  if (static_cast<int>(s.coords.size()) != env.state_dim())
    throw UsageError("env: state dimension mismatch");
  if (static_cast<int>(a.size()) != env.action_dim())
    throw UsageError("env: action dimension mismatch");
  if (static_cast<int>(noise.size()) != env.noise_dim())
    throw UsageError("env: noise dimension mismatch");
}

}  // namespace

double wrap_angle_value(double theta) {
  const double two_pi = 2.0 * M_PI;
  return theta - two_pi * std::floor((theta + M_PI) / two_pi);
}

EnvModel EnvModel::scalar(ScalarRegulatorParams p) {
  EnvModel env;
  env.kind_ = EnvKind::kScalar;
  env.scalar_ = p;
  return env;
}

EnvModel EnvModel::pendulum(PendulumParams p) {
  EnvModel env;
  env.kind_ = EnvKind::kPendulum;
  env.pend_ = p;
  return env;
}

EnvModel EnvModel::oscillators(OscillatorParams p) {
  EnvModel env;
  env.kind_ = EnvKind::kOscillators;
  env.osc_ = p;
  return env;
}

int EnvModel::state_dim() const {
  switch (kind_) {
    case EnvKind::kScalar: return 1;
    case EnvKind::kPendulum: return 2;
    case EnvKind::kOscillators: return 2 * osc_.n;
  }
  return 0;
}

int EnvModel::action_dim() const {
  switch (kind_) {
    case EnvKind::kScalar: return 1;
    case EnvKind::kPendulum: return 1;
    case EnvKind::kOscillators: return osc_.n;
  }
  return 0;
}

int EnvModel::noise_dim() const { return kind_ == EnvKind::kScalar ? 1 : 0; }

Vector EnvModel::state_lower() const {
  switch (kind_) {
    case EnvKind::kScalar: return {scalar_.s_min};
    case EnvKind::kPendulum: return {-M_PI, -pend_.thetadot_max};
    case EnvKind::kOscillators: {
      Vector lo(2 * osc_.n);
      for (int i = 0; i < osc_.n; ++i) {
        lo[i] = -osc_.x_max;
        lo[osc_.n + i] = -osc_.v_max;
      }
      return lo;
    }
  }
  return {};
}

Vector EnvModel::state_upper() const {
  switch (kind_) {
    case EnvKind::kScalar: return {scalar_.s_max};
    case EnvKind::kPendulum: return {M_PI, pend_.thetadot_max};
    case EnvKind::kOscillators: {
      Vector hi(2 * osc_.n);
      for (int i = 0; i < osc_.n; ++i) {
        hi[i] = osc_.x_max;
        hi[osc_.n + i] = osc_.v_max;
      }
      return hi;
    }
  }
  return {};
}

double EnvModel::action_lower(int) const {
  switch (kind_) {
    case EnvKind::kScalar: return scalar_.a_min;
    case EnvKind::kPendulum: return -pend_.u_max;
    case EnvKind::kOscillators: return -osc_.u_max;
  }
  return 0.0;
}

double EnvModel::action_upper(int) const {
  switch (kind_) {
    case EnvKind::kScalar: return scalar_.a_max;
    case EnvKind::kPendulum: return pend_.u_max;
    case EnvKind::kOscillators: return osc_.u_max;
  }
  return 0.0;
}

std::vector<bool> EnvModel::state_wraps() const {
  std::vector<bool> wraps(state_dim(), false);
  if (kind_ == EnvKind::kPendulum) wraps[0] = true;
  return wraps;
}

Vector EnvModel::clip_action(Vector a) const {
  for (int i = 0; i < static_cast<int>(a.size()); ++i)
    a[i] = clip_value(a[i], action_lower(i), action_upper(i));
  return a;
}

Vector oscillator_accelerations(const OscillatorParams& p, const Vector& x,
                                const Vector& v, const Vector& u, bool smooth_abs) {
  const int n = p.n;
  auto abs_fn = [smooth_abs](double d) {
    return smooth_abs ? std::sqrt(d * d + 1e-8) : std::abs(d);
  };
  auto pos = [&](int i) {  // walls at both ends
    if (i == 0 || i == n + 1) return 0.0;
    return x[i - 1];
  };
  Vector acc(n);
  for (int i = 1; i <= n; ++i) {
    const double spring = p.k * (pos(i + 1) - 2.0 * pos(i) + pos(i - 1));
    const double repel = p.repel_amp * std::exp(-abs_fn(pos(i) - pos(i - 1)) / p.repel_width) -
                         p.repel_amp * std::exp(-abs_fn(pos(i + 1) - pos(i)) / p.repel_width);
    const double duffing = -p.alpha_duff * pos(i) * pos(i) * pos(i);
    const double damp = -p.beta_damp * v[i - 1];
    acc[i - 1] = spring + repel + duffing + damp + u[i - 1];
  }
  return acc;
}

EnvState EnvModel::step(const EnvState& s, const Vector& a, const Vector& noise) const {
  require_dims(*this, s, a, noise);
  EnvState out{kind_, Vector(state_dim())};
  switch (kind_) {
    case EnvKind::kScalar: {
      const double raw = scalar_.alpha * s.coords[0] + scalar_.beta * std::sin(s.coords[0]) +
                         scalar_.delta * a[0] + noise[0];
      out.coords[0] = clip_value(raw, scalar_.s_min, scalar_.s_max);
      break;
    }
    case EnvKind::kPendulum: {
      const double theta = s.coords[0], thetadot = s.coords[1];
      const double accel = -(3.0 * pend_.g / (2.0 * pend_.l)) * std::sin(theta + M_PI) +
                           (3.0 / (pend_.m * pend_.l * pend_.l)) * a[0];
      const double td_next =
          clip_value(thetadot + pend_.dt * accel, -pend_.thetadot_max, pend_.thetadot_max);
      out.coords[1] = td_next;
      out.coords[0] = wrap_angle_value(theta + pend_.dt * td_next);
      break;
    }
    case EnvKind::kOscillators: {
      const int n = osc_.n;
      const Vector x(s.coords.begin(), s.coords.begin() + n);
      const Vector v(s.coords.begin() + n, s.coords.end());
      const Vector acc = oscillator_accelerations(osc_, x, v, a, false);
      for (int i = 0; i < n; ++i) {
        const double v_next = clip_value(v[i] + osc_.dt * acc[i], -osc_.v_max, osc_.v_max);
        out.coords[n + i] = v_next;
        out.coords[i] = clip_value(x[i] + osc_.dt * v_next, -osc_.x_max, osc_.x_max);
      }
      break;
    }
  }
  return out;
}

double EnvModel::cost(const EnvState& s, const Vector& a) const {
  if (static_cast<int>(s.coords.size()) != state_dim() ||
      static_cast<int>(a.size()) != action_dim())
    throw UsageError("env: cost dimension mismatch");
  switch (kind_) {
    // Weights multiply the squared term, not the factor, so this path is
    // bit-identical to the recorded one.
    case EnvKind::kScalar:
      return s.coords[0] * s.coords[0] + (a[0] * a[0]) * scalar_.lambda_a;
    case EnvKind::kPendulum:
      return (s.coords[0] * s.coords[0] +
              (s.coords[1] * s.coords[1]) * pend_.w_thetadot) +
             (a[0] * a[0]) * pend_.w_u;
    case EnvKind::kOscillators: {
      const int n = osc_.n;
      double acc = 0.0;
      for (int i = 0; i < n; ++i)
        acc += (s.coords[i] * s.coords[i] +
                (s.coords[n + i] * s.coords[n + i]) * osc_.w_v) +
               (a[i] * a[i]) * osc_.w_u;
      return acc;
    }
  }
  return 0.0;
}

std::vector<Var> EnvModel::step_recorded(Tape& tape, const std::vector<Var>& s,
                                         const std::vector<Var>& a,
                                         const Vector& noise) const {
  if (static_cast<int>(s.size()) != state_dim() ||
      static_cast<int>(a.size()) != action_dim() ||
      static_cast<int>(noise.size()) != noise_dim())
    throw UsageError("env: recorded step dimension mismatch");
  switch (kind_) {
    case EnvKind::kScalar: {
      Var raw = tape.add(tape.add(tape.mul(s[0], scalar_.alpha),
                                  tape.mul(tape.sin(s[0]), scalar_.beta)),
                         tape.mul(a[0], scalar_.delta));
      raw = tape.add(raw, noise[0]);
      return {tape.clip(raw, scalar_.s_min, scalar_.s_max)};
    }
    case EnvKind::kPendulum: {
      const double g_coef = -(3.0 * pend_.g / (2.0 * pend_.l));
      const double u_coef = 3.0 / (pend_.m * pend_.l * pend_.l);
      Var accel = tape.add(tape.mul(tape.sin(tape.add(s[0], M_PI)), g_coef),
                           tape.mul(a[0], u_coef));
      Var td_next = tape.clip(tape.add(s[1], tape.mul(accel, pend_.dt)),
                              -pend_.thetadot_max, pend_.thetadot_max);
      Var theta_next = tape.wrap_angle(tape.add(s[0], tape.mul(td_next, pend_.dt)));
      return {theta_next, td_next};
    }
    case EnvKind::kOscillators: {
      const int n = osc_.n;
      const Var zero = tape.constant(0.0);
      auto pos = [&](int i) { return (i == 0 || i == n + 1) ? zero : s[i - 1]; };
      std::vector<Var> out(2 * n, Var{});
      for (int i = 1; i <= n; ++i) {
        Var spring = tape.mul(
            tape.add(tape.sub(pos(i + 1), tape.mul(pos(i), 2.0)), pos(i - 1)), osc_.k);
        Var gap_lo = tape.abs_smoothed(tape.sub(pos(i), pos(i - 1)));
        Var gap_hi = tape.abs_smoothed(tape.sub(pos(i + 1), pos(i)));
        Var repel = tape.sub(
            tape.mul(tape.exp(tape.mul(gap_lo, -1.0 / osc_.repel_width)), osc_.repel_amp),
            tape.mul(tape.exp(tape.mul(gap_hi, -1.0 / osc_.repel_width)), osc_.repel_amp));
        Var duffing = tape.mul(tape.mul(tape.square(pos(i)), pos(i)), -osc_.alpha_duff);
        Var damp = tape.mul(s[n + i - 1], -osc_.beta_damp);
        Var accel =
            tape.add(tape.add(tape.add(tape.add(spring, repel), duffing), damp), a[i - 1]);
        Var v_next = tape.clip(tape.add(s[n + i - 1], tape.mul(accel, osc_.dt)),
                               -osc_.v_max, osc_.v_max);
        out[n + i - 1] = v_next;
        out[i - 1] = tape.clip(tape.add(s[i - 1], tape.mul(v_next, osc_.dt)),
                               -osc_.x_max, osc_.x_max);
      }
      return out;
    }
  }
  return {};
}

Var EnvModel::cost_recorded(Tape& tape, const std::vector<Var>& s,
                            const std::vector<Var>& a) const {
  if (static_cast<int>(s.size()) != state_dim() ||
      static_cast<int>(a.size()) != action_dim())
    throw UsageError("env: recorded cost dimension mismatch");
  switch (kind_) {
    case EnvKind::kScalar:
      return tape.add(tape.square(s[0]), tape.mul(tape.square(a[0]), scalar_.lambda_a));
    case EnvKind::kPendulum:
      return tape.add(tape.add(tape.square(s[0]),
                               tape.mul(tape.square(s[1]), pend_.w_thetadot)),
                      tape.mul(tape.square(a[0]), pend_.w_u));
    case EnvKind::kOscillators: {
      const int n = osc_.n;
      Var acc = tape.constant(0.0);
      for (int i = 0; i < n; ++i) {
        Var term = tape.add(tape.add(tape.square(s[i]),
                                     tape.mul(tape.square(s[n + i]), osc_.w_v)),
                            tape.mul(tape.square(a[i]), osc_.w_u));
        acc = tape.add(acc, term);
      }
      return acc;
    }
  }
  return Var{};
}

}  // namespace wgf
