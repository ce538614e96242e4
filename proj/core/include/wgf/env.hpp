#pragma once

#include <vector>

#include "wgf/matrix.hpp"
#include "wgf/tape.hpp"

namespace wgf {

struct ScalarRegulatorParams {
  double alpha = 0.5;
  double beta = 0.1;
  double delta = 0.2;
  double sigma = 0.2;
  double lambda_a = 0.1;
  double s_min = -3.0, s_max = 3.0;
  double a_min = -5.0, a_max = 5.0;
};

struct PendulumParams {
  double g = 10.0;
  double m = 1.0;
  double l = 1.0;
  double dt = 0.05;
  double thetadot_max = 8.0;
  double u_max = 2.0;
  double w_thetadot = 0.1;
  double w_u = 0.01;
};

struct OscillatorParams {
  int n = 5;
  double k = 1.0;
  double alpha_duff = 1.0;
  double beta_damp = 0.1;
  double repel_amp = 10.0;
  double repel_width = 1.0;
  double dt = 0.05;
  double x_max = 5.0, v_max = 5.0, u_max = 5.0;
  double w_v = 0.1, w_u = 0.001;
};

enum class EnvKind { kScalar, kPendulum, kOscillators };

struct EnvState {
  EnvKind kind;
  Vector coords;  // scalar: (s); pendulum: (theta, thetadot); osc: (x..., v...)
};

/// Immutable parameter pack for one benchmark system. step/cost are pure.
class EnvModel {
 public:
  static EnvModel scalar(ScalarRegulatorParams p = {});
  static EnvModel pendulum(PendulumParams p = {});
  static EnvModel oscillators(OscillatorParams p = {});

  EnvKind kind() const { return kind_; }
  int state_dim() const;
  int action_dim() const;
  int noise_dim() const;  // scalar regulator only

  const ScalarRegulatorParams& scalar_params() const { return scalar_; }
  const PendulumParams& pendulum_params() const { return pend_; }
  const OscillatorParams& oscillator_params() const { return osc_; }

  Vector state_lower() const;
  Vector state_upper() const;
  double action_lower(int dim) const;
  double action_upper(int dim) const;
  /// True for dimensions that identify +pi with -pi (pendulum angle).
  std::vector<bool> state_wraps() const;

  EnvState step(const EnvState& s, const Vector& a, const Vector& noise) const;
  double cost(const EnvState& s, const Vector& a) const;

  /// Same update as step with every intermediate on the tape; the oscillator
  /// repulsion uses abs_smoothed instead of |.|.
  std::vector<Var> step_recorded(Tape& tape, const std::vector<Var>& s,
                                 const std::vector<Var>& a, const Vector& noise) const;
  Var cost_recorded(Tape& tape, const std::vector<Var>& s,
                    const std::vector<Var>& a) const;

  Vector clip_action(Vector a) const;

 private:
  EnvKind kind_ = EnvKind::kScalar;
  ScalarRegulatorParams scalar_;
  PendulumParams pend_;
  OscillatorParams osc_;
};

/// Accelerations of the oscillator chain; exposed for force-balance checks.
/// smooth_abs selects the differentiable |.| used on recorded paths.
Vector oscillator_accelerations(const OscillatorParams& p, const Vector& x,
                                const Vector& v, const Vector& u, bool smooth_abs);

double wrap_angle_value(double theta);

}  // namespace wgf
