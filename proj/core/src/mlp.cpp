#include "wgf/mlp.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "wgf/errors.hpp"
#include "wgf/rng.hpp"

namespace wgf {

MlpPolicy::MlpPolicy(int input_dim, std::vector<int> hidden, int output_dim,
                     Vector output_scale, InputFeatures features)
    : scale_(std::move(output_scale)), features_(features), state_dim_(input_dim) {
  if (input_dim < 1 || output_dim < 1) {
    throw DomainError("network input and output dimensions must be positive");
  }
  if (static_cast<int>(scale_.size()) != output_dim) {
    throw DomainError("output scale must list one bound per action dimension");
  }
  if (features_ == InputFeatures::kAngleTrig && input_dim != 2) {
    throw DomainError("angle-trig encoding expects a state (angle, rate)");
  }
  dims_.push_back(features_ == InputFeatures::kAngleTrig ? 3 : input_dim);
  for (int h : hidden) {
    if (h < 1) throw DomainError("hidden widths must be positive");
    dims_.push_back(h);
  }
  dims_.push_back(output_dim);
  for (std::size_t l = 0; l + 1 < dims_.size(); ++l) {
    n_params_ += static_cast<std::size_t>(dims_[l + 1]) * dims_[l] + dims_[l + 1];
  }
}

Vector MlpPolicy::init_params(std::uint64_t seed) const {
  Vector theta(n_params_, 0.0);
  auto rng = make_rng(seed);
  std::size_t off = 0;
  for (std::size_t l = 0; l + 1 < dims_.size(); ++l) {
    const int fan_in = dims_[l];
    const int fan_out = dims_[l + 1];
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (int i = 0; i < fan_out * fan_in; ++i) theta[off + i] = dist(rng);
    off += static_cast<std::size_t>(fan_out) * fan_in + fan_out;  // biases stay 0
  }
  return theta;
}

Vector MlpPolicy::encode(const Vector& state) const {
  if (static_cast<int>(state.size()) != state_dim_) {
    throw DomainError("state dimension mismatch");
  }
  if (features_ == InputFeatures::kAngleTrig) {
    return {std::cos(state[0]), std::sin(state[0]), state[1]};
  }
  return state;
}

std::vector<Var> MlpPolicy::encode_recorded(Tape& tape,
                                            const std::vector<Var>& state) const {
  if (static_cast<int>(state.size()) != state_dim_) {
    throw DomainError("state dimension mismatch");
  }
  // Emit the encoded input as consecutive nodes so dense layers can use
  // inner-product nodes over a contiguous block.
  std::vector<Var> x;
  if (features_ == InputFeatures::kAngleTrig) {
    x = {tape.cos(state[0]), tape.sin(state[0]), tape.mul(state[1], 1.0)};
  } else {
    x.resize(state.size());
    for (std::size_t d = 0; d < state.size(); ++d) x[d] = tape.mul(state[d], 1.0);
  }
  return x;
}

Vector MlpPolicy::forward(const Vector& theta, const Vector& state) const {
  if (theta.size() != n_params_) throw DomainError("parameter vector length mismatch");
  Vector x = encode(state);
  std::size_t off = 0;
  for (std::size_t l = 0; l + 1 < dims_.size(); ++l) {
    const int n_in = dims_[l];
    const int n_out = dims_[l + 1];
    Vector y(n_out);
    for (int u = 0; u < n_out; ++u) {
      double z = theta[off + static_cast<std::size_t>(n_out) * n_in + u];  // bias
      const double* w = &theta[off + static_cast<std::size_t>(u) * n_in];
      for (int j = 0; j < n_in; ++j) z += w[j] * x[j];
      y[u] = std::tanh(z);
    }
    off += static_cast<std::size_t>(n_out) * n_in + n_out;
    x = std::move(y);
  }
  for (std::size_t d = 0; d < x.size(); ++d) x[d] *= scale_[d];
  return x;
}

std::vector<Var> MlpPolicy::forward_recorded(Tape& tape, const std::vector<Var>& theta,
                                             const std::vector<Var>& state) const {
  if (theta.size() != n_params_) throw DomainError("parameter vector length mismatch");
  for (std::size_t i = 1; i < theta.size(); ++i) {
    if (theta[i].idx != theta[i - 1].idx + 1) {
      throw DomainError("recorded parameters must occupy a contiguous tape block");
    }
  }
  std::vector<Var> x = encode_recorded(tape, state);

  std::size_t off = 0;
  for (std::size_t l = 0; l + 1 < dims_.size(); ++l) {
    const int n_in = dims_[l];
    const int n_out = dims_[l + 1];
    std::vector<Var> z(n_out);
    for (int u = 0; u < n_out; ++u) {
      z[u] = tape.dot(theta[off + static_cast<std::size_t>(u) * n_in].idx, x[0].idx,
                      n_in);
    }
    std::vector<Var> zb(n_out);
    for (int u = 0; u < n_out; ++u) {
      zb[u] = tape.add(z[u], theta[off + static_cast<std::size_t>(n_out) * n_in + u]);
    }
    std::vector<Var> h(n_out);
    for (int u = 0; u < n_out; ++u) h[u] = tape.tanh(zb[u]);
    off += static_cast<std::size_t>(n_out) * n_in + n_out;
    x = std::move(h);
  }
  for (std::size_t d = 0; d < x.size(); ++d) x[d] = tape.mul(x[d], scale_[d]);
  return x;
}

DenseMatrix MlpPolicy::jacobian_params(const Vector& theta, const Vector& state) const {
  Tape tape;
  std::vector<Var> theta_vars(theta.size());
  for (std::size_t i = 0; i < theta.size(); ++i) theta_vars[i] = tape.leaf(theta[i]);
  std::vector<Var> state_vars(state.size());
  for (std::size_t d = 0; d < state.size(); ++d) state_vars[d] = tape.constant(state[d]);
  const std::vector<Var> out = forward_recorded(tape, theta_vars, state_vars);
  return tape.jacobian(out, theta_vars);
}

GramOperator::GramOperator(const MlpPolicy& policy, const Vector& theta,
                           const std::vector<Vector>& states)
    : n_params_(policy.n_params()) {
  if (states.empty()) throw DomainError("metric batch must be non-empty");
  jacobians_.reserve(states.size());
  for (const Vector& s : states) {
    jacobians_.push_back(policy.jacobian_params(theta, s));
  }
}

Vector GramOperator::matvec(const Vector& v) const {
  if (v.size() != n_params_) throw DomainError("metric matvec length mismatch");
  Vector out(n_params_, 0.0);
  for (const DenseMatrix& j : jacobians_) {
    const Vector jv = j.apply(v);
    const Vector jt_jv = j.apply_transpose(jv);
    for (std::size_t i = 0; i < n_params_; ++i) out[i] += jt_jv[i];
  }
  const double inv_b = 1.0 / static_cast<double>(jacobians_.size());
  for (double& x : out) x *= inv_b;
  return out;
}

Vector gram_matvec(const MlpPolicy& policy, const Vector& theta,
                   const std::vector<Vector>& states, const Vector& v) {
  return GramOperator(policy, theta, states).matvec(v);
}

StateBuffer::StateBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity_ == 0) throw DomainError("buffer capacity must be positive");
}

void StateBuffer::push(Vector s) {
  if (items_.size() < capacity_) {
    items_.push_back(std::move(s));
  } else {
    items_[next_] = std::move(s);
  }
  next_ = (next_ + 1) % capacity_;
}

const Vector& StateBuffer::sample(std::mt19937_64& rng) const {
  if (items_.empty()) throw DomainError("cannot sample from an empty buffer");
  std::uniform_int_distribution<std::size_t> dist(0, items_.size() - 1);
  return items_[dist(rng)];
}

void StateBuffer::clear() {
  items_.clear();
  next_ = 0;
}

void save_policy(const std::string& path, const MlpPolicy& policy,
                 const Vector& theta) {
  std::ofstream out(path);
  if (!out) throw DomainError("cannot open checkpoint file for writing: " + path);
  out << (policy.features() == InputFeatures::kAngleTrig ? "mlp-trig" : "mlp");
  for (int d : policy.dims()) out << ' ' << d;
  out << '\n';
  char buf[64];
  out << "scale";
  for (double s : policy.output_scale()) {
    std::snprintf(buf, sizeof buf, " %.17g", s);
    out << buf;
  }
  out << '\n';
  for (double p : theta) {
    std::snprintf(buf, sizeof buf, "%.17g\n", p);
    out << buf;
  }
}

LoadedPolicy load_policy(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot open checkpoint file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw DomainError("checkpoint missing shape header");
  std::istringstream head(line);
  std::string tag;
  head >> tag;
  if (tag != "mlp" && tag != "mlp-trig") {
    throw DomainError("checkpoint has unknown format tag: " + tag);
  }
  const InputFeatures features =
      tag == "mlp-trig" ? InputFeatures::kAngleTrig : InputFeatures::kRaw;
  std::vector<int> dims;
  for (int d; head >> d;) dims.push_back(d);
  if (dims.size() < 2) throw DomainError("checkpoint shape header is too short");

  if (!std::getline(in, line)) throw DomainError("checkpoint missing scale line");
  std::istringstream scales(line);
  scales >> tag;
  if (tag != "scale") throw DomainError("checkpoint missing scale line");
  Vector scale;
  for (double s; scales >> s;) scale.push_back(s);

  std::vector<int> hidden(dims.begin() + 1, dims.end() - 1);
  const int raw_dim = features == InputFeatures::kAngleTrig ? 2 : dims.front();
  LoadedPolicy result{MlpPolicy(raw_dim, hidden, dims.back(), scale, features), {}};
  result.theta.reserve(result.policy.n_params());
  for (double p; in >> p;) result.theta.push_back(p);
  if (result.theta.size() != result.policy.n_params()) {
    throw DomainError("checkpoint parameter count does not match its shape header");
  }
  return result;
}

}  // namespace wgf
