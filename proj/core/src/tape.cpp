#include "wgf/tape.hpp"

#include <cmath>

namespace wgf {

void Tape::check(Var v) const {
  if (v.tape != this) throw UsageError("tape: var belongs to a different tape");
  if (v.idx < 0 || static_cast<std::size_t>(v.idx) >= values_.size())
    throw UsageError("tape: var index out of range");
}

Var Tape::push(Op op, std::int32_t a, std::int32_t b, double pa, double pb,
               double v, std::int32_t n) {
  Node node;
  node.op = op;
  node.a = a;
  node.b = b;
  node.n = n;
  node.pa = pa;
  node.pb = pb;
  nodes_.push_back(node);
  values_.push_back(v);
  if (!std::isfinite(v)) non_finite_ = true;
  return Var{this, static_cast<std::int32_t>(values_.size() - 1)};
}

Var Tape::add(Var x, Var y) {
  check(x); check(y);
  return push(Op::kBinary, x.idx, y.idx, 1.0, 1.0, values_[x.idx] + values_[y.idx]);
}

Var Tape::add(Var x, double c) {
  check(x);
  return push(Op::kUnary, x.idx, -1, 1.0, 0.0, values_[x.idx] + c);
}

Var Tape::sub(Var x, Var y) {
  check(x); check(y);
  return push(Op::kBinary, x.idx, y.idx, 1.0, -1.0, values_[x.idx] - values_[y.idx]);
}

Var Tape::sub(double c, Var y) {
  check(y);
  return push(Op::kUnary, y.idx, -1, -1.0, 0.0, c - values_[y.idx]);
}

Var Tape::mul(Var x, Var y) {
  check(x); check(y);
  return push(Op::kBinary, x.idx, y.idx, values_[y.idx], values_[x.idx],
              values_[x.idx] * values_[y.idx]);
}

Var Tape::mul(Var x, double c) {
  check(x);
  return push(Op::kUnary, x.idx, -1, c, 0.0, values_[x.idx] * c);
}

Var Tape::div(Var x, Var y) {
  check(x); check(y);
  const double yv = values_[y.idx];
  if (std::abs(yv) < 1e-30) non_finite_ = true;
  const double inv = 1.0 / yv;
  return push(Op::kBinary, x.idx, y.idx, inv, -values_[x.idx] * inv * inv,
              values_[x.idx] * inv);
}

Var Tape::neg(Var x) {
  check(x);
  return push(Op::kUnary, x.idx, -1, -1.0, 0.0, -values_[x.idx]);
}

Var Tape::sin(Var x) {
  check(x);
  return push(Op::kUnary, x.idx, -1, std::cos(values_[x.idx]), 0.0,
              std::sin(values_[x.idx]));
}

Var Tape::cos(Var x) {
  check(x);
  return push(Op::kUnary, x.idx, -1, -std::sin(values_[x.idx]), 0.0,
              std::cos(values_[x.idx]));
}

Var Tape::tanh(Var x) {
  check(x);
  const double t = std::tanh(values_[x.idx]);
  return push(Op::kUnary, x.idx, -1, 1.0 - t * t, 0.0, t);
}

Var Tape::exp(Var x) {
  check(x);
  const double e = std::exp(values_[x.idx]);
  return push(Op::kUnary, x.idx, -1, e, 0.0, e);
}

Var Tape::abs_smoothed(Var x) {
  check(x);
  const double v = values_[x.idx];
  const double s = std::sqrt(v * v + 1e-8);
  return push(Op::kUnary, x.idx, -1, v / s, 0.0, s);
}

Var Tape::square(Var x) {
  check(x);
  const double v = values_[x.idx];
  return push(Op::kUnary, x.idx, -1, 2.0 * v, 0.0, v * v);
}

Var Tape::clip(Var x, double lo, double hi) {
  check(x);
  const double v = values_[x.idx];
  const bool interior = v > lo && v < hi;
  const double out = v < lo ? lo : (v > hi ? hi : v);
  return push(Op::kUnary, x.idx, -1, interior ? 1.0 : 0.0, 0.0, out);
}

Var Tape::wrap_angle(Var x) {
  check(x);
  const double v = values_[x.idx];
  const double two_pi = 2.0 * M_PI;
  const double wrapped = v - two_pi * std::floor((v + M_PI) / two_pi);
  return push(Op::kUnary, x.idx, -1, 1.0, 0.0, wrapped);
}

Var Tape::dot(std::int32_t u_begin, std::int32_t v_begin, std::int32_t n) {
  if (n < 0 || u_begin < 0 || v_begin < 0 ||
      static_cast<std::size_t>(u_begin + n) > values_.size() ||
      static_cast<std::size_t>(v_begin + n) > values_.size())
    throw UsageError("tape: dot block out of range");
  double acc = 0.0;
  for (std::int32_t j = 0; j < n; ++j)
    acc += values_[u_begin + j] * values_[v_begin + j];
  return push(Op::kDot, u_begin, v_begin, 0.0, 0.0, acc, n);
}

Var Tape::lincomb(std::int32_t x_begin, const double* coeffs, std::int32_t n) {
  if (n < 0 || x_begin < 0 || static_cast<std::size_t>(x_begin + n) > values_.size())
    throw UsageError("tape: lincomb block out of range");
  const std::int32_t coff = static_cast<std::int32_t>(coeffs_.size());
  double acc = 0.0;
  for (std::int32_t j = 0; j < n; ++j) {
    coeffs_.push_back(coeffs[j]);
    acc += coeffs[j] * values_[x_begin + j];
  }
  return push(Op::kLinComb, x_begin, coff, 0.0, 0.0, acc, n);
}

void Tape::clear() {
  nodes_.clear();
  values_.clear();
  coeffs_.clear();
  non_finite_ = false;
}

void Tape::backward(Var output, Vector& adjoint) const {
  check(output);
  adjoint.assign(values_.size(), 0.0);
  adjoint[output.idx] = 1.0;
  for (std::int32_t i = output.idx; i >= 0; --i) {
    const double bar = adjoint[i];
    if (bar == 0.0) continue;
    const Node& node = nodes_[i];
    switch (node.op) {
      case Op::kConst:
      case Op::kLeaf:
        break;
      case Op::kUnary:
        adjoint[node.a] += node.pa * bar;
        break;
      case Op::kBinary:
        adjoint[node.a] += node.pa * bar;
        adjoint[node.b] += node.pb * bar;
        break;
      case Op::kDot:
        for (std::int32_t j = 0; j < node.n; ++j) {
          adjoint[node.a + j] += values_[node.b + j] * bar;
          adjoint[node.b + j] += values_[node.a + j] * bar;
        }
        break;
      case Op::kLinComb:
        for (std::int32_t j = 0; j < node.n; ++j)
          adjoint[node.a + j] += coeffs_[node.b + j] * bar;
        break;
    }
  }
}

Vector Tape::gradient(Var output, const std::vector<Var>& wrt) const {
  Vector adjoint;
  backward(output, adjoint);
  Vector grad(wrt.size());
  for (std::size_t i = 0; i < wrt.size(); ++i) {
    check(wrt[i]);
    grad[i] = wrt[i].idx <= output.idx ? adjoint[wrt[i].idx] : 0.0;
  }
  return grad;
}

DenseMatrix Tape::jacobian(const std::vector<Var>& outputs,
                           const std::vector<Var>& wrt) const {
  DenseMatrix jac(outputs.size(), wrt.size());
  Vector adjoint;
  for (std::size_t r = 0; r < outputs.size(); ++r) {
    backward(outputs[r], adjoint);
    for (std::size_t c = 0; c < wrt.size(); ++c) {
      check(wrt[c]);
      jac(r, c) = wrt[c].idx <= outputs[r].idx ? adjoint[wrt[c].idx] : 0.0;
    }
  }
  return jac;
}

}  // namespace wgf
