#pragma once

#include <cstdint>
#include <vector>

#include "wgf/errors.hpp"
#include "wgf/matrix.hpp"

namespace wgf {

class Tape;

/// Handle to a recorded scalar value.
struct Var {
  Tape* tape = nullptr;
  std::int32_t idx = -1;
  double value() const;
};

enum class Op : std::uint8_t {
  kConst,
  kLeaf,
  kUnary,    // generic: one parent, precomputed partial
  kBinary,   // generic: two parents, precomputed partials
  kDot,      // sum_j u[a+j] * v[b+j] over two contiguous blocks
  kLinComb,  // sum_j c[j] * x[a+j], constant coefficients
};

/// Append-only record of a computation over scalars. Parent indices always
/// precede a node's own index, so a single reverse sweep computes exact
/// adjoints. Completed tapes are immutable from the reader's point of view:
/// gradient() never mutates, so one tape supports several backward passes.
class Tape {
 public:
  Var constant(double v) { return push(Op::kConst, -1, -1, 0.0, 0.0, v); }
  Var leaf(double v) { return push(Op::kLeaf, -1, -1, 0.0, 0.0, v); }

  Var add(Var x, Var y);
  Var add(Var x, double c);
  Var sub(Var x, Var y);
  Var sub(double c, Var y);
  Var mul(Var x, Var y);
  Var mul(Var x, double c);
  Var div(Var x, Var y);
  Var neg(Var x);
  Var sin(Var x);
  Var cos(Var x);
  Var tanh(Var x);
  Var exp(Var x);
  /// sqrt(x^2 + 1e-8), the differentiable stand-in for |x|.
  Var abs_smoothed(Var x);
  Var square(Var x);
  /// Derivative 1 strictly inside (lo, hi), 0 at and outside the boundary.
  Var clip(Var x, double lo, double hi);
  /// Shift into [-pi, pi); derivative is 1 everywhere.
  Var wrap_angle(Var x);
  /// Inner product of two contiguous index blocks of equal length n.
  Var dot(std::int32_t u_begin, std::int32_t v_begin, std::int32_t n);
  /// Fixed-coefficient linear combination of the contiguous block x.
  Var lincomb(std::int32_t x_begin, const double* coeffs, std::int32_t n);

  double value(std::int32_t idx) const { return values_[idx]; }
  std::size_t size() const { return values_.size(); }
  bool non_finite_flagged() const { return non_finite_; }
  void clear();

  /// Reverse sweep from a scalar output; returns d(output)/d(wrt[i]).
  Vector gradient(Var output, const std::vector<Var>& wrt) const;
  /// Row i is the gradient of outputs[i]; one reverse sweep per row.
  DenseMatrix jacobian(const std::vector<Var>& outputs, const std::vector<Var>& wrt) const;
  /// Accumulates adjoints for all nodes <= output; scratch is resized as
  /// needed and overwritten. Exposed so callers can reuse the buffer.
  void backward(Var output, Vector& adjoint) const;

 private:
  struct Node {
    Op op;
    std::int32_t a = -1, b = -1, n = 0;
    double pa = 0.0, pb = 0.0;
  };

  Var push(Op op, std::int32_t a, std::int32_t b, double pa, double pb, double v,
           std::int32_t n = 0);
  void check(Var v) const;

  std::vector<Node> nodes_;
  Vector values_;
  Vector coeffs_;
  bool non_finite_ = false;
};

inline double Var::value() const { return tape->value(idx); }

}  // namespace wgf
