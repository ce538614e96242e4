#include "wgf/matrix.hpp"

#include <cmath>
#include <cstdlib>

namespace wgf {

DenseMatrix DenseMatrix::identity(std::size_t n) {
  DenseMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

DenseMatrix DenseMatrix::transpose() const {
  DenseMatrix t(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
  return t;
}

DenseMatrix DenseMatrix::matmul(const DenseMatrix& other) const {
  if (cols_ != other.rows_) throw UsageError("matmul: inner dimensions differ");
  DenseMatrix out(rows_, other.cols_);
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t k = 0; k < cols_; ++k) {
      const double v = (*this)(r, k);
      if (v == 0.0) continue;
      for (std::size_t c = 0; c < other.cols_; ++c) out(r, c) += v * other(k, c);
    }
  }
  return out;
}

Vector DenseMatrix::apply(const Vector& x) const {
  if (x.size() != cols_) throw UsageError("apply: dimension mismatch");
  Vector y(rows_, 0.0);
  for (std::size_t r = 0; r < rows_; ++r) {
    double acc = 0.0;
    for (std::size_t c = 0; c < cols_; ++c) acc += (*this)(r, c) * x[c];
    y[r] = acc;
  }
  return y;
}

Vector DenseMatrix::apply_transpose(const Vector& x) const {
  if (x.size() != rows_) throw UsageError("apply_transpose: dimension mismatch");
  Vector y(cols_, 0.0);
  for (std::size_t r = 0; r < rows_; ++r) {
    const double v = x[r];
    if (v == 0.0) continue;
    for (std::size_t c = 0; c < cols_; ++c) y[c] += (*this)(r, c) * v;
  }
  return y;
}

ProbabilityVector::ProbabilityVector(Vector weights) : weights_(std::move(weights)) {
  double sum = 0.0;
  for (double w : weights_) {
    if (w < 0.0) throw DomainError("ProbabilityVector: negative weight");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-12)
    throw DomainError("ProbabilityVector: weights sum to " + std::to_string(sum));
}

double dot(const Vector& a, const Vector& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

double norm2(const Vector& a) { return std::sqrt(dot(a, a)); }

double norm_inf(const Vector& a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

Vector linear_solve(const DenseMatrix& a, const Vector& b) {
  if (a.rows() != a.cols()) throw UsageError("linear_solve: matrix not square");
  if (b.size() != a.rows()) throw UsageError("linear_solve: rhs length mismatch");
  const std::size_t n = a.rows();

  DenseMatrix lu = a;
  Vector scale(n, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    double m = 0.0;
    for (std::size_t c = 0; c < n; ++c) m = std::max(m, std::abs(lu(r, c)));
    scale[r] = m > 0.0 ? m : 1.0;
  }

  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;

  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    double best = std::abs(lu(perm[k], k)) / scale[perm[k]];
    for (std::size_t r = k + 1; r < n; ++r) {
      const double cand = std::abs(lu(perm[r], k)) / scale[perm[r]];
      if (cand > best) { best = cand; piv = r; }
    }
    if (best < 1e-12)
      throw SingularMatrixError("linear_solve: pivot below 1e-12 at column " +
                                std::to_string(k));
    std::swap(perm[k], perm[piv]);
    const std::size_t pk = perm[k];
    for (std::size_t r = k + 1; r < n; ++r) {
      const std::size_t pr = perm[r];
      const double f = lu(pr, k) / lu(pk, k);
      lu(pr, k) = f;
      if (f == 0.0) continue;
      for (std::size_t c = k + 1; c < n; ++c) lu(pr, c) -= f * lu(pk, c);
    }
  }

  Vector x(n, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    double acc = b[perm[r]];
    for (std::size_t c = 0; c < r; ++c) acc -= lu(perm[r], c) * x[c];
    x[r] = acc;
  }
  for (std::size_t ri = n; ri-- > 0;) {
    double acc = x[ri];
    for (std::size_t c = ri + 1; c < n; ++c) acc -= lu(perm[ri], c) * x[c];
    x[ri] = acc / lu(perm[ri], ri);
  }
  return x;
}

CgResult conjugate_gradient(const LinearOperator& matvec, const Vector& b,
                            double tol, std::size_t max_iter, double damping) {
  if (damping < 0.0) throw UsageError("conjugate_gradient: negative damping");
  CgResult result;
  const std::size_t n = b.size();
  result.x.assign(n, 0.0);
  const double bnorm = norm2(b);
  if (bnorm == 0.0) {
    result.converged = true;
    return result;
  }

  auto damped = [&](const Vector& v) {
    Vector out = matvec(v);
    if (damping != 0.0)
      for (std::size_t i = 0; i < n; ++i) out[i] += damping * v[i];
    return out;
  };

  Vector r = b;  // residual for x = 0
  Vector p = r;
  double rs = dot(r, r);
  for (std::size_t it = 0; it < max_iter; ++it) {
    result.residual_norm = std::sqrt(rs);
    if (result.residual_norm <= tol * bnorm) {
      result.converged = true;
      return result;
    }
    Vector ap = damped(p);
    const double pap = dot(p, ap);
    if (pap <= 0.0) break;  // operator not PD along p; stop with best iterate
    const double alpha = rs / pap;
    for (std::size_t i = 0; i < n; ++i) {
      result.x[i] += alpha * p[i];
      r[i] -= alpha * ap[i];
    }
    const double rs_next = dot(r, r);
    const double beta = rs_next / rs;
    for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + beta * p[i];
    rs = rs_next;
    result.iterations = it + 1;
  }
  result.residual_norm = std::sqrt(rs);
  result.converged = result.residual_norm <= tol * bnorm;
  return result;
}

DenseMatrix ridge_solve(const DenseMatrix& phi, const DenseMatrix& y, double lambda) {
  if (phi.rows() != y.rows()) throw UsageError("ridge_solve: row count mismatch");
  if (lambda < 0.0) throw UsageError("ridge_solve: negative lambda");
  const std::size_t d = phi.cols();

  DenseMatrix gram(d, d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) {
      double acc = 0.0;
      for (std::size_t r = 0; r < phi.rows(); ++r) acc += phi(r, i) * phi(r, j);
      gram(i, j) = acc;
    }
  for (std::size_t i = 0; i < d; ++i) gram(i, i) += lambda;

  DenseMatrix w(d, y.cols());
  Vector rhs(d);
  for (std::size_t c = 0; c < y.cols(); ++c) {
    for (std::size_t i = 0; i < d; ++i) {
      double acc = 0.0;
      for (std::size_t r = 0; r < phi.rows(); ++r) acc += phi(r, i) * y(r, c);
      rhs[i] = acc;
    }
    const Vector col = linear_solve(gram, rhs);
    for (std::size_t i = 0; i < d; ++i) w(i, c) = col[i];
  }
  return w;
}

}  // namespace wgf
