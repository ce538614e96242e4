#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "wgf/errors.hpp"

namespace wgf {

using Vector = std::vector<double>;

/// Dense row-major matrix. Carries P^pi (transition matrices), world-model
/// feature blocks and ridge targets through the solvers.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static DenseMatrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  const Vector& data() const { return data_; }
  Vector& data() { return data_; }

  DenseMatrix transpose() const;
  DenseMatrix matmul(const DenseMatrix& other) const;
  Vector apply(const Vector& x) const;           // this * x
  Vector apply_transpose(const Vector& x) const; // this^T * x

 private:
  std::size_t rows_ = 0, cols_ = 0;
  Vector data_;
};

/// Nonnegative weights summing to one. Stationary distributions and kernel
/// rows live here.
class ProbabilityVector {
 public:
  ProbabilityVector() = default;
  /// Validates nonnegativity and normalization (1e-12 tolerance on the sum).
  explicit ProbabilityVector(Vector weights);

  const Vector& weights() const { return weights_; }
  std::size_t size() const { return weights_.size(); }
  double operator[](std::size_t i) const { return weights_[i]; }

 private:
  Vector weights_;
};

struct CgResult {
  Vector x;
  std::size_t iterations = 0;
  bool converged = false;
  double residual_norm = 0.0;
};

using LinearOperator = std::function<Vector(const Vector&)>;

/// Direct solve of a*x = b by LU with partial pivoting and row equilibration.
/// Throws SingularMatrixError when a scaled pivot falls below 1e-12.
Vector linear_solve(const DenseMatrix& a, const Vector& b);

/// Matrix-free CG for (A + damping*I) x = b with A symmetric PSD.
/// Non-convergence is reported in the result, never thrown.
CgResult conjugate_gradient(const LinearOperator& matvec, const Vector& b,
                            double tol, std::size_t max_iter, double damping);

/// Ridge regression W = (Phi^T Phi + lambda I)^-1 Phi^T y, one column of W
/// per target column of y.
DenseMatrix ridge_solve(const DenseMatrix& phi, const DenseMatrix& y, double lambda);

double dot(const Vector& a, const Vector& b);
double norm2(const Vector& a);
double norm_inf(const Vector& a);

}  // namespace wgf
