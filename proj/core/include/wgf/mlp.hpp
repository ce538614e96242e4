#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "wgf/matrix.hpp"
#include "wgf/tape.hpp"

namespace wgf {

/// Optional fixed input encoding applied before the first dense layer.
/// kAngleTrig maps a state (theta, omega) to (cos theta, sin theta, omega),
/// which removes the jump the raw angle has where it wraps: two states on
/// either side of the cut are physically adjacent, and the encoding makes the
/// policy continuous across them.
enum class InputFeatures { kRaw, kAngleTrig };

/// Deterministic tanh network a = scale * tanh(W_L(...tanh(W_1 x + b_1)...)).
/// The final tanh bounds outputs inside [-scale_d, scale_d] by construction.
/// Parameters live in one flat vector, per layer weights (row-major, out x in)
/// followed by biases.
class MlpPolicy {
 public:
  MlpPolicy(int input_dim, std::vector<int> hidden, int output_dim,
            Vector output_scale, InputFeatures features = InputFeatures::kRaw);

  /// Dimension of the raw state the caller passes in (before any encoding).
  int input_dim() const { return state_dim_; }
  int output_dim() const { return dims_.back(); }
  const std::vector<int>& dims() const { return dims_; }
  const Vector& output_scale() const { return scale_; }
  InputFeatures features() const { return features_; }
  std::size_t n_params() const { return n_params_; }

  /// Scaled-uniform fan-in weights, zero biases.
  Vector init_params(std::uint64_t seed) const;

  Vector forward(const Vector& theta, const Vector& state) const;

  /// Same network with every intermediate on the tape. theta must be a
  /// contiguous block of tape nodes (leaves created in one loop); the dense
  /// layers then record as single inner-product nodes.
  std::vector<Var> forward_recorded(Tape& tape, const std::vector<Var>& theta,
                                    const std::vector<Var>& state) const;

  /// d action / d theta, rows = action dims.
  DenseMatrix jacobian_params(const Vector& theta, const Vector& state) const;

 private:
  Vector encode(const Vector& state) const;
  std::vector<Var> encode_recorded(Tape& tape, const std::vector<Var>& state) const;

  std::vector<int> dims_;
  Vector scale_;
  InputFeatures features_ = InputFeatures::kRaw;
  int state_dim_ = 0;
  std::size_t n_params_ = 0;
};

/// Monte Carlo pullback metric M = (1/B) sum_s J_s^T J_s with the per-state
/// Jacobians computed once at construction, so one conjugate-gradient solve
/// reuses them across every matvec.
class GramOperator {
 public:
  GramOperator(const MlpPolicy& policy, const Vector& theta,
               const std::vector<Vector>& states);
  Vector matvec(const Vector& v) const;
  std::size_t batch_size() const { return jacobians_.size(); }

 private:
  std::vector<DenseMatrix> jacobians_;
  std::size_t n_params_ = 0;
};

Vector gram_matvec(const MlpPolicy& policy, const Vector& theta,
                   const std::vector<Vector>& states, const Vector& v);

/// Bounded FIFO of visited states; once full, the oldest entry is replaced.
/// Sampling is uniform over current contents.
class StateBuffer {
 public:
  explicit StateBuffer(std::size_t capacity);
  void push(Vector s);
  const Vector& sample(std::mt19937_64& rng) const;
  const std::vector<Vector>& items() const { return items_; }
  std::size_t size() const { return items_.size(); }
  bool empty() const { return items_.empty(); }
  void clear();

 private:
  std::size_t capacity_;
  std::size_t next_ = 0;
  std::vector<Vector> items_;
};

/// Plain-text checkpoint: a shape header line, the output scales, then one
/// parameter per line at 17 significant digits.
void save_policy(const std::string& path, const MlpPolicy& policy,
                 const Vector& theta);
struct LoadedPolicy {
  MlpPolicy policy;
  Vector theta;
};
LoadedPolicy load_policy(const std::string& path);

}  // namespace wgf
