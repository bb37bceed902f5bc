#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace roomflow::flow {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

struct FlowDims {
  Index d_x = 0;         // target feature size
  Index d_c = 0;         // condition feature size
  Index hidden = 256;
  Index time_embed = 32;

  // x, condition, condition-present flag, time embedding.
  Index input_dim() const { return d_x + d_c + 1 + time_embed; }
  friend bool operator==(const FlowDims&, const FlowDims&) = default;
};

// [sin(ω_k t), cos(ω_k t)] with size/2 frequencies log-spaced from 1 to
// kMaxTimeFrequency rad per unit time. size must be even.
inline constexpr double kMaxTimeFrequency = 200.0;
VectorXd time_embedding(double t, Index size);

// Intermediate activations of a batched forward pass, one column per item.
struct ForwardCache {
  MatrixXd input;
  MatrixXd h1;
  MatrixXd h2;
};

// Velocity field v(x, t, c): input [x; c; 1; embed(t)] -> tanh -> tanh -> linear.
// The unconditional velocity feeds [x; null; 0; embed(t)] with a learned null
// vector; the flag keeps the null input apart from real conditions.
// All parameters live in one flat vector laid out as
// W1, b1, W2, b2, W3, b3, null_condition (matrices column-major).
class FlowModel {
 public:
  FlowModel() = default;
  // Glorot-uniform weights, zero biases, zero null condition.
  FlowModel(const FlowDims& dims, std::uint64_t seed);

  const FlowDims& dims() const { return dims_; }
  Index parameter_count() const { return theta_.size(); }
  const VectorXd& parameters() const { return theta_; }
  // Throws ShapeError when the size does not match.
  void set_parameters(const VectorXd& theta);
  VectorXd& mutable_parameters() { return theta_; }

  Eigen::Map<const MatrixXd> w1() const;
  Eigen::Map<const VectorXd> b1() const;
  Eigen::Map<const MatrixXd> w2() const;
  Eigen::Map<const VectorXd> b2() const;
  Eigen::Map<const MatrixXd> w3() const;
  Eigen::Map<const VectorXd> b3() const;
  Eigen::Map<const VectorXd> null_condition() const;
  Index null_condition_offset() const { return off_null_; }

  // Network input for each column: [x; c; 1; embed(t)] or [x; null; 0; embed(t)].
  // Columns flagged in drop (when given) use the null form.
  MatrixXd assemble_input(const MatrixXd& x, const Eigen::Ref<const VectorXd>& t,
                          const MatrixXd* c, const std::vector<bool>* drop = nullptr) const;

  MatrixXd forward(const MatrixXd& input, ForwardCache* cache = nullptr) const;
  // Accumulates dL/dθ for the network weights into grad (null condition
  // untouched) and returns dL/dinput.
  MatrixXd backward(const ForwardCache& cache, const MatrixXd& d_out, VectorXd& grad) const;

  VectorXd velocity(const VectorXd& x, double t, const VectorXd& c) const;
  VectorXd velocity_unconditional(const VectorXd& x, double t) const;

  bool finite() const { return theta_.allFinite(); }
  // FNV-1a over the parameter bytes and dims.
  std::uint64_t hash() const;

 private:
  void layout();

  FlowDims dims_;
  VectorXd theta_;
  Index off_w1_ = 0, off_b1_ = 0, off_w2_ = 0, off_b2_ = 0;
  Index off_w3_ = 0, off_b3_ = 0, off_null_ = 0;
};

}  // namespace roomflow::flow
