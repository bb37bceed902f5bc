#include "roomflow/flow/model.hpp"

#include <cmath>
#include <cstring>
#include <random>
#include <string>

#include "roomflow/errors.hpp"
#include "roomflow/random.hpp"

namespace roomflow::flow {

VectorXd time_embedding(double t, Index size) {
  if (size < 2 || size % 2 != 0) throw ShapeError("time embedding size must be even and >= 2");
  const Index half = size / 2;
  VectorXd e(size);
  for (Index k = 0; k < half; ++k) {
    const double frac = half > 1 ? static_cast<double>(k) / static_cast<double>(half - 1) : 0.0;
    const double w = std::exp(frac * std::log(kMaxTimeFrequency));
    e[k] = std::sin(w * t);
    e[half + k] = std::cos(w * t);
  }
  return e;
}

void FlowModel::layout() {
  const Index in = dims_.input_dim();
  const Index h = dims_.hidden;
  off_w1_ = 0;
  off_b1_ = off_w1_ + h * in;
  off_w2_ = off_b1_ + h;
  off_b2_ = off_w2_ + h * h;
  off_w3_ = off_b2_ + h;
  off_b3_ = off_w3_ + dims_.d_x * h;
  off_null_ = off_b3_ + dims_.d_x;
}

FlowModel::FlowModel(const FlowDims& dims, std::uint64_t seed) : dims_(dims) {
  if (dims.d_x < 1 || dims.d_c < 1 || dims.hidden < 1) {
    throw ShapeError("flow model dims must be positive");
  }
  time_embedding(0.0, dims.time_embed);  // validates the embedding size
  layout();
  theta_ = VectorXd::Zero(off_null_ + dims_.d_c);
  Rng rng(seed);
  auto glorot = [&](Index offset, Index rows, Index cols) {
    const double a = std::sqrt(6.0 / static_cast<double>(rows + cols));
    std::uniform_real_distribution<double> u(-a, a);
    for (Index i = 0; i < rows * cols; ++i) theta_[offset + i] = u(rng);
  };
  glorot(off_w1_, dims_.hidden, dims_.input_dim());
  glorot(off_w2_, dims_.hidden, dims_.hidden);
  glorot(off_w3_, dims_.d_x, dims_.hidden);
}

void FlowModel::set_parameters(const VectorXd& theta) {
  if (theta.size() != theta_.size()) {
    throw ShapeError("expected " + std::to_string(theta_.size()) + " parameters, got " +
                     std::to_string(theta.size()));
  }
  theta_ = theta;
}

Eigen::Map<const MatrixXd> FlowModel::w1() const {
  return {theta_.data() + off_w1_, dims_.hidden, dims_.input_dim()};
}
Eigen::Map<const VectorXd> FlowModel::b1() const { return {theta_.data() + off_b1_, dims_.hidden}; }
Eigen::Map<const MatrixXd> FlowModel::w2() const {
  return {theta_.data() + off_w2_, dims_.hidden, dims_.hidden};
}
Eigen::Map<const VectorXd> FlowModel::b2() const { return {theta_.data() + off_b2_, dims_.hidden}; }
Eigen::Map<const MatrixXd> FlowModel::w3() const {
  return {theta_.data() + off_w3_, dims_.d_x, dims_.hidden};
}
Eigen::Map<const VectorXd> FlowModel::b3() const { return {theta_.data() + off_b3_, dims_.d_x}; }
Eigen::Map<const VectorXd> FlowModel::null_condition() const {
  return {theta_.data() + off_null_, dims_.d_c};
}

MatrixXd FlowModel::assemble_input(const MatrixXd& x, const Eigen::Ref<const VectorXd>& t,
                                   const MatrixXd* c, const std::vector<bool>* drop) const {
  const Index n = x.cols();
  if (x.rows() != dims_.d_x || t.size() != n ||
      (c && (c->rows() != dims_.d_c || c->cols() != n)) ||
      (drop && drop->size() != static_cast<std::size_t>(n))) {
    throw ShapeError("flow input shapes do not match the model");
  }
  MatrixXd in(dims_.input_dim(), n);
  in.topRows(dims_.d_x) = x;
  for (Index j = 0; j < n; ++j) {
    const bool null = !c || (drop && (*drop)[static_cast<std::size_t>(j)]);
    if (null) {
      in.col(j).segment(dims_.d_x, dims_.d_c) = null_condition();
    } else {
      in.col(j).segment(dims_.d_x, dims_.d_c) = c->col(j);
    }
    in(dims_.d_x + dims_.d_c, j) = null ? 0.0 : 1.0;
    in.col(j).tail(dims_.time_embed) = time_embedding(t[j], dims_.time_embed);
  }
  return in;
}

MatrixXd FlowModel::forward(const MatrixXd& input, ForwardCache* cache) const {
  if (input.rows() != dims_.input_dim()) throw ShapeError("flow input has the wrong size");
  MatrixXd h1 = ((w1() * input).colwise() + b1()).array().tanh().matrix();
  MatrixXd h2 = ((w2() * h1).colwise() + b2()).array().tanh().matrix();
  MatrixXd out = (w3() * h2).colwise() + b3();
  if (cache) {
    cache->input = input;
    cache->h1 = std::move(h1);
    cache->h2 = std::move(h2);
  }
  return out;
}

MatrixXd FlowModel::backward(const ForwardCache& cache, const MatrixXd& d_out,
                             VectorXd& grad) const {
  if (grad.size() != theta_.size()) grad = VectorXd::Zero(theta_.size());
  const Index in = dims_.input_dim();
  const Index h = dims_.hidden;
  Eigen::Map<MatrixXd> g_w3(grad.data() + off_w3_, dims_.d_x, h);
  Eigen::Map<VectorXd> g_b3(grad.data() + off_b3_, dims_.d_x);
  Eigen::Map<MatrixXd> g_w2(grad.data() + off_w2_, h, h);
  Eigen::Map<VectorXd> g_b2(grad.data() + off_b2_, h);
  Eigen::Map<MatrixXd> g_w1(grad.data() + off_w1_, h, in);
  Eigen::Map<VectorXd> g_b1(grad.data() + off_b1_, h);

  g_w3.noalias() += d_out * cache.h2.transpose();
  g_b3 += d_out.rowwise().sum();
  const MatrixXd d_a2 =
      ((w3().transpose() * d_out).array() * (1.0 - cache.h2.array().square())).matrix();
  g_w2.noalias() += d_a2 * cache.h1.transpose();
  g_b2 += d_a2.rowwise().sum();
  const MatrixXd d_a1 =
      ((w2().transpose() * d_a2).array() * (1.0 - cache.h1.array().square())).matrix();
  g_w1.noalias() += d_a1 * cache.input.transpose();
  g_b1 += d_a1.rowwise().sum();
  return w1().transpose() * d_a1;
}

VectorXd FlowModel::velocity(const VectorXd& x, double t, const VectorXd& c) const {
  const MatrixXd cm = c;
  return forward(assemble_input(x, VectorXd::Constant(1, t), &cm)).col(0);
}

VectorXd FlowModel::velocity_unconditional(const VectorXd& x, double t) const {
  return forward(assemble_input(x, VectorXd::Constant(1, t), nullptr)).col(0);
}

std::uint64_t FlowModel::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ull;
  auto mix = [&](const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= p[i];
      h *= 0x100000001b3ull;
    }
  };
  const Index d[4] = {dims_.d_x, dims_.d_c, dims_.hidden, dims_.time_embed};
  mix(d, sizeof(d));
  mix(theta_.data(), sizeof(double) * static_cast<std::size_t>(theta_.size()));
  return h;
}

}  // namespace roomflow::flow
