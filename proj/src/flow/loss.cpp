#include "roomflow/flow/loss.hpp"

#include "roomflow/errors.hpp"

namespace roomflow::flow {

namespace {

void check_sigma(double sigma_min) {
  if (!(sigma_min >= 0.0 && sigma_min <= 0.1)) {
    throw ConfigError("sigma_min must lie in [0, 0.1]");
  }
}

}  // namespace

PathPoint path_point(const VectorXd& x0, const VectorXd& x1, double t, double sigma_min) {
  if (x0.size() != x1.size()) throw ShapeError("x0 and x1 differ in size");
  check_sigma(sigma_min);
  return {(1.0 - t) * (1.0 + sigma_min) * x0 + t * x1, x1 - (1.0 + sigma_min) * x0};
}

LossResult flow_loss(const FlowModel& model, const VectorXd& x1, const VectorXd& c,
                     const VectorXd& x0, double t, double sigma_min, bool drop_condition) {
  return flow_loss_batch(model, x1, c, x0, VectorXd::Constant(1, t), sigma_min,
                         {drop_condition});
}

LossResult flow_loss_batch(const FlowModel& model, const MatrixXd& x1, const MatrixXd& c,
                           const MatrixXd& x0, const VectorXd& t, double sigma_min,
                           const std::vector<bool>& drop_condition) {
  const FlowDims& d = model.dims();
  const Index n = x1.cols();
  if (n < 1 || x1.rows() != d.d_x || x0.rows() != d.d_x || x0.cols() != n ||
      c.rows() != d.d_c || c.cols() != n || t.size() != n) {
    throw ShapeError("flow loss inputs do not match model dims " + std::to_string(d.d_x) +
                     "x" + std::to_string(d.d_c));
  }
  if (!drop_condition.empty() && drop_condition.size() != static_cast<std::size_t>(n)) {
    throw ShapeError("drop mask size differs from batch size");
  }
  check_sigma(sigma_min);
  for (Index j = 0; j < n; ++j) {
    if (!(t[j] >= 0.0 && t[j] <= 1.0)) throw ConfigError("t must lie in [0, 1]");
  }

  const double s = 1.0 + sigma_min;
  const Eigen::ArrayXd one_minus_t = 1.0 - t.array();
  const MatrixXd xt = (x0.array().rowwise() * (s * one_minus_t).transpose()).matrix() +
                      (x1.array().rowwise() * t.array().transpose()).matrix();
  const MatrixXd u = x1 - s * x0;

  ForwardCache cache;
  const MatrixXd v = model.forward(
      model.assemble_input(xt, t, &c, drop_condition.empty() ? nullptr : &drop_condition), &cache);
  const MatrixXd r = v - u;

  const double scale = 1.0 / (static_cast<double>(d.d_x) * static_cast<double>(n));
  LossResult out;
  out.loss = r.squaredNorm() * scale;
  out.gradient = VectorXd::Zero(model.parameter_count());
  const MatrixXd d_in = model.backward(cache, 2.0 * scale * r, out.gradient);

  if (!drop_condition.empty()) {
    auto g_null = out.gradient.segment(model.null_condition_offset(), d.d_c);
    for (Index j = 0; j < n; ++j) {
      if (drop_condition[static_cast<std::size_t>(j)]) g_null += d_in.col(j).segment(d.d_x, d.d_c);
    }
  }
  return out;
}

}  // namespace roomflow::flow
