#pragma once

#include <vector>

#include "roomflow/flow/model.hpp"

namespace roomflow::flow {

// Path point and target velocity for one (x0, x1, t):
//   x_t = (1 - t)·x0 + t·x1 + sigma_min·(1 - t)·x0
//   u   = d x_t / dt = x1 - (1 + sigma_min)·x0
struct PathPoint {
  VectorXd xt;
  VectorXd u;
};

PathPoint path_point(const VectorXd& x0, const VectorXd& x1, double t, double sigma_min = 0.0);

struct LossResult {
  double loss = 0.0;
  VectorXd gradient;  // dL/dθ, same layout as FlowModel::parameters()
};

// ‖v(x_t, t, c) - u‖² / d_x with gradients by backpropagation. When
// drop_condition is set the null condition replaces c and receives the
// condition gradient. Throws ShapeError on mismatched dims and
// ConfigError for t outside [0, 1] or sigma_min outside [0, 0.1].
LossResult flow_loss(const FlowModel& model, const VectorXd& x1, const VectorXd& c,
                     const VectorXd& x0, double t, double sigma_min = 0.0,
                     bool drop_condition = false);

// Mean of flow_loss over the columns of a batch.
LossResult flow_loss_batch(const FlowModel& model, const MatrixXd& x1, const MatrixXd& c,
                           const MatrixXd& x0, const VectorXd& t, double sigma_min = 0.0,
                           const std::vector<bool>& drop_condition = {});

}  // namespace roomflow::flow
