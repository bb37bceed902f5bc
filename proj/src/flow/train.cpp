#include "roomflow/flow/train.hpp"

#include <cmath>
#include <random>

#include "roomflow/errors.hpp"
#include "roomflow/flow/loss.hpp"
#include "roomflow/random.hpp"

namespace roomflow::flow {

void validate(const FlowTrainConfig& c) {
  if (c.steps < 1) throw ConfigError("steps must be >= 1");
  if (c.batch < 1) throw ConfigError("batch must be >= 1");
  if (!(c.lr > 0.0) || !std::isfinite(c.lr)) throw ConfigError("lr must be positive");
  if (!(c.momentum >= 0.0 && c.momentum < 1.0)) throw ConfigError("momentum must lie in [0, 1)");
  if (!(c.beta2 >= 0.0 && c.beta2 < 1.0)) throw ConfigError("beta2 must lie in [0, 1)");
  if (!(c.cond_drop_prob >= 0.0 && c.cond_drop_prob < 1.0)) {
    throw ConfigError("cond_drop_prob must lie in [0, 1)");
  }
  if (!(c.sigma_min >= 0.0 && c.sigma_min <= 0.1)) throw ConfigError("sigma_min must lie in [0, 0.1]");
  if (c.hidden < 1) throw ConfigError("hidden width must be >= 1");
}

TrainResult train(const std::vector<FlowPair>& dataset, const FlowTrainConfig& config,
                  const ProgressFn& progress, long progress_every) {
  validate(config);
  if (dataset.empty()) throw ConfigError("training dataset is empty");
  const Index d_x = dataset.front().target.size();
  const Index d_c = dataset.front().condition.size();
  for (const auto& p : dataset) {
    if (p.target.size() != d_x || p.condition.size() != d_c) {
      throw ShapeError("training pairs differ in feature size");
    }
    if (!p.target.allFinite() || !p.condition.allFinite()) {
      throw ShapeError("training features must be finite");
    }
  }
  if (config.fixed_source && config.fixed_source->size() != d_x) {
    throw ShapeError("fixed source differs from target size");
  }

  Rng rng(config.seed);
  TrainResult result;
  result.model = FlowModel({d_x, d_c, config.hidden, config.time_embed}, mix_seed(config.seed));
  FlowModel& model = result.model;
  result.loss_curve.reserve(static_cast<std::size_t>(config.steps));

  std::uniform_int_distribution<std::size_t> pick(0, dataset.size() - 1);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);

  const int b = config.batch;
  MatrixXd x1(d_x, b), c(d_c, b), x0(d_x, b);
  VectorXd t(b);
  std::vector<bool> drop(static_cast<std::size_t>(b));
  VectorXd m1 = VectorXd::Zero(model.parameter_count());
  VectorXd m2;
  if (config.optimizer == Optimizer::kAdam) m2 = VectorXd::Zero(model.parameter_count());
  double b1_pow = 1.0;
  double b2_pow = 1.0;

  for (long step = 0; step < config.steps; ++step) {
    for (int j = 0; j < b; ++j) {
      const FlowPair& p = dataset[pick(rng)];
      x1.col(j) = p.target;
      c.col(j) = p.condition;
      t[j] = uniform(rng);
      drop[static_cast<std::size_t>(j)] = uniform(rng) < config.cond_drop_prob;
      if (config.fixed_source) {
        x0.col(j) = *config.fixed_source;
      } else {
        for (Index i = 0; i < d_x; ++i) x0(i, j) = normal(rng);
      }
    }
    const LossResult l = flow_loss_batch(model, x1, c, x0, t, config.sigma_min, drop);
    if (!std::isfinite(l.loss) || l.loss > 1e6) {
      throw TrainingDivergedError("flow training diverged with loss " + std::to_string(l.loss),
                                  step);
    }
    double lr = config.lr;
    if (config.schedule == LrSchedule::kCosine) {
      lr *= 0.5 * (1.0 + std::cos(M_PI * static_cast<double>(step) / static_cast<double>(config.steps)));
    }
    if (config.optimizer == Optimizer::kAdam) {
      b1_pow *= config.momentum;
      b2_pow *= config.beta2;
      m1 = config.momentum * m1 + (1.0 - config.momentum) * l.gradient;
      m2 = config.beta2 * m2 + (1.0 - config.beta2) * l.gradient.cwiseAbs2();
      const double a = lr * std::sqrt(1.0 - b2_pow) / (1.0 - b1_pow);
      model.mutable_parameters().array() -= a * m1.array() / (m2.array().sqrt() + 1e-8);
    } else {
      m1 = config.momentum * m1 - lr * l.gradient;
      model.mutable_parameters() += m1;
    }
    if (!model.finite()) throw TrainingDivergedError("non-finite flow parameters", step);
    result.loss_curve.push_back(l.loss);
    if (progress && progress_every > 0 && (step + 1) % progress_every == 0) {
      progress(step + 1, l.loss);
    }
  }
  return result;
}

}  // namespace roomflow::flow
