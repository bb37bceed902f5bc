#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "roomflow/flow/model.hpp"

namespace roomflow::flow {

enum class Optimizer { kSgdMomentum, kAdam };
enum class LrSchedule { kConstant, kCosine };

struct FlowTrainConfig {
  long steps = 10000;
  int batch = 64;
  double lr = 1e-3;
  LrSchedule schedule = LrSchedule::kCosine;  // cosine decays lr to 0 at the last step
  Optimizer optimizer = Optimizer::kAdam;
  double momentum = 0.9;  // SGD momentum, or Adam's first-moment decay
  double beta2 = 0.999;   // Adam second-moment decay
  std::uint64_t seed = 0;
  double sigma_min = 0.0;
  double cond_drop_prob = 0.1;
  Index hidden = 256;
  Index time_embed = 32;
  // Replaces the N(0, I) source with a fixed point when set.
  std::optional<VectorXd> fixed_source;
};

// Throws ConfigError unless steps >= 1, batch >= 1, lr > 0,
// 0 <= momentum < 1, 0 <= cond_drop_prob < 1 and 0 <= sigma_min <= 0.1.
void validate(const FlowTrainConfig& config);

struct FlowPair {
  VectorXd condition;
  VectorXd target;
};

struct TrainResult {
  FlowModel model;
  std::vector<double> loss_curve;  // mean batch loss per step
};

// Called every progress_every steps with (step, loss).
using ProgressFn = std::function<void(long, double)>;

// Minibatch Adam (or SGD with momentum) on the flow-matching loss. Each batch item is
// a uniformly drawn pair with t ~ U[0, 1], x0 ~ N(0, I) and the condition
// dropped with probability cond_drop_prob. Single-threaded and bit-exact
// for a given dataset and config. Throws ConfigError on an empty dataset,
// ShapeError on ragged or non-finite features and TrainingDivergedError
// when the loss exceeds 1e6 or parameters stop being finite.
TrainResult train(const std::vector<FlowPair>& dataset, const FlowTrainConfig& config,
                  const ProgressFn& progress = {}, long progress_every = 1000);

}  // namespace roomflow::flow
