#include "roomflow/flow/sample.hpp"

#include <random>

#include "roomflow/errors.hpp"
#include "roomflow/random.hpp"

namespace roomflow::flow {

namespace {

void check(const FlowModel& model, const VectorXd& c, const VectorXd& x0, int steps) {
  if (steps < 1) throw ConfigError("sampling needs at least one step");
  if (c.size() != model.dims().d_c || x0.size() != model.dims().d_x) {
    throw ShapeError("sample inputs do not match model dims");
  }
}

void check_state(const VectorXd& x, int step) {
  if (!x.allFinite()) {
    throw SampleDivergedError("non-finite sampler state at step " + std::to_string(step));
  }
}

}  // namespace

VectorXd source_sample(Index d, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  VectorXd x(d);
  for (Index i = 0; i < d; ++i) x[i] = normal(rng);
  return x;
}

VectorXd sample_conditional(const FlowModel& model, const VectorXd& c, const VectorXd& x0,
                            int steps) {
  check(model, c, x0, steps);
  const double h = 1.0 / steps;
  VectorXd x = x0;
  for (int k = 0; k < steps; ++k) {
    x += h * model.velocity(x, k * h, c);
    check_state(x, k);
  }
  return x;
}

VectorXd sample_from(const FlowModel& model, const VectorXd& c, const VectorXd& x0, int steps,
                     double cfg_scale) {
  if (cfg_scale == 1.0) return sample_conditional(model, c, x0, steps);
  check(model, c, x0, steps);
  const double h = 1.0 / steps;
  VectorXd x = x0;
  for (int k = 0; k < steps; ++k) {
    const double t = k * h;
    const VectorXd vu = model.velocity_unconditional(x, t);
    const VectorXd vc = model.velocity(x, t, c);
    x += h * (vu + cfg_scale * (vc - vu));
    check_state(x, k);
  }
  return x;
}

VectorXd sample(const FlowModel& model, const VectorXd& c, int steps, std::uint64_t seed,
                double cfg_scale) {
  return sample_from(model, c, source_sample(model.dims().d_x, seed), steps, cfg_scale);
}

}  // namespace roomflow::flow
