#pragma once

#include <cstdint>

#include "roomflow/flow/model.hpp"

namespace roomflow::flow {

inline constexpr int kDefaultSampleSteps = 32;

// N(0, I) source point of size d drawn from seed.
VectorXd source_sample(Index d, std::uint64_t seed);

// Euler integration of dx/dt = v from t = 0 to 1 in `steps` uniform
// increments starting at x0. The velocity is
// v_uncond + cfg_scale·(v_cond - v_uncond); cfg_scale == 1 evaluates only the
// conditional field, so it equals sample_conditional bit for bit.
// Throws ConfigError for steps < 1, ShapeError on dims and
// SampleDivergedError when the state stops being finite.
VectorXd sample_from(const FlowModel& model, const VectorXd& c, const VectorXd& x0, int steps,
                     double cfg_scale = 1.0);

VectorXd sample(const FlowModel& model, const VectorXd& c, int steps, std::uint64_t seed,
                double cfg_scale = 1.0);

// Euler integration of the conditional field alone.
VectorXd sample_conditional(const FlowModel& model, const VectorXd& c, const VectorXd& x0,
                            int steps);

}  // namespace roomflow::flow
