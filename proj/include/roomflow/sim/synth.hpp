#pragma once

#include <cstdint>

#include "roomflow/sim/room.hpp"

namespace roomflow::sim {

// h[n] = g[n]·exp(-ln(1000)·n / (fs·t60)) with g unit-variance Gaussian
// noise drawn from `seed`; the energy envelope falls by exactly 60 dB at t60.
Rir synth_exponential_rir(double t60, double duration, int sample_rate,
                          std::uint64_t seed);

}  // namespace roomflow::sim
