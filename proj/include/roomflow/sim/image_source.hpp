#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "roomflow/sim/room.hpp"

namespace roomflow::sim {

struct SimulationOptions {
  // Images quieter than this (relative to the direct path) are skipped.
  double cull_db = -100.0;
  // Hard limit on enumerated images; exceeding it raises ResourceError.
  std::size_t max_images = 50'000'000;
  // Upper bound on output length for nearly lossless rooms.
  double max_seconds = 8.0;
  // Cutoff of the high-pass applied to the reflection sum; 0 disables it.
  double highpass_hz = 100.0;
};

struct SimulationResult {
  Rir rir;
  std::size_t images_enumerated = 0;
  std::size_t images_rendered = 0;
};

inline constexpr int kFractionalDelayTaps = 81;

// Adds amplitude times the windowed-sinc kernel centered at a fractional
// delay (in samples) to h; taps falling outside h are dropped.
void add_fractional_impulse(std::vector<double>& h, double delay_samples, double amplitude);

// (2M + 1)^3 for per-axis order M.
std::size_t image_count(int max_order);

// Samples needed to cover max(2·Sabine T60, the -80 dB point) past the
// direct arrival, plus the fractional-delay kernel half-width.
std::size_t rir_length(const RoomSpec& room, const SimulationOptions& options = {});

// Image-source RIR of a shoebox room. Each image contributes an
// 81-tap Blackman-windowed sinc at its exact delay, scaled by the product of
// wall reflection coefficients sqrt(1 - alpha) over 4πd. The reflections
// are high-passed before the direct-path kernel is added.
SimulationResult simulate_rir_detailed(const RoomSpec& room,
                                       const SimulationOptions& options = {});
Rir simulate_rir(const RoomSpec& room, const SimulationOptions& options = {});

// RIRs for (source -> receiver) and (receiver -> source).
std::pair<Rir, Rir> reciprocity_check(const RoomSpec& room,
                                      const SimulationOptions& options = {});

}  // namespace roomflow::sim
