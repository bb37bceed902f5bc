#pragma once

#include <vector>

#include "roomflow/audio/audio_buffer.hpp"
#include "roomflow/audio/stft.hpp"

namespace roomflow::wpe {

struct WpeConfig {
  int taps = 10;       // prediction filter order K
  int delay = 3;       // prediction delay D in frames
  int iterations = 3;
  double epsilon = 1e-8;
  audio::StftConfig stft;
};

// Throws ConfigError unless taps, delay and iterations are >= 1 and
// epsilon > 0.
void validate(const WpeConfig& config);

struct WpeResult {
  audio::AudioBuffer output;
  // Euclidean norm of the final prediction filter, one per frequency bin.
  std::vector<double> filter_norms;
};

// Single-channel weighted prediction error dereverberation. Per bin, the
// late reverberation is predicted from frames t-D ... t-D-K+1 with a filter
// solved from variance-weighted, Tikhonov-regularized normal equations,
// and subtracted; the variance weights are re-estimated from the current
// output on each iteration. Frames without full context pass through.
// Requires 16 kHz input spanning at least taps + delay + 1 STFT frames.
WpeResult wpe_dereverb_detailed(const audio::AudioBuffer& input, const WpeConfig& config = {});
audio::AudioBuffer wpe_dereverb(const audio::AudioBuffer& input, const WpeConfig& config = {});

}  // namespace roomflow::wpe
