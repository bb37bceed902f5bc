#pragma once

#include <cstdint>

#include "roomflow/audio/audio_buffer.hpp"

namespace roomflow::harness {

struct SpeechSynthConfig {
  double duration = 2.56;
  int sample_rate = audio::kDefaultSampleRate;
  double syllable_rate_min = 3.0;  // Hz
  double syllable_rate_max = 8.0;
  double pause_probability = 0.25;
  double peak_level = 0.5;
  double noise_floor_db = -60.0;  // relative to peak_level
};

// Speech-like test signal: band-passed noise syllables with a syllabic
// rate drawn from [syllable_rate_min, syllable_rate_max], short raised-cosine
// attacks and releases, occasional phrase pauses and a constant low noise
// floor. Deterministic given seed.
audio::AudioBuffer synth_speech(std::uint64_t seed, const SpeechSynthConfig& config = {});

}  // namespace roomflow::harness
