#pragma once

#include <cstddef>
#include <vector>

#include "roomflow/audio/audio_buffer.hpp"
#include "roomflow/audio/stft.hpp"

namespace roomflow::metrics {

struct BlindRt60Config {
  std::size_t n_bands = 16;
  double fmin = 125.0;
  double fmax = 8000.0;
  audio::StftConfig stft;
  // Moving-average length applied to each band's dB trajectory.
  std::size_t smooth_frames = 3;
  // A free-decay segment must last this many frames and fall this far.
  std::size_t min_frames = 5;
  double min_drop_db = 10.0;
  // Frames further than this below the band maximum are ignored.
  double dynamic_range_db = 50.0;
  // Decay rates slower than this many seconds are not kept.
  double max_rt60 = 5.0;
  double min_seconds = 1.0;
  double silence_rms = 1e-6;
};

struct DecaySegment {
  std::size_t band = 0;
  std::size_t first_frame = 0;
  std::size_t frames = 0;
  double slope_db_per_s = 0.0;
};

// Free-decay segments found in the band energies of the signal.
std::vector<DecaySegment> find_decay_segments(const audio::AudioBuffer& speech,
                                              const BlindRt60Config& config = {});

// RT60 estimated from the signal alone: the median decay rate over the
// free-decay segments of all bands, mapped to -60/slope seconds.
// Throws SilenceError on silent input, LengthError below min_seconds and
// EstimationError when no decay segment is found.
double blind_rt60(const audio::AudioBuffer& speech, const BlindRt60Config& config = {});

// |blind_rt60(output) - blind_rt60(reference)|.
double rte(const audio::AudioBuffer& output, const audio::AudioBuffer& reference,
           const BlindRt60Config& config = {});

}  // namespace roomflow::metrics
