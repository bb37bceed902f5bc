#pragma once

#include <cstddef>
#include <vector>

#include "roomflow/audio/audio_buffer.hpp"
#include "roomflow/audio/stft.hpp"

namespace roomflow::audio {

struct MelConfig {
  std::size_t n_mels = 64;
  double fmin = 0.0;
  double fmax = 8000.0;
  double log_floor = 1e-5;
  StftConfig stft;
};

// Log-compressed mel energies, row-major [frame][band].
struct MelFeature {
  std::size_t n_frames = 0;
  std::size_t n_mels = 0;
  std::vector<double> values;
  double fmin = 0.0;
  double fmax = 0.0;
  double log_floor = 0.0;

  double at(std::size_t frame, std::size_t band) const {
    return values[frame * n_mels + band];
  }
};

double hz_to_mel(double hz);  // HTK: 2595·log10(1 + f/700)
double mel_to_hz(double mel);

// Triangular HTK filterbank, row-major [band][bin]. Throws ConfigError when
// a band covers no FFT bin.
std::vector<double> mel_filterbank(std::size_t n_mels, double fmin, double fmax,
                                   std::size_t fft_size, int sample_rate);

// Band center frequencies in Hz.
std::vector<double> mel_centers(std::size_t n_mels, double fmin, double fmax);

// log(mel(|STFT|²) + log_floor), natural log.
MelFeature logmel(const AudioBuffer& buffer, const MelConfig& config = {});

}  // namespace roomflow::audio
