#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "roomflow/audio/audio_buffer.hpp"
#include "roomflow/audio/fft.hpp"

namespace roomflow::audio {

enum class Window { kHann, kRectangular };

struct StftConfig {
  std::size_t fft_size = 512;
  std::size_t hop = 128;
  Window window = Window::kHann;
};

// Periodic window of length n.
std::vector<double> make_window(Window window, std::size_t n);

// True when Σ_m w²[n + m·hop] is constant (relative deviation ≤ 1e-10).
bool satisfies_cola(const StftConfig& config);

// Throws ConfigError unless fft_size is a power of two, hop divides it and
// the squared window overlap-adds to a constant.
void validate(const StftConfig& config);

// Complex STFT, row-major [frame][bin] with n_bins = fft_size/2 + 1.
struct Spectrogram {
  std::size_t n_frames = 0;
  std::size_t n_bins = 0;
  std::vector<Complex> data;
  StftConfig config;
  int sample_rate = kDefaultSampleRate;
  std::optional<std::size_t> original_length;

  Complex& at(std::size_t frame, std::size_t bin) {
    return data[frame * n_bins + bin];
  }
  const Complex& at(std::size_t frame, std::size_t bin) const {
    return data[frame * n_bins + bin];
  }
};

// Centered frames: the signal is padded by fft_size/2 on both sides
// (reflect when long enough, zeros otherwise) and frame t covers padded
// samples [t·hop, t·hop + fft_size). Forward transform is unnormalized.
Spectrogram stft(const AudioBuffer& buffer, const StftConfig& config = {});

// Weighted overlap-add with the analysis window as synthesis window,
// normalized by the accumulated squared window.
AudioBuffer istft(const Spectrogram& spec);

// Number of frames stft() produces for a signal of the given length.
std::size_t stft_frame_count(std::size_t length, const StftConfig& config);

}  // namespace roomflow::audio
