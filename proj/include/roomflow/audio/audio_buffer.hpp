#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace roomflow::audio {

// Mono waveform at a fixed sample rate. Construction validates that the
// rate is positive and every sample is finite.
class AudioBuffer {
 public:
  AudioBuffer() = default;
  AudioBuffer(std::vector<double> samples, int sample_rate);

  const std::vector<double>& samples() const { return samples_; }
  std::span<const double> view() const { return samples_; }
  std::size_t size() const { return samples_.size(); }
  bool empty() const { return samples_.empty(); }
  int sample_rate() const { return sample_rate_; }
  double duration() const {
    return static_cast<double>(samples_.size()) / sample_rate_;
  }
  double operator[](std::size_t i) const { return samples_[i]; }

  double energy() const;
  double rms() const;

  // Zero-padded or truncated copy of exactly n samples.
  AudioBuffer fitted(std::size_t n) const;
  // Copy of [begin, begin + n), zero-padded past the end.
  AudioBuffer slice(std::size_t begin, std::size_t n) const;
  AudioBuffer scaled(double gain) const;

 private:
  std::vector<double> samples_;
  int sample_rate_ = 16000;
};

inline constexpr int kDefaultSampleRate = 16000;
// Analysis window length used for RIR metrics and flow features.
inline constexpr double kWindowSeconds = 2.56;

std::size_t window_samples(int sample_rate);

}  // namespace roomflow::audio
