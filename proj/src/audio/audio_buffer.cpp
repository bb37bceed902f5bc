#include "roomflow/audio/audio_buffer.hpp"

#include <cmath>
#include <string>

#include "roomflow/errors.hpp"

namespace roomflow::audio {

AudioBuffer::AudioBuffer(std::vector<double> samples, int sample_rate)
    : samples_(std::move(samples)), sample_rate_(sample_rate) {
  if (sample_rate_ <= 0) {
    throw ConfigError("sample rate must be positive, got " +
                      std::to_string(sample_rate_));
  }
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    if (!std::isfinite(samples_[i])) {
      throw ConfigError("non-finite sample at index " + std::to_string(i));
    }
  }
}

double AudioBuffer::energy() const {
  double e = 0.0;
  for (double s : samples_) e += s * s;
  return e;
}

double AudioBuffer::rms() const {
  if (samples_.empty()) return 0.0;
  return std::sqrt(energy() / static_cast<double>(samples_.size()));
}

AudioBuffer AudioBuffer::fitted(std::size_t n) const { return slice(0, n); }

AudioBuffer AudioBuffer::slice(std::size_t begin, std::size_t n) const {
  std::vector<double> out(n, 0.0);
  for (std::size_t i = 0; i < n && begin + i < samples_.size(); ++i) {
    out[i] = samples_[begin + i];
  }
  return AudioBuffer(std::move(out), sample_rate_);
}

AudioBuffer AudioBuffer::scaled(double gain) const {
  std::vector<double> out(samples_);
  for (double& s : out) s *= gain;
  return AudioBuffer(std::move(out), sample_rate_);
}

std::size_t window_samples(int sample_rate) {
  return static_cast<std::size_t>(std::llround(kWindowSeconds * sample_rate));
}

}  // namespace roomflow::audio
