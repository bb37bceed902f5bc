#include "roomflow/audio/stft.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "roomflow/errors.hpp"

namespace roomflow::audio {

std::vector<double> make_window(Window window, std::size_t n) {
  std::vector<double> w(n, 1.0);
  if (window == Window::kHann) {
    for (std::size_t i = 0; i < n; ++i) {
      w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi *
                                  static_cast<double>(i) / static_cast<double>(n));
    }
  }
  return w;
}

bool satisfies_cola(const StftConfig& config) {
  if (config.hop == 0 || config.hop > config.fft_size ||
      config.fft_size % config.hop != 0) {
    return false;
  }
  const auto w = make_window(config.window, config.fft_size);
  double lo = 0.0;
  double hi = 0.0;
  for (std::size_t n = 0; n < config.hop; ++n) {
    double sum = 0.0;
    for (std::size_t m = n; m < config.fft_size; m += config.hop) sum += w[m] * w[m];
    if (n == 0) {
      lo = hi = sum;
    } else {
      lo = std::min(lo, sum);
      hi = std::max(hi, sum);
    }
  }
  return hi > 0.0 && (hi - lo) <= 1e-10 * hi;
}

void validate(const StftConfig& config) {
  if (!is_power_of_two(config.fft_size)) {
    throw ConfigError("fft_size must be a power of two, got " +
                      std::to_string(config.fft_size));
  }
  if (config.hop == 0 || config.hop > config.fft_size ||
      config.fft_size % config.hop != 0) {
    throw ConfigError("hop " + std::to_string(config.hop) +
                      " must divide fft_size " + std::to_string(config.fft_size));
  }
  if (!satisfies_cola(config)) {
    throw ConfigError("window does not overlap-add to a constant at hop " +
                      std::to_string(config.hop));
  }
}

std::size_t stft_frame_count(std::size_t length, const StftConfig& config) {
  return 1 + length / config.hop;
}

Spectrogram stft(const AudioBuffer& buffer, const StftConfig& config) {
  validate(config);
  const std::size_t n = config.fft_size;
  const std::size_t pad = n / 2;
  const std::size_t len = buffer.size();
  const auto& x = buffer.samples();
  const bool reflect = len > pad;

  const std::size_t padded_len = len + 2 * pad;
  std::vector<double> padded(padded_len, 0.0);
  for (std::size_t i = 0; i < len; ++i) padded[pad + i] = x[i];
  if (reflect) {
    for (std::size_t i = 1; i <= pad; ++i) {
      padded[pad - i] = x[i];
      padded[pad + len - 1 + i] = x[len - 1 - i];
    }
  }

  Spectrogram spec;
  spec.config = config;
  spec.sample_rate = buffer.sample_rate();
  spec.original_length = len;
  spec.n_bins = n / 2 + 1;
  spec.n_frames = stft_frame_count(len, config);
  spec.data.resize(spec.n_frames * spec.n_bins);

  const FftPlan plan(n);
  const auto w = make_window(config.window, n);
  std::vector<double> frame(n);
  for (std::size_t t = 0; t < spec.n_frames; ++t) {
    const std::size_t start = t * config.hop;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t idx = start + i;
      frame[i] = idx < padded_len ? padded[idx] * w[i] : 0.0;
    }
    const auto bins = plan.forward_real(frame);
    std::copy(bins.begin(), bins.end(), spec.data.begin() + t * spec.n_bins);
  }
  return spec;
}

AudioBuffer istft(const Spectrogram& spec) {
  validate(spec.config);
  const std::size_t n = spec.config.fft_size;
  const std::size_t hop = spec.config.hop;
  if (spec.n_bins != n / 2 + 1 || spec.data.size() != spec.n_frames * spec.n_bins) {
    throw ShapeError("spectrogram shape does not match its fft_size");
  }
  const std::size_t pad = n / 2;
  if (spec.n_frames == 0) return AudioBuffer({}, spec.sample_rate);

  const std::size_t out_len = (spec.n_frames - 1) * hop + n;
  std::vector<double> acc(out_len, 0.0);
  std::vector<double> wss(out_len, 0.0);
  const FftPlan plan(n);
  const auto w = make_window(spec.config.window, n);
  for (std::size_t t = 0; t < spec.n_frames; ++t) {
    const auto frame = plan.inverse_real(
        std::span<const Complex>(spec.data.data() + t * spec.n_bins, spec.n_bins));
    const std::size_t start = t * hop;
    for (std::size_t i = 0; i < n; ++i) {
      acc[start + i] += frame[i] * w[i];
      wss[start + i] += w[i] * w[i];
    }
  }
  const double peak = *std::max_element(wss.begin(), wss.end());
  for (std::size_t i = 0; i < out_len; ++i) {
    acc[i] = wss[i] > 1e-10 * peak ? acc[i] / wss[i] : 0.0;
  }
  const std::size_t natural = out_len > 2 * pad ? out_len - 2 * pad : 0;
  const std::size_t len = spec.original_length.value_or(natural);
  std::vector<double> out(len, 0.0);
  for (std::size_t i = 0; i < len && pad + i < out_len; ++i) out[i] = acc[pad + i];
  return AudioBuffer(std::move(out), spec.sample_rate);
}

}  // namespace roomflow::audio
