#include "roomflow/audio/mel.hpp"

#include <cmath>
#include <string>

#include "roomflow/errors.hpp"

namespace roomflow::audio {

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

namespace {

std::vector<double> edge_frequencies(std::size_t n_mels, double fmin, double fmax) {
  const double lo = hz_to_mel(fmin);
  const double hi = hz_to_mel(fmax);
  std::vector<double> edges(n_mels + 2);
  for (std::size_t i = 0; i < edges.size(); ++i) {
    edges[i] = mel_to_hz(lo + (hi - lo) * static_cast<double>(i) /
                                  static_cast<double>(n_mels + 1));
  }
  return edges;
}

void check_range(std::size_t n_mels, double fmin, double fmax, int sample_rate) {
  if (n_mels == 0) throw ConfigError("n_mels must be at least 1");
  if (!(fmin >= 0.0 && fmin < fmax && fmax <= sample_rate / 2.0)) {
    throw ConfigError("mel range must satisfy 0 <= fmin < fmax <= sample_rate/2");
  }
}

}  // namespace

std::vector<double> mel_centers(std::size_t n_mels, double fmin, double fmax) {
  const auto edges = edge_frequencies(n_mels, fmin, fmax);
  return std::vector<double>(edges.begin() + 1, edges.end() - 1);
}

std::vector<double> mel_filterbank(std::size_t n_mels, double fmin, double fmax,
                                   std::size_t fft_size, int sample_rate) {
  check_range(n_mels, fmin, fmax, sample_rate);
  const std::size_t n_bins = fft_size / 2 + 1;
  const auto edges = edge_frequencies(n_mels, fmin, fmax);
  std::vector<double> bank(n_mels * n_bins, 0.0);
  for (std::size_t m = 0; m < n_mels; ++m) {
    const double left = edges[m];
    const double center = edges[m + 1];
    const double right = edges[m + 2];
    double row_sum = 0.0;
    for (std::size_t k = 0; k < n_bins; ++k) {
      const double f = static_cast<double>(k) * sample_rate / static_cast<double>(fft_size);
      double weight = 0.0;
      if (f > left && f <= center) {
        weight = (f - left) / (center - left);
      } else if (f > center && f < right) {
        weight = (right - f) / (right - center);
      }
      bank[m * n_bins + k] = weight;
      row_sum += weight;
    }
    if (row_sum <= 0.0) {
      throw ConfigError("mel band " + std::to_string(m) +
                        " covers no FFT bin; use fewer bands or a larger fft_size");
    }
  }
  return bank;
}

MelFeature logmel(const AudioBuffer& buffer, const MelConfig& config) {
  check_range(config.n_mels, config.fmin, config.fmax, buffer.sample_rate());
  if (!(config.log_floor > 0.0)) throw ConfigError("log_floor must be positive");
  const Spectrogram spec = stft(buffer, config.stft);
  const auto bank = mel_filterbank(config.n_mels, config.fmin, config.fmax,
                                   config.stft.fft_size, buffer.sample_rate());
  MelFeature out;
  out.n_frames = spec.n_frames;
  out.n_mels = config.n_mels;
  out.fmin = config.fmin;
  out.fmax = config.fmax;
  out.log_floor = config.log_floor;
  out.values.resize(out.n_frames * out.n_mels);
  std::vector<double> power(spec.n_bins);
  for (std::size_t t = 0; t < spec.n_frames; ++t) {
    for (std::size_t k = 0; k < spec.n_bins; ++k) power[k] = std::norm(spec.at(t, k));
    for (std::size_t m = 0; m < config.n_mels; ++m) {
      const double* row = bank.data() + m * spec.n_bins;
      double e = 0.0;
      for (std::size_t k = 0; k < spec.n_bins; ++k) e += row[k] * power[k];
      out.values[t * out.n_mels + m] = std::log(e + config.log_floor);
    }
  }
  return out;
}

}  // namespace roomflow::audio
