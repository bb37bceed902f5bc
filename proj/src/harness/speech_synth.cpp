#include "roomflow/harness/speech_synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "roomflow/audio/fft.hpp"
#include "roomflow/random.hpp"

namespace roomflow::harness {
namespace {

double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

// Gaussian noise shaped by a band-pass with a spectral tilt and one
// formant-like peak, normalized to unit RMS.
std::vector<double> shaped_noise(Rng& rng, std::size_t n, double fs) {
  const std::size_t size = audio::next_power_of_two(n);
  const audio::FftPlan plan(size);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<audio::Complex> buf(size);
  for (auto& c : buf) c = gauss(rng);
  plan.forward(buf);
  const double lo = uniform(rng, 100.0, 400.0);
  const double hi = uniform(rng, 2500.0, 6000.0);
  const double formant = uniform(rng, 400.0, 2500.0);
  const double formant_bw = uniform(rng, 150.0, 400.0);
  for (std::size_t k = 0; k < size; ++k) {
    const std::size_t kk = k <= size / 2 ? k : size - k;
    const double f = static_cast<double>(kk) * fs / static_cast<double>(size);
    double g = 0.0;
    if (f >= lo && f <= hi) {
      const double tilt = 1.0 / std::sqrt(1.0 + f / 500.0);
      const double x = (f - formant) / formant_bw;
      g = tilt * (1.0 + 3.0 / (1.0 + x * x));
    }
    buf[k] *= g;
  }
  plan.inverse(buf);
  std::vector<double> out(n);
  double energy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = buf[i].real();
    energy += out[i] * out[i];
  }
  const double scale = energy > 0.0 ? 1.0 / std::sqrt(energy / static_cast<double>(n)) : 0.0;
  for (double& v : out) v *= scale;
  return out;
}

double raised_cosine(double x) { return 0.5 - 0.5 * std::cos(std::numbers::pi * x); }

}  // namespace

audio::AudioBuffer synth_speech(std::uint64_t seed, const SpeechSynthConfig& config) {
  Rng rng(derive_seed(seed, 0x5e7c4));
  const double fs = config.sample_rate;
  const auto n = static_cast<std::size_t>(std::llround(config.duration * fs));
  std::vector<double> out(n, 0.0);

  const double rate = uniform(rng, config.syllable_rate_min, config.syllable_rate_max);
  double t = uniform(rng, 0.02, 0.15);
  while (t < config.duration) {
    const double period = 1.0 / (rate * uniform(rng, 0.8, 1.25));
    const double length = period * uniform(rng, 0.55, 0.8);
    const double attack = uniform(rng, 0.01, 0.025);
    const double release = uniform(rng, 0.015, 0.03);
    const double level = config.peak_level * uniform(rng, 0.35, 1.0) / 3.0;
    const auto begin = static_cast<std::size_t>(t * fs);
    const auto count = static_cast<std::size_t>(length * fs);
    const auto noise = shaped_noise(rng, count, fs);
    for (std::size_t i = 0; i < count && begin + i < n; ++i) {
      const double s = static_cast<double>(i) / fs;
      double env = 1.0;
      if (s < attack) env = raised_cosine(s / attack);
      if (length - s < release) env = std::min(env, raised_cosine((length - s) / release));
      out[begin + i] += level * env * noise[i];
    }
    t += period;
    if (uniform(rng, 0.0, 1.0) < config.pause_probability) t += uniform(rng, 0.15, 0.35);
  }

  std::normal_distribution<double> gauss(0.0, 1.0);
  const double floor = config.peak_level * std::pow(10.0, config.noise_floor_db / 20.0);
  for (double& v : out) v = std::clamp(v + floor * gauss(rng), -1.0, 1.0);
  return audio::AudioBuffer(std::move(out), config.sample_rate);
}

}  // namespace roomflow::harness
