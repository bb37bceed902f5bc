#include "roomflow/metrics/srmr.hpp"

#include <cmath>
#include <string>

#include "roomflow/audio/fft.hpp"
#include "roomflow/errors.hpp"

namespace roomflow::metrics {
namespace {

constexpr double kEarQ = 9.26449;
constexpr double kMinBw = 24.7;

double erb(double fc) { return fc / kEarQ + kMinBw; }

void check_input(const audio::AudioBuffer& speech, const SrmrConfig& config) {
  if (speech.sample_rate() != audio::kDefaultSampleRate) {
    throw RateError("SRMR expects 16 kHz input, got " +
                    std::to_string(speech.sample_rate()) + " Hz");
  }
  if (speech.duration() < 0.5) throw LengthError("SRMR needs at least 0.5 s of audio");
  if (speech.rms() < config.silence_rms) throw SilenceError("SRMR input is silent");
}

}  // namespace

std::vector<double> erb_space(double low_hz, double high_hz, int n) {
  std::vector<double> cfs(static_cast<std::size_t>(n));
  const double a = kEarQ * kMinBw;
  for (int i = 1; i <= n; ++i) {
    cfs[static_cast<std::size_t>(i - 1)] =
        -a + std::exp(i * (-std::log(high_hz + a) + std::log(low_hz + a)) / n) *
                 (high_hz + a);
  }
  return cfs;
}

std::array<double, kModulationBands> modulation_centers(const SrmrConfig& config) {
  std::array<double, kModulationBands> centers{};
  const double ratio = std::log(config.mod_high_hz / config.mod_low_hz);
  for (int j = 0; j < kModulationBands; ++j) {
    centers[j] = config.mod_low_hz * std::exp(ratio * j / (kModulationBands - 1));
  }
  return centers;
}

std::array<double, kModulationBands> modulation_energy(const audio::AudioBuffer& speech,
                                                       const SrmrConfig& config) {
  check_input(speech, config);
  const std::size_t len = speech.size();
  const double fs = speech.sample_rate();
  // Padding keeps the circular filter tails off the signal region.
  const std::size_t n = audio::next_power_of_two(len + static_cast<std::size_t>(fs / 8));
  const audio::FftPlan plan(n);

  std::vector<audio::Complex> spectrum(n);
  for (std::size_t i = 0; i < len; ++i) spectrum[i] = speech[i];
  plan.forward(spectrum);

  const auto cfs = erb_space(config.low_hz, config.high_hz, config.n_channels);
  const auto mods = modulation_centers(config);
  // Squared modulation filter responses on the positive-frequency grid.
  std::vector<std::array<double, kModulationBands>> mod_gain(n / 2 + 1);
  for (std::size_t k = 1; k <= n / 2; ++k) {
    const double f = k * fs / n;
    for (int j = 0; j < kModulationBands; ++j) {
      const double detune = f / mods[j] - mods[j] / f;
      mod_gain[k][j] = 1.0 / (1.0 + config.mod_q * config.mod_q * detune * detune);
    }
  }

  std::array<double, kModulationBands> energy{};
  std::vector<audio::Complex> band(n);
  for (double fc : cfs) {
    const double b = 1.019 * erb(fc);
    std::fill(band.begin(), band.end(), audio::Complex{});
    for (std::size_t k = 1; k < n / 2; ++k) {
      const double f = k * fs / n;
      const double x = (f - fc) / b;
      const double g = 1.0 / ((1.0 + x * x) * (1.0 + x * x));
      band[k] = 2.0 * g * spectrum[k];
    }
    plan.inverse(band);

    double mean = 0.0;
    std::vector<audio::Complex> env(n);
    for (std::size_t i = 0; i < len; ++i) {
      const double e = std::abs(band[i]);
      env[i] = e;
      mean += e;
    }
    mean /= static_cast<double>(len);
    for (std::size_t i = 0; i < len; ++i) env[i] -= mean;
    plan.forward(env);
    for (std::size_t k = 1; k <= n / 2; ++k) {
      const double p = std::norm(env[k]);
      for (int j = 0; j < kModulationBands; ++j) energy[j] += p * mod_gain[k][j];
    }
  }
  return energy;
}

double srmr(const audio::AudioBuffer& speech, const SrmrConfig& config) {
  const auto energy = modulation_energy(speech, config);
  double low = 0.0;
  double high = 0.0;
  for (int j = 0; j < kModulationBands; ++j) (j < config.split ? low : high) += energy[j];
  if (!(high > 0.0)) throw SilenceError("no high-band modulation energy");
  return low / high;
}

}  // namespace roomflow::metrics
