#include "roomflow/sim/synth.hpp"

#include <cmath>
#include <random>
#include <vector>

#include "roomflow/errors.hpp"
#include "roomflow/random.hpp"

namespace roomflow::sim {

Rir synth_exponential_rir(double t60, double duration, int sample_rate,
                          std::uint64_t seed) {
  if (!(t60 > 0.0) || !(duration >= t60)) {
    throw ConfigError("synthetic RIR needs t60 > 0 and duration >= t60");
  }
  if (sample_rate <= 0) throw ConfigError("sample_rate must be positive");
  const auto n = static_cast<std::size_t>(std::llround(duration * sample_rate));
  Rng rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double rate = std::log(1000.0) / (sample_rate * t60);
  std::vector<double> h(n);
  for (std::size_t i = 0; i < n; ++i) {
    h[i] = gauss(rng) * std::exp(-rate * static_cast<double>(i));
  }
  Rir rir;
  rir.h = audio::AudioBuffer(std::move(h), sample_rate);
  return rir;
}

}  // namespace roomflow::sim
