#pragma once

#include <array>
#include <vector>

#include "roomflow/audio/audio_buffer.hpp"

namespace roomflow::metrics {

struct SrmrConfig {
  int n_channels = 23;
  double low_hz = 125.0;
  double high_hz = 8000.0;
  double mod_low_hz = 4.0;
  double mod_high_hz = 128.0;
  double mod_q = 2.0;
  // Modulation bands [0, split) form the numerator, [split, 8) the denominator.
  int split = 4;
  double silence_rms = 1e-6;
};

inline constexpr int kModulationBands = 8;

// Slaney ERB spacing between low_hz and high_hz, descending like the
// classic ERBSpace helper.
std::vector<double> erb_space(double low_hz, double high_hz, int n);

// Eight log-spaced modulation centers from mod_low_hz to mod_high_hz.
std::array<double, kModulationBands> modulation_centers(const SrmrConfig& config = {});

// Modulation energy per band summed over all acoustic channels.
std::array<double, kModulationBands> modulation_energy(const audio::AudioBuffer& speech,
                                                       const SrmrConfig& config = {});

// Ratio of low (speech-rate) to high modulation-band energy of the gammatone
// envelopes. Envelopes are the magnitude of the analytic signal, obtained by
// filtering positive frequencies only in the FFT domain.
// Requires 16 kHz input of at least 0.5 s; throws SilenceError on silence.
double srmr(const audio::AudioBuffer& speech, const SrmrConfig& config = {});

}  // namespace roomflow::metrics
