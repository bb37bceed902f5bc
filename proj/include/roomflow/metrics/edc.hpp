#pragma once

#include <span>
#include <vector>

#include "roomflow/audio/audio_buffer.hpp"
#include "roomflow/sim/room.hpp"

namespace roomflow::metrics {

// Schroeder energy decay curve in dB, starting at the RIR onset.
// values_db[0] == 0 exactly and the curve never increases.
struct Edc {
  std::vector<double> values_db;
  int sample_rate = audio::kDefaultSampleRate;
  double t0 = 0.0;  // seconds from the start of the RIR to values_db[0]

  double time(std::size_t i) const {
    return t0 + static_cast<double>(i) / sample_rate;
  }
  std::size_t size() const { return values_db.size(); }
};

// Values below this are stored as the floor; exact zero tail energy maps here.
inline constexpr double kEdcFloorDb = -120.0;

// First sample whose magnitude reaches 1/10 of the peak (-20 dB).
std::size_t onset_index(std::span<const double> h);

// Throws DegenerateError for a zero-energy response.
Edc edc(const sim::Rir& rir);
Edc edc(const audio::AudioBuffer& h);

// Schroeder integral from sample 0, without onset trimming.
Edc edc_from(std::span<const double> h, int sample_rate, std::size_t start = 0);

}  // namespace roomflow::metrics
