#pragma once

#include <string>

#include "roomflow/metrics/edc.hpp"
#include "roomflow/metrics/report.hpp"
#include "roomflow/sim/room.hpp"

namespace roomflow::metrics {

enum class DecayEstimator { kT30, kT20 };

std::string to_string(DecayEstimator e);

struct DecayFit {
  double seconds = 0.0;
  double slope_db_per_s = 0.0;
  DecayEstimator estimator = DecayEstimator::kT30;
};

// Least-squares line through the EDC samples in [hi_db, lo_db] (both <= 0),
// returning the slope in dB/s. Needs at least two samples in range.
double fit_decay_slope(const Edc& curve, double hi_db, double lo_db);

// T30 over [-5, -35] dB, T20 over [-5, -25] dB when -35 dB is never reached.
// Throws InsufficientDecayError otherwise.
DecayFit rt60_from_edc(const Edc& curve);

// Six times the 10 dB decay time, fitted over [0, -10] dB.
double edt_from_edc(const Edc& curve);

inline constexpr double kDirectHalfWindow = 0.0025;  // seconds
inline constexpr double kDrrClampDb = 80.0;

struct DirectSplit {
  double direct = 0.0;  // energy within ±2.5 ms of the direct arrival
  double reverb = 0.0;  // energy after that window
  std::size_t window_end = 0;  // first sample of the reverberant part
};

// The arrival comes from provenance when present, else the global peak.
// Throws DegenerateError for a zero-energy response.
DirectSplit split_direct(const sim::Rir& rir);

// 10·log10(direct / reverb) from split_direct, clamped to ±80 dB.
double drr(const sim::Rir& rir);

struct RirParameters {
  double rt60 = 0.0;
  DecayEstimator rt60_estimator = DecayEstimator::kT30;
  double edt = 0.0;
  double drr = 0.0;
};

RirParameters analyze_rir(const sim::Rir& rir);

// Copy of the RIR padded or trimmed to the fixed 2.56 s analysis window.
sim::Rir analysis_window(const sim::Rir& rir);

// Absolute differences of RT60, EDT (seconds) and DRR (dB) between the
// windowed predicted and reference RIRs. Analysis failures are rethrown
// with the failing side named.
AcousticReport rir_delta(const sim::Rir& predicted, const sim::Rir& reference);

}  // namespace roomflow::metrics
