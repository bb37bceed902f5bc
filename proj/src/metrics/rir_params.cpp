#include "roomflow/metrics/rir_params.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "roomflow/errors.hpp"

namespace roomflow::metrics {

std::string to_string(DecayEstimator e) {
  return e == DecayEstimator::kT30 ? "T30" : "T20";
}

double fit_decay_slope(const Edc& curve, double hi_db, double lo_db) {
  const auto& v = curve.values_db;
  // The curve is nonincreasing, so the in-range samples are contiguous.
  const auto first = std::find_if(v.begin(), v.end(), [&](double x) { return x <= hi_db; });
  std::size_t begin = static_cast<std::size_t>(first - v.begin());
  std::size_t end = begin;
  while (end < v.size() && v[end] >= lo_db) ++end;
  if (end - begin < 2) {
    throw InsufficientDecayError("fewer than two EDC samples between " +
                                 std::to_string(hi_db) + " and " +
                                 std::to_string(lo_db) + " dB");
  }
  const double n = static_cast<double>(end - begin);
  double mean_t = 0.0;
  double mean_y = 0.0;
  for (std::size_t i = begin; i < end; ++i) {
    mean_t += curve.time(i);
    mean_y += v[i];
  }
  mean_t /= n;
  mean_y /= n;
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = begin; i < end; ++i) {
    const double dt = curve.time(i) - mean_t;
    sxy += dt * (v[i] - mean_y);
    sxx += dt * dt;
  }
  return sxy / sxx;
}

namespace {

double min_level(const Edc& curve) {
  return curve.values_db.empty() ? 0.0 : curve.values_db.back();
}

double slope_to_seconds(double slope) {
  if (!(slope < 0.0)) throw InsufficientDecayError("decay slope is not negative");
  return -60.0 / slope;
}

}  // namespace

DecayFit rt60_from_edc(const Edc& curve) {
  DecayFit fit;
  const double floor = min_level(curve);
  if (floor <= -35.0) {
    fit.estimator = DecayEstimator::kT30;
    fit.slope_db_per_s = fit_decay_slope(curve, -5.0, -35.0);
  } else if (floor <= -25.0) {
    fit.estimator = DecayEstimator::kT20;
    fit.slope_db_per_s = fit_decay_slope(curve, -5.0, -25.0);
  } else {
    throw InsufficientDecayError("EDC never reaches -25 dB");
  }
  fit.seconds = slope_to_seconds(fit.slope_db_per_s);
  return fit;
}

double edt_from_edc(const Edc& curve) {
  if (min_level(curve) > -10.0) throw InsufficientDecayError("EDC never reaches -10 dB");
  return slope_to_seconds(fit_decay_slope(curve, 0.0, -10.0));
}

DirectSplit split_direct(const sim::Rir& rir) {
  const auto& h = rir.h.samples();
  if (!(rir.h.energy() > 0.0)) throw DegenerateError("zero-energy RIR has no direct path");
  const double fs = rir.sample_rate();
  long center = 0;
  if (rir.direct_delay) {
    center = std::lround(*rir.direct_delay * fs);
  } else {
    std::size_t peak = 0;
    for (std::size_t i = 1; i < h.size(); ++i) {
      if (std::abs(h[i]) > std::abs(h[peak])) peak = i;
    }
    center = static_cast<long>(peak);
  }
  const long half = std::lround(kDirectHalfWindow * fs);
  const long n = static_cast<long>(h.size());
  const long lo = std::clamp(center - half, 0L, n);
  const long hi = std::clamp(center + half + 1, 0L, n);
  DirectSplit out;
  for (long i = lo; i < hi; ++i) out.direct += h[i] * h[i];
  for (long i = hi; i < n; ++i) out.reverb += h[i] * h[i];
  out.window_end = static_cast<std::size_t>(hi);
  return out;
}

double drr(const sim::Rir& rir) {
  const DirectSplit s = split_direct(rir);
  if (s.reverb <= 0.0) return kDrrClampDb;
  if (s.direct <= 0.0) return -kDrrClampDb;
  return std::clamp(10.0 * std::log10(s.direct / s.reverb), -kDrrClampDb, kDrrClampDb);
}

RirParameters analyze_rir(const sim::Rir& rir) {
  const Edc curve = edc(rir);
  RirParameters p;
  const DecayFit fit = rt60_from_edc(curve);
  p.rt60 = fit.seconds;
  p.rt60_estimator = fit.estimator;
  p.edt = edt_from_edc(curve);
  p.drr = drr(rir);
  return p;
}

sim::Rir analysis_window(const sim::Rir& rir) {
  sim::Rir out = rir;
  out.h = rir.h.fitted(audio::window_samples(rir.sample_rate()));
  return out;
}

namespace {

template <typename E>
[[noreturn]] void rethrow_as(const E& e, const char* side) {
  throw E(std::string(side) + " RIR: " + e.what());
}

RirParameters analyze_side(const sim::Rir& rir, const char* side) {
  try {
    return analyze_rir(analysis_window(rir));
  } catch (const InsufficientDecayError& e) {
    rethrow_as(e, side);
  } catch (const DegenerateError& e) {
    rethrow_as(e, side);
  }
}

}  // namespace

AcousticReport rir_delta(const sim::Rir& predicted, const sim::Rir& reference) {
  const RirParameters p = analyze_side(predicted, "predicted");
  const RirParameters r = analyze_side(reference, "reference");
  AcousticReport report;
  report.rt60 = p.rt60;
  report.edt = p.edt;
  report.drr = p.drr;
  report.delta_rt60 = std::abs(p.rt60 - r.rt60);
  report.delta_edt = std::abs(p.edt - r.edt);
  report.delta_drr = std::abs(p.drr - r.drr);
  return report;
}

}  // namespace roomflow::metrics
