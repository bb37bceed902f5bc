#include "roomflow/metrics/edc.hpp"

#include <algorithm>
#include <cmath>

#include "roomflow/errors.hpp"

namespace roomflow::metrics {

std::size_t onset_index(std::span<const double> h) {
  double peak = 0.0;
  for (double v : h) peak = std::max(peak, std::abs(v));
  if (peak == 0.0) return 0;
  const double threshold = 0.1 * peak;
  for (std::size_t i = 0; i < h.size(); ++i) {
    if (std::abs(h[i]) >= threshold) return i;
  }
  return 0;
}

Edc edc_from(std::span<const double> h, int sample_rate, std::size_t start) {
  if (start >= h.size()) throw DegenerateError("EDC start past end of response");
  const std::size_t n = h.size() - start;
  // Backward cumulative energy; long double keeps the deep tail accurate.
  std::vector<long double> tail(n);
  long double acc = 0.0L;
  for (std::size_t i = n; i-- > 0;) {
    const long double v = h[start + i];
    acc += v * v;
    tail[i] = acc;
  }
  const long double total = tail[0];
  if (!(total > 0.0L)) throw DegenerateError("zero-energy response has no decay curve");
  Edc out;
  out.sample_rate = sample_rate;
  out.t0 = static_cast<double>(start) / sample_rate;
  out.values_db.resize(n);
  double running = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double db = kEdcFloorDb;
    if (tail[i] > 0.0L) {
      db = std::max(kEdcFloorDb, static_cast<double>(10.0L * std::log10(tail[i] / total)));
    }
    running = i == 0 ? db : std::min(running, db);
    out.values_db[i] = running;
  }
  out.values_db[0] = 0.0;
  return out;
}

Edc edc(const audio::AudioBuffer& h) {
  if (h.energy() <= 0.0) throw DegenerateError("zero-energy response has no decay curve");
  return edc_from(h.view(), h.sample_rate(), onset_index(h.view()));
}

Edc edc(const sim::Rir& rir) { return edc(rir.h); }

}  // namespace roomflow::metrics
