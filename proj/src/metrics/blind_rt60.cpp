#include "roomflow/metrics/blind_rt60.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "roomflow/audio/mel.hpp"
#include "roomflow/errors.hpp"

namespace roomflow::metrics {
namespace {

void check_input(const audio::AudioBuffer& speech, const BlindRt60Config& config) {
  if (speech.rms() < config.silence_rms) throw SilenceError("blind RT60 input is silent");
  if (speech.duration() < config.min_seconds) {
    throw LengthError("blind RT60 needs at least " + std::to_string(config.min_seconds) +
                      " s of audio");
  }
}

double median(std::vector<double> v) {
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<long>(mid), v.end());
  double m = v[mid];
  if (v.size() % 2 == 0) {
    m = 0.5 * (m + *std::max_element(v.begin(), v.begin() + static_cast<long>(mid)));
  }
  return m;
}

double fit_slope(const std::vector<double>& y, std::size_t begin, std::size_t end) {
  const double n = static_cast<double>(end - begin);
  double mt = 0.0;
  double my = 0.0;
  for (std::size_t i = begin; i < end; ++i) {
    mt += static_cast<double>(i);
    my += y[i];
  }
  mt /= n;
  my /= n;
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = begin; i < end; ++i) {
    const double dt = static_cast<double>(i) - mt;
    sxy += dt * (y[i] - my);
    sxx += dt * dt;
  }
  return sxy / sxx;
}

}  // namespace

std::vector<DecaySegment> find_decay_segments(const audio::AudioBuffer& speech,
                                              const BlindRt60Config& config) {
  check_input(speech, config);
  audio::MelConfig mel;
  mel.n_mels = config.n_bands;
  mel.fmin = config.fmin;
  mel.fmax = std::min(config.fmax, speech.sample_rate() / 2.0);
  mel.log_floor = 1e-30;
  mel.stft = config.stft;
  const audio::MelFeature feat = audio::logmel(speech, mel);
  const double frames_per_s =
      static_cast<double>(speech.sample_rate()) / static_cast<double>(config.stft.hop);
  const double to_db = 10.0 / std::log(10.0);

  std::vector<DecaySegment> segments;
  const std::size_t T = feat.n_frames;
  const std::size_t half = config.smooth_frames / 2;
  std::vector<double> level(T);
  for (std::size_t b = 0; b < feat.n_mels; ++b) {
    for (std::size_t t = 0; t < T; ++t) {
      const std::size_t lo = t >= half ? t - half : 0;
      const std::size_t hi = std::min(T, t + half + 1);
      double acc = 0.0;
      for (std::size_t u = lo; u < hi; ++u) acc += feat.at(u, b);
      level[t] = to_db * acc / static_cast<double>(hi - lo);
    }
    const double peak = *std::max_element(level.begin(), level.end());
    const double floor = peak - config.dynamic_range_db;
    std::size_t t = 0;
    while (t + 1 < T) {
      if (!(level[t + 1] < level[t]) || level[t] < floor) {
        ++t;
        continue;
      }
      std::size_t end = t + 1;
      while (end + 1 < T && level[end + 1] < level[end] && level[end + 1] >= floor) ++end;
      const std::size_t frames = end - t + 1;
      if (frames >= config.min_frames && level[t] - level[end] >= config.min_drop_db) {
        const double slope = fit_slope(level, t, end + 1) * frames_per_s;
        if (slope < 0.0 && -60.0 / slope <= config.max_rt60) {
          segments.push_back({b, t, frames, slope});
        }
      }
      t = end;
    }
  }
  return segments;
}

double blind_rt60(const audio::AudioBuffer& speech, const BlindRt60Config& config) {
  const auto segments = find_decay_segments(speech, config);
  if (segments.empty()) throw EstimationError("no free-decay segments detected");
  std::vector<double> rates;
  rates.reserve(segments.size());
  for (const auto& s : segments) rates.push_back(s.slope_db_per_s);
  return -60.0 / median(std::move(rates));
}

double rte(const audio::AudioBuffer& output, const audio::AudioBuffer& reference,
           const BlindRt60Config& config) {
  return std::abs(blind_rt60(output, config) - blind_rt60(reference, config));
}

}  // namespace roomflow::metrics
