#include "roomflow/flow/features.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "roomflow/audio/mel.hpp"
#include "roomflow/errors.hpp"
#include "roomflow/metrics/edc.hpp"
#include "roomflow/metrics/rir_params.hpp"
#include "roomflow/random.hpp"
#include "roomflow/sim/image_source.hpp"

namespace roomflow::flow {

namespace {

constexpr double kSilenceRms = 1e-6;
constexpr double kMinLogDirect = -12.0;
constexpr double kMaxLogDirect = 2.0;

void require_rate(int sample_rate) {
  if (sample_rate != audio::kDefaultSampleRate) {
    throw RateError("features need 16000 Hz input, got " + std::to_string(sample_rate));
  }
}

// EDC value at a fractional knot position u in [0, 63]; past the last knot
// the curve is held.
double knot_interp(const VectorXd& knots, double u) {
  if (u >= static_cast<double>(kEdcPoints - 1)) return knots[kEdcPoints - 1];
  const auto j = static_cast<Index>(u);
  const double f = u - static_cast<double>(j);
  return (1.0 - f) * knots[j] + f * knots[j + 1];
}

}  // namespace

std::string to_string(TaskKind kind) {
  return kind == TaskKind::kDereverb ? "dereverb" : "rir";
}

TaskKind task_from_string(const std::string& name) {
  if (name == "dereverb") return TaskKind::kDereverb;
  if (name == "rir") return TaskKind::kRirEstimation;
  throw ConfigError("unknown flow task '" + name + "' (expected dereverb or rir)");
}

VectorXd speech_feature(const audio::AudioBuffer& speech) {
  require_rate(speech.sample_rate());
  const audio::AudioBuffer window = speech.fitted(audio::window_samples(speech.sample_rate()));
  if (window.rms() < kSilenceRms) throw SilenceError("speech window is silent");
  audio::MelConfig config;
  config.n_mels = static_cast<std::size_t>(kSpeechBands);
  const audio::MelFeature mel = audio::logmel(window, config);
  const std::size_t frames = mel.n_frames;
  VectorXd out(kSpeechFeatureDim);
  for (Index c = 0; c < kSpeechChunks; ++c) {
    const std::size_t lo = frames * static_cast<std::size_t>(c) / kSpeechChunks;
    const std::size_t hi = frames * static_cast<std::size_t>(c + 1) / kSpeechChunks;
    for (Index b = 0; b < kSpeechBands; ++b) {
      double sum = 0.0;
      for (std::size_t t = lo; t < hi; ++t) sum += mel.at(t, static_cast<std::size_t>(b));
      out[c * kSpeechBands + b] = sum / static_cast<double>(hi - lo);
    }
  }
  return out;
}

double edc_point_time(Index j) {
  const double u = static_cast<double>(j) / static_cast<double>(kEdcPoints - 1);
  return audio::kWindowSeconds * u * u;
}

VectorXd rir_feature(const sim::Rir& rir) {
  require_rate(rir.sample_rate());
  const sim::Rir window = metrics::analysis_window(rir);
  if (!(window.h.energy() > 0.0)) throw SilenceError("RIR window has no energy");
  const metrics::Edc curve = metrics::edc(window);
  const double fs = curve.sample_rate;
  const auto& v = curve.values_db;
  VectorXd out(kRirFeatureDim);
  for (Index j = 0; j < kEdcPoints; ++j) {
    const double pos = edc_point_time(j) * fs;
    const auto i = static_cast<std::size_t>(pos);
    if (i + 1 >= v.size()) {
      out[j] = v.back();
    } else {
      const double f = pos - static_cast<double>(i);
      out[j] = (1.0 - f) * v[i] + f * v[i + 1];
    }
  }
  const metrics::DirectSplit split = metrics::split_direct(window);
  out[kEdcPoints] = std::clamp(std::log10(std::max(split.direct, 1e-300)), kMinLogDirect,
                               kMaxLogDirect);
  out[kEdcPoints + 1] = metrics::drr(window);
  return out;
}

Normalizer Normalizer::fit(const std::vector<VectorXd>& features) {
  if (features.empty()) throw ConfigError("cannot fit normalization on an empty set");
  const Index d = features.front().size();
  Normalizer n;
  n.mean = VectorXd::Zero(d);
  for (const auto& f : features) {
    if (f.size() != d) throw ShapeError("features differ in size");
    n.mean += f;
  }
  n.mean /= static_cast<double>(features.size());
  VectorXd var = VectorXd::Zero(d);
  for (const auto& f : features) var += (f - n.mean).cwiseAbs2();
  var /= static_cast<double>(features.size());
  n.scale = var.cwiseSqrt();
  for (Index i = 0; i < d; ++i) {
    if (!(n.scale[i] >= 1e-8)) n.scale[i] = 1.0;
  }
  return n;
}

VectorXd Normalizer::apply(const VectorXd& x) const {
  if (x.size() != mean.size()) throw ShapeError("feature size differs from normalizer");
  return (x - mean).cwiseQuotient(scale);
}

VectorXd Normalizer::invert(const VectorXd& z) const {
  if (z.size() != mean.size()) throw ShapeError("feature size differs from normalizer");
  return z.cwiseProduct(scale) + mean;
}

std::vector<double> nonincreasing_projection(const std::vector<double>& y) {
  // Blocks of pooled values; each block mean must not exceed its predecessor.
  std::vector<double> mean;
  std::vector<std::size_t> count;
  for (double v : y) {
    mean.push_back(v);
    count.push_back(1);
    while (mean.size() > 1 && mean[mean.size() - 2] < mean.back()) {
      const std::size_t n = count.back() + count[count.size() - 2];
      const double m = (mean.back() * count.back() +
                        mean[mean.size() - 2] * count[count.size() - 2]) / n;
      mean.pop_back();
      count.pop_back();
      mean.back() = m;
      count.back() = n;
    }
  }
  std::vector<double> out;
  out.reserve(y.size());
  for (std::size_t b = 0; b < mean.size(); ++b) out.insert(out.end(), count[b], mean[b]);
  return out;
}

DefeaturizedRir defeaturize_rir(const VectorXd& feature, std::uint64_t seed) {
  if (feature.size() != kRirFeatureDim) {
    throw ShapeError("RIR feature needs " + std::to_string(kRirFeatureDim) + " values, got " +
                     std::to_string(feature.size()));
  }
  if (!feature.allFinite()) throw ShapeError("RIR feature is not finite");
  DefeaturizedRir out;

  std::vector<double> raw(feature.data(), feature.data() + kEdcPoints);
  const std::vector<double> mono = nonincreasing_projection(raw);
  for (Index j = 0; j < kEdcPoints; ++j) {
    if (std::abs(mono[j] - raw[j]) > 1e-9) out.projected = true;
  }
  VectorXd knots(kEdcPoints);
  for (Index j = 0; j < kEdcPoints; ++j) knots[j] = std::clamp(mono[j], metrics::kEdcFloorDb, 0.0);
  knots[0] = 0.0;

  const int fs = audio::kDefaultSampleRate;
  const std::size_t n = audio::window_samples(fs);
  const double direct_energy =
      std::pow(10.0, std::clamp(feature[kEdcPoints], kMinLogDirect, kMaxLogDirect));
  const double target_drr = feature[kEdcPoints + 1];

  // Free-field amplitude 1/(4πd) fixes the source distance and so the delay.
  const double distance =
      std::clamp(1.0 / (4.0 * std::numbers::pi * std::sqrt(direct_energy)), 0.1, 50.0);
  const double half = sim::kFractionalDelayTaps / 2;
  const double delay = std::max(distance / 343.0 * fs, half + 1.0);
  const auto center = static_cast<std::size_t>(std::lround(delay));

  std::vector<double> h(n, 0.0);
  sim::add_fractional_impulse(h, delay, 1.0);
  sim::Rir rir{audio::AudioBuffer(h, fs), std::nullopt, delay / fs};
  const metrics::DirectSplit unit = metrics::split_direct(rir);
  const double amp = std::sqrt(direct_energy / unit.direct);
  for (double& x : h) x *= amp;

  const std::size_t start = unit.window_end;
  std::vector<double> tail(n, 0.0);
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto remaining = [&](std::size_t i) {
    const double tau = static_cast<double>(i - center) / fs;
    const double u = (kEdcPoints - 1) * std::sqrt(tau / audio::kWindowSeconds);
    return std::pow(10.0, knot_interp(knots, u) / 10.0);
  };
  double tail_energy = 0.0;
  double s_prev = start < n ? remaining(start) : 0.0;
  for (std::size_t i = start; i < n; ++i) {
    const double s_next = remaining(i + 1);
    const double e = std::max(s_prev - s_next, 0.0);
    s_prev = s_next;
    tail[i] = std::sqrt(e) * normal(rng);
    tail_energy += tail[i] * tail[i];
  }
  if (tail_energy > 0.0) {
    const double want = direct_energy / std::pow(10.0, target_drr / 10.0);
    const double g = std::sqrt(want / tail_energy);
    for (std::size_t i = start; i < n; ++i) h[i] += g * tail[i];
  }
  out.rir = sim::Rir{audio::AudioBuffer(std::move(h), fs), std::nullopt, delay / fs};
  return out;
}

}  // namespace roomflow::flow
