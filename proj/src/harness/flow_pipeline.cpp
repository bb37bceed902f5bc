#include "roomflow/harness/flow_pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "roomflow/audio/mel.hpp"
#include "roomflow/audio/stft.hpp"
#include "roomflow/audio/wav.hpp"
#include "roomflow/errors.hpp"
#include "roomflow/flow/sample.hpp"
#include "roomflow/harness/dataset.hpp"
#include "roomflow/parallel.hpp"
#include "roomflow/random.hpp"

namespace roomflow::harness {

namespace {

constexpr double kMinGainDb = -30.0;

}  // namespace

TaskData task_data(const Manifest& manifest, flow::TaskKind task, Split split, int jobs) {
  const auto items = manifest.select(split);
  const std::size_t window = audio::window_samples(audio::kDefaultSampleRate);
  std::vector<std::optional<std::pair<flow::VectorXd, flow::VectorXd>>> slots(items.size());
  parallel_for(items.size(), jobs, [&](std::size_t i) {
    const ManifestItem& item = *items[i];
    try {
      const auto rev = central_segment(audio::read_wav(manifest.resolve(item.reverberant_path)), window);
      flow::VectorXd target;
      if (task == flow::TaskKind::kDereverb) {
        target = flow::speech_feature(
            central_segment(audio::read_wav(manifest.resolve(item.clean_path)), window));
      } else {
        target = flow::rir_feature(load_item_rir(manifest, item));
      }
      slots[i] = std::make_pair(flow::speech_feature(rev), std::move(target));
    } catch (const SilenceError&) {
      slots[i].reset();
    }
  });
  TaskData out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (!slots[i]) {
      out.skipped.push_back(items[i]->id);
      continue;
    }
    out.ids.push_back(items[i]->id);
    out.conditions.push_back(std::move(slots[i]->first));
    out.targets.push_back(std::move(slots[i]->second));
  }
  return out;
}

flow::Checkpoint train_flow(const Manifest& manifest, flow::TaskKind task,
                            const HarnessConfig& config, const flow::ProgressFn& progress) {
  const TaskData data = task_data(manifest, task, Split::kTrain, config.jobs);
  if (data.ids.empty()) throw ConfigError("the train split has no usable item");
  flow::Checkpoint ck;
  ck.task = task;
  ck.condition_norm = flow::Normalizer::fit(data.conditions);
  ck.target_norm = flow::Normalizer::fit(data.targets);
  std::vector<flow::FlowPair> pairs;
  pairs.reserve(data.ids.size());
  for (std::size_t i = 0; i < data.ids.size(); ++i) {
    pairs.push_back({ck.condition_norm.apply(data.conditions[i]),
                     ck.target_norm.apply(data.targets[i])});
  }
  ck.train_config = config.flow.train;
  flow::TrainResult result = flow::train(pairs, config.flow.train, progress);
  ck.model = std::move(result.model);
  ck.train_ids = data.ids;
  ck.loss_stride = std::max<long>(1, config.flow.train.steps / 1000);
  for (std::size_t s = 0; s < result.loss_curve.size(); s += static_cast<std::size_t>(ck.loss_stride)) {
    ck.loss_curve.push_back(result.loss_curve[s]);
  }
  return ck;
}

void audit_no_test_leak(const Manifest& manifest, const flow::Checkpoint& checkpoint) {
  const std::set<std::string> trained(checkpoint.train_ids.begin(), checkpoint.train_ids.end());
  for (const ManifestItem* item : manifest.select(Split::kTest)) {
    if (trained.count(item->id)) {
      throw ConfigError("checkpoint was trained on test item '" + item->id + "'");
    }
  }
}

std::uint64_t item_seed(std::uint64_t base, const std::string& id) {
  return mix_seed(mix_seed(base) ^ stable_hash(id));
}

flow::VectorXd predict_rir_feature(const flow::Checkpoint& ck,
                                   const audio::AudioBuffer& reverberant, int steps,
                                   std::uint64_t seed, double cfg_scale) {
  if (ck.task != flow::TaskKind::kRirEstimation) {
    throw ConfigError("checkpoint was trained for " + flow::to_string(ck.task) + ", not rir");
  }
  const auto segment = central_segment(reverberant, audio::window_samples(reverberant.sample_rate()));
  const flow::VectorXd c = ck.condition_norm.apply(flow::speech_feature(segment));
  return ck.target_norm.invert(flow::sample(ck.model, c, steps, seed, cfg_scale));
}

audio::AudioBuffer flow_dereverb(const flow::Checkpoint& ck,
                                 const audio::AudioBuffer& reverberant, int steps,
                                 std::uint64_t seed, double cfg_scale) {
  if (ck.task != flow::TaskKind::kDereverb) {
    throw ConfigError("checkpoint was trained for " + flow::to_string(ck.task) + ", not dereverb");
  }
  if (reverberant.sample_rate() != audio::kDefaultSampleRate) {
    throw RateError("flow dereverberation needs 16000 Hz input");
  }
  const std::size_t window = audio::window_samples(reverberant.sample_rate());
  const audio::StftConfig stft_config;
  const std::size_t n_bins = stft_config.fft_size / 2 + 1;
  const auto nb = static_cast<std::size_t>(flow::kSpeechBands);
  const auto nc = static_cast<std::size_t>(flow::kSpeechChunks);
  const std::vector<double> fb = audio::mel_filterbank(nb, 0.0, 8000.0, stft_config.fft_size,
                                                       reverberant.sample_rate());
  std::vector<double> fb_sum(n_bins, 0.0);
  for (std::size_t b = 0; b < nb; ++b) {
    for (std::size_t k = 0; k < n_bins; ++k) fb_sum[k] += fb[b * n_bins + k];
  }
  const double min_gain = std::pow(10.0, kMinGainDb / 20.0);

  std::vector<double> out(reverberant.size(), 0.0);
  std::size_t segment_index = 0;
  for (std::size_t off = 0; off < reverberant.size(); off += window, ++segment_index) {
    const audio::AudioBuffer seg = reverberant.slice(off, window);
    const std::size_t keep = std::min(window, reverberant.size() - off);
    flow::VectorXd rev;
    try {
      rev = flow::speech_feature(seg);
    } catch (const SilenceError&) {
      std::copy_n(seg.samples().begin(), keep, out.begin() + static_cast<long>(off));
      continue;
    }
    const flow::VectorXd pred = ck.target_norm.invert(flow::sample(
        ck.model, ck.condition_norm.apply(rev), steps, derive_seed(seed, segment_index), cfg_scale));
    // Log-mel is natural-log power, so half the difference is a log amplitude gain.
    std::vector<double> gain(nc * nb);
    for (std::size_t i = 0; i < gain.size(); ++i) {
      const auto j = static_cast<flow::Index>(i);
      gain[i] = std::clamp(std::exp(0.5 * (pred[j] - rev[j])), min_gain, 1.0);
    }
    audio::Spectrogram spec = audio::stft(seg, stft_config);
    const std::size_t frames = spec.n_frames;
    std::vector<double> centers(nc);
    for (std::size_t c = 0; c < nc; ++c) {
      const std::size_t lo = frames * c / nc;
      const std::size_t hi = frames * (c + 1) / nc;
      centers[c] = 0.5 * static_cast<double>(lo + hi - 1);
    }
    std::vector<double> band_gain(nb);
    for (std::size_t t = 0; t < frames; ++t) {
      const double ft = static_cast<double>(t);
      std::size_t c1 = 0;
      while (c1 + 1 < nc && centers[c1 + 1] <= ft) ++c1;
      const std::size_t c2 = std::min(c1 + 1, nc - 1);
      double w = 0.0;
      if (c2 != c1) w = std::clamp((ft - centers[c1]) / (centers[c2] - centers[c1]), 0.0, 1.0);
      for (std::size_t b = 0; b < nb; ++b) {
        band_gain[b] = (1.0 - w) * gain[c1 * nb + b] + w * gain[c2 * nb + b];
      }
      for (std::size_t k = 0; k < n_bins; ++k) {
        if (fb_sum[k] <= 0.0) continue;
        double g = 0.0;
        for (std::size_t b = 0; b < nb; ++b) g += fb[b * n_bins + k] * band_gain[b];
        spec.at(t, k) *= g / fb_sum[k];
      }
    }
    const audio::AudioBuffer y = audio::istft(spec);
    std::copy_n(y.samples().begin(), keep, out.begin() + static_cast<long>(off));
  }
  return {std::move(out), reverberant.sample_rate()};
}

}  // namespace roomflow::harness
