#include "roomflow/harness/dataset.hpp"

#include <algorithm>
#include <cstdio>
#include <optional>
#include <random>

#include "roomflow/audio/convolve.hpp"
#include "roomflow/audio/wav.hpp"
#include "roomflow/errors.hpp"
#include "roomflow/io.hpp"
#include "roomflow/parallel.hpp"
#include "roomflow/random.hpp"
#include "roomflow/sim/image_source.hpp"

namespace roomflow::harness {

namespace {

namespace fs = std::filesystem;

// Stream tags keep clean-audio draws independent of room draws.
constexpr std::uint64_t kCleanStream = 0xC1EA;

audio::AudioBuffer as_float32(const audio::AudioBuffer& x) {
  std::vector<double> v(x.samples().begin(), x.samples().end());
  for (double& s : v) s = static_cast<double>(static_cast<float>(s));
  return {std::move(v), x.sample_rate()};
}

std::string item_id(std::size_t index, std::size_t n) {
  const int width = std::max(4, static_cast<int>(std::to_string(n - 1).size()));
  char buf[32];
  std::snprintf(buf, sizeof buf, "item_%0*zu", width, index);
  return buf;
}

}  // namespace

audio::AudioBuffer central_segment(const audio::AudioBuffer& x, std::size_t n) {
  if (x.size() <= n) return x.fitted(n);
  return x.slice((x.size() - n) / 2, n);
}

std::vector<fs::path> list_clean_wavs(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw ConfigError("clean wav dir " + dir.string() + " not found");
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    auto ext = e.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (e.is_regular_file() && ext == ".wav") files.push_back(e.path());
  }
  if (files.empty()) throw ConfigError("clean wav dir " + dir.string() + " has no .wav files");
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    const audio::WavInfo info = audio::probe_wav(f);
    if (info.sample_rate != audio::kDefaultSampleRate) {
      throw RateError(f.string() + " is " + std::to_string(info.sample_rate) +
                      " Hz; resample to 16000 Hz first");
    }
    if (info.channels != 1) throw UnsupportedError(f.string() + " is not mono");
  }
  return files;
}

Manifest build_dataset(const DatasetRequest& req, const HarnessConfig& config) {
  if (req.n_items == 0) throw ConfigError("dataset needs at least one item");
  validate(config);
  std::vector<fs::path> wavs;
  if (req.source == CleanSource::kWavDir) wavs = list_clean_wavs(req.wav_dir);

  for (const char* sub : {"rir", "clean", "reverberant", "items"}) {
    std::error_code ec;
    fs::create_directories(req.out_dir / sub, ec);
    if (ec) throw IoError("cannot create " + (req.out_dir / sub).string() + ": " + ec.message());
  }

  const int fs_hz = config.corpus.sample_rate;
  const std::size_t window = audio::window_samples(fs_hz);
  std::vector<std::string> ids(req.n_items);
  for (std::size_t i = 0; i < req.n_items; ++i) ids[i] = item_id(i, req.n_items);
  const std::vector<Split> splits = assign_splits(ids, req.seed, config.eval.test_fraction);

  Manifest manifest;
  manifest.seed = req.seed;
  manifest.clean_source = req.source == CleanSource::kSynthetic ? "synthetic" : "wav-dir";
  manifest.root = req.out_dir;
  manifest.items.resize(req.n_items);

  parallel_for(req.n_items, config.jobs, [&](std::size_t i) {
    ManifestItem& item = manifest.items[i];
    item.id = ids[i];
    item.split = splits[i];
    item.room = sim::sample_room(req.seed, i, config.corpus);
    sim::Rir rir = sim::simulate_rir(item.room, config.corpus.simulation);
    rir.h = as_float32(rir.h);

    const std::uint64_t clean_seed = derive_seed(derive_seed(req.seed, kCleanStream), i);
    audio::AudioBuffer clean;
    if (req.source == CleanSource::kSynthetic) {
      clean = synth_speech(clean_seed, config.speech);
      item.clean_origin = "synthetic:" + std::to_string(clean_seed);
    } else {
      Rng rng(clean_seed);
      const fs::path& src = wavs[rng() % wavs.size()];
      const audio::AudioBuffer full = audio::read_wav(src);
      std::size_t start = 0;
      if (full.size() > window) start = rng() % (full.size() - window + 1);
      clean = full.slice(start, window);
      item.clean_origin = src.filename().string() + "@" + std::to_string(start);
    }
    clean = as_float32(clean);
    const audio::AudioBuffer reverberant =
        audio::convolve(clean, rir.h).fitted(clean.size());

    try {
      item.oracle = metrics::analyze_rir(metrics::analysis_window(rir));
    } catch (const Error&) {
      item.oracle.reset();  // undecayed RIRs stay in the corpus without oracle values
    }
    item.rir_path = "rir/" + item.id + ".wav";
    item.clean_path = "clean/" + item.id + ".wav";
    item.reverberant_path = "reverberant/" + item.id + ".wav";
    audio::write_wav(rir.h, req.out_dir / item.rir_path);
    audio::write_wav(clean, req.out_dir / item.clean_path);
    audio::write_wav(reverberant, req.out_dir / item.reverberant_path);

    Manifest single;
    single.seed = req.seed;
    single.clean_source = manifest.clean_source;
    single.items = {item};
    nlohmann::json sidecar = to_json(single)["items"][0];
    sidecar["seed"] = req.seed;
    sidecar["index"] = i;
    write_file_atomic(req.out_dir / "items" / (item.id + ".json"), sidecar.dump(2) + "\n");
  });

  save_manifest(manifest, req.out_dir / "manifest.json");
  return manifest;
}

}  // namespace roomflow::harness
