#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>

#include "roomflow/audio/audio_buffer.hpp"
#include "roomflow/harness/config.hpp"
#include "roomflow/harness/manifest.hpp"

namespace roomflow::harness {

enum class CleanSource { kSynthetic, kWavDir };

struct DatasetRequest {
  std::size_t n_items = 50;
  std::uint64_t seed = 0;
  CleanSource source = CleanSource::kSynthetic;
  std::filesystem::path wav_dir;  // used with kWavDir
  std::filesystem::path out_dir;
};

// Sorted *.wav files of a directory, each checked to be mono 16 kHz.
// Throws ConfigError when there are none and RateError / UnsupportedError
// for a file at another rate or with several channels.
std::vector<std::filesystem::path> list_clean_wavs(const std::filesystem::path& dir);

// Samples n rooms, simulates their RIRs, draws one clean utterance per item
// (synthetic or a seeded 2.56 s crop of a WAV), and writes
//   rir/<id>.wav, clean/<id>.wav, reverberant/<id>.wav, items/<id>.json
// plus manifest.json under out_dir. Audio is float32; the reverberant file
// is convolve(clean, rir) as stored, truncated to the clean length. Items
// are independent given (seed, index), so the output bytes do not depend on
// jobs. Throws ConfigError for n == 0 or an unusable wav_dir.
Manifest build_dataset(const DatasetRequest& request, const HarnessConfig& config);

// Central n-sample segment, zero-padded when shorter.
audio::AudioBuffer central_segment(const audio::AudioBuffer& x, std::size_t n);

}  // namespace roomflow::harness
