#pragma once

#include <filesystem>

#include "roomflow/audio/audio_buffer.hpp"

namespace roomflow::audio {

enum class WavEncoding { kPcm16, kFloat32 };

struct WavInfo {
  int sample_rate = 0;
  int channels = 0;
  WavEncoding encoding = WavEncoding::kPcm16;
  std::size_t frames = 0;
};

// Reads one channel of a RIFF/WAVE file. PCM16 samples are scaled by
// 1/32768; float32 samples are widened unchanged.
AudioBuffer read_wav(const std::filesystem::path& path, int channel = 0);
WavInfo probe_wav(const std::filesystem::path& path);

// pcm16 clips to [-1, 1 - 2^-15] and rounds half away from zero.
// The file is written to a temporary sibling and renamed into place.
void write_wav(const AudioBuffer& buffer, const std::filesystem::path& path,
               WavEncoding encoding = WavEncoding::kFloat32);

}  // namespace roomflow::audio
