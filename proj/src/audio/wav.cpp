#include "roomflow/audio/wav.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "roomflow/errors.hpp"
#include "roomflow/io.hpp"

namespace roomflow::audio {
namespace {

static_assert(std::endian::native == std::endian::little,
              "WAV I/O assumes a little-endian host");

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

template <typename T>
T load(const std::uint8_t* p) {
  T v;
  std::memcpy(&v, p, sizeof(T));
  return v;
}

template <typename T>
void store(std::vector<std::uint8_t>& out, T v) {
  std::uint8_t bytes[sizeof(T)];
  std::memcpy(bytes, &v, sizeof(T));
  out.insert(out.end(), bytes, bytes + sizeof(T));
}

void store_tag(std::vector<std::uint8_t>& out, const char* tag) {
  out.insert(out.end(), tag, tag + 4);
}

struct Parsed {
  WavInfo info;
  const std::uint8_t* data = nullptr;
  std::size_t data_bytes = 0;
};

std::vector<std::uint8_t> slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), {});
}

Parsed parse(const std::vector<std::uint8_t>& bytes, const std::string& name) {
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    throw FormatError(name + ": not a RIFF/WAVE file");
  }
  Parsed parsed;
  bool have_fmt = false;
  std::uint16_t format = 0;
  std::uint16_t bits = 0;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::uint8_t* chunk = bytes.data() + pos;
    const std::uint32_t size = load<std::uint32_t>(chunk + 4);
    const std::size_t body = pos + 8;
    if (body + size > bytes.size()) {
      // Some writers leave a bogus data size on streamed files; clamp it.
      if (std::memcmp(chunk, "data", 4) != 0) {
        throw FormatError(name + ": truncated chunk");
      }
    }
    const std::size_t avail = std::min<std::size_t>(size, bytes.size() - body);
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (avail < 16) throw FormatError(name + ": short fmt chunk");
      format = load<std::uint16_t>(bytes.data() + body);
      parsed.info.channels = load<std::uint16_t>(bytes.data() + body + 2);
      parsed.info.sample_rate =
          static_cast<int>(load<std::uint32_t>(bytes.data() + body + 4));
      bits = load<std::uint16_t>(bytes.data() + body + 14);
      if (format == kFormatExtensible) {
        if (avail < 26) throw FormatError(name + ": short extensible fmt");
        format = load<std::uint16_t>(bytes.data() + body + 24);
      }
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      parsed.data = bytes.data() + body;
      parsed.data_bytes = avail;
    }
    pos = body + size + (size & 1u);
  }
  if (!have_fmt || parsed.data == nullptr) {
    throw FormatError(name + ": missing fmt or data chunk");
  }
  if (parsed.info.channels < 1 || parsed.info.sample_rate <= 0) {
    throw FormatError(name + ": invalid channel count or sample rate");
  }
  if (format == kFormatPcm && bits == 16) {
    parsed.info.encoding = WavEncoding::kPcm16;
  } else if (format == kFormatFloat && bits == 32) {
    parsed.info.encoding = WavEncoding::kFloat32;
  } else {
    throw UnsupportedError(name + ": unsupported encoding (format tag " +
                           std::to_string(format) + ", " +
                           std::to_string(bits) + " bits)");
  }
  const std::size_t frame_bytes =
      static_cast<std::size_t>(parsed.info.channels) * (bits / 8);
  parsed.info.frames = parsed.data_bytes / frame_bytes;
  return parsed;
}

}  // namespace

WavInfo probe_wav(const std::filesystem::path& path) {
  const auto bytes = slurp(path);
  return parse(bytes, path.string()).info;
}

AudioBuffer read_wav(const std::filesystem::path& path, int channel) {
  const auto bytes = slurp(path);
  const Parsed parsed = parse(bytes, path.string());
  const WavInfo& info = parsed.info;
  if (channel < 0 || channel >= info.channels) {
    throw ConfigError(path.string() + ": channel " + std::to_string(channel) +
                      " out of range (file has " +
                      std::to_string(info.channels) + ")");
  }
  std::vector<double> samples(info.frames);
  if (info.encoding == WavEncoding::kPcm16) {
    const std::size_t stride = 2 * static_cast<std::size_t>(info.channels);
    for (std::size_t i = 0; i < info.frames; ++i) {
      const auto v = load<std::int16_t>(parsed.data + i * stride + 2 * channel);
      samples[i] = static_cast<double>(v) / 32768.0;
    }
  } else {
    const std::size_t stride = 4 * static_cast<std::size_t>(info.channels);
    for (std::size_t i = 0; i < info.frames; ++i) {
      const auto v = load<float>(parsed.data + i * stride + 4 * channel);
      if (!std::isfinite(v)) {
        throw FormatError(path.string() + ": non-finite float sample");
      }
      samples[i] = static_cast<double>(v);
    }
  }
  return AudioBuffer(std::move(samples), info.sample_rate);
}

void write_wav(const AudioBuffer& buffer, const std::filesystem::path& path,
               WavEncoding encoding) {
  const bool pcm = encoding == WavEncoding::kPcm16;
  const std::uint16_t bits = pcm ? 16 : 32;
  const std::uint16_t block_align = bits / 8;
  const auto data_bytes =
      static_cast<std::uint32_t>(buffer.size() * block_align);

  std::vector<std::uint8_t> out;
  out.reserve(44 + data_bytes);
  store_tag(out, "RIFF");
  store<std::uint32_t>(out, 36 + data_bytes);
  store_tag(out, "WAVE");
  store_tag(out, "fmt ");
  store<std::uint32_t>(out, 16);
  store<std::uint16_t>(out, pcm ? kFormatPcm : kFormatFloat);
  store<std::uint16_t>(out, 1);
  store<std::uint32_t>(out, static_cast<std::uint32_t>(buffer.sample_rate()));
  store<std::uint32_t>(
      out, static_cast<std::uint32_t>(buffer.sample_rate()) * block_align);
  store<std::uint16_t>(out, block_align);
  store<std::uint16_t>(out, bits);
  store_tag(out, "data");
  store<std::uint32_t>(out, data_bytes);
  constexpr double kMaxPcm = 1.0 - 1.0 / 32768.0;
  for (double s : buffer.samples()) {
    if (pcm) {
      const double clipped = std::clamp(s, -1.0, kMaxPcm);
      store<std::int16_t>(out,
                          static_cast<std::int16_t>(std::round(clipped * 32768.0)));
    } else {
      store<float>(out, static_cast<float>(s));
    }
  }

  write_file_atomic(path, std::string_view(reinterpret_cast<const char*>(out.data()), out.size()));
}

}  // namespace roomflow::audio
