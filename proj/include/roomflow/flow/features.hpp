#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "roomflow/audio/audio_buffer.hpp"
#include "roomflow/flow/model.hpp"
#include "roomflow/sim/room.hpp"

namespace roomflow::flow {

enum class TaskKind { kDereverb, kRirEstimation };

std::string to_string(TaskKind kind);
// Accepts "dereverb" and "rir"; throws ConfigError otherwise.
TaskKind task_from_string(const std::string& name);

inline constexpr Index kSpeechBands = 64;
inline constexpr Index kSpeechChunks = 8;
inline constexpr Index kSpeechFeatureDim = kSpeechBands * kSpeechChunks;
inline constexpr Index kEdcPoints = 64;
inline constexpr Index kRirFeatureDim = kEdcPoints + 2;

// Chunk-major [chunk][band] mean of the 64-band log-mel over 8 equal spans
// of frames, on the input fitted to 2.56 s. Throws RateError off 16 kHz and
// SilenceError when the window is silent.
VectorXd speech_feature(const audio::AudioBuffer& speech);

// Offset from the EDC onset of sample point j: 2.56·(j/63)² seconds, dense
// early where the curve bends and sparse in the tail.
double edc_point_time(Index j);

// EDC in dB at the 64 edc_point_time offsets, then log10 of the direct-path
// energy and the DRR in dB; computed on the 2.56 s analysis window.
// Throws RateError off 16 kHz and SilenceError for an all-zero response.
VectorXd rir_feature(const sim::Rir& rir);

// Per-dimension standardization fitted on one split.
struct Normalizer {
  VectorXd mean;
  VectorXd scale;  // standard deviation, replaced by 1 when below 1e-8

  // Throws ConfigError on an empty set and ShapeError on ragged vectors.
  static Normalizer fit(const std::vector<VectorXd>& features);
  VectorXd apply(const VectorXd& x) const;
  VectorXd invert(const VectorXd& z) const;
  Index size() const { return mean.size(); }
};

struct DefeaturizedRir {
  sim::Rir rir;
  // The EDC dims increased somewhere and were replaced by their nearest
  // nonincreasing curve.
  bool projected = false;
};

// Nearest nonincreasing sequence in the least-squares sense
// (pool-adjacent-violators).
std::vector<double> nonincreasing_projection(const std::vector<double>& y);

// Noise-carrier RIR matching a rir_feature vector at the metric level:
// a windowed-sinc direct path with the stored energy at the distance it
// implies, followed by Gaussian noise whose energy envelope follows the
// EDC and whose total sets the DRR. Deterministic given seed. Throws
// ShapeError for a wrong-sized or non-finite feature.
DefeaturizedRir defeaturize_rir(const VectorXd& feature, std::uint64_t seed = 0);

}  // namespace roomflow::flow
