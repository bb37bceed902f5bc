#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "roomflow/audio/audio_buffer.hpp"
#include "roomflow/flow/checkpoint.hpp"
#include "roomflow/harness/config.hpp"
#include "roomflow/harness/manifest.hpp"

namespace roomflow::harness {

// Condition and target features of the train split for a task: the
// condition is the reverberant speech feature, the target the clean speech
// feature (dereverb) or the reference RIR feature (rir). Items whose
// features fail (silence) are skipped and listed in skipped.
struct TaskData {
  std::vector<std::string> ids;
  std::vector<flow::VectorXd> conditions;
  std::vector<flow::VectorXd> targets;
  std::vector<std::string> skipped;
};

TaskData task_data(const Manifest& manifest, flow::TaskKind task, Split split, int jobs);

// Fits normalization on the train split only, trains, and returns a
// checkpoint listing the ids it saw. Throws ConfigError when the train split
// yields no usable item.
flow::Checkpoint train_flow(const Manifest& manifest, flow::TaskKind task,
                            const HarnessConfig& config,
                            const flow::ProgressFn& progress = {});

// Throws ConfigError when any test item of the manifest was used to train
// the checkpoint.
void audit_no_test_leak(const Manifest& manifest, const flow::Checkpoint& checkpoint);

// Seed for per-item sampling, independent of evaluation order.
std::uint64_t item_seed(std::uint64_t base, const std::string& id);

// Predicted RIR feature (unnormalized) for reverberant speech.
flow::VectorXd predict_rir_feature(const flow::Checkpoint& checkpoint,
                                   const audio::AudioBuffer& reverberant, int steps,
                                   std::uint64_t seed, double cfg_scale);

// Dereverberation with a dereverb checkpoint: each 2.56 s segment gets its
// clean log-mel feature sampled from the flow, and the per-(chunk, band)
// ratio to the reverberant feature becomes a gain in [-30, 0] dB,
// interpolated over frames and spread onto STFT bins through the mel
// filterbank. Silent segments pass through.
audio::AudioBuffer flow_dereverb(const flow::Checkpoint& checkpoint,
                                 const audio::AudioBuffer& reverberant, int steps,
                                 std::uint64_t seed, double cfg_scale);

}  // namespace roomflow::harness
