#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "roomflow/flow/features.hpp"
#include "roomflow/flow/model.hpp"
#include "roomflow/flow/train.hpp"

namespace roomflow::flow {

inline constexpr int kCheckpointFormatVersion = 1;

// A trained model with everything needed to featurize new inputs the way
// its training data was featurized.
struct Checkpoint {
  TaskKind task = TaskKind::kRirEstimation;
  FlowModel model;
  Normalizer condition_norm;
  Normalizer target_norm;
  FlowTrainConfig train_config;
  std::vector<std::string> train_ids;
  std::vector<double> loss_curve;  // every loss_stride-th step
  long loss_stride = 1;
};

nlohmann::json train_config_json(const FlowTrainConfig& config);

// JSON with format_version, dims, flat parameters and normalization stats.
// Doubles are written with round-trip precision. Atomic write.
void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path);

// Throws IoError when unreadable, FormatError on malformed content or a
// format_version other than kCheckpointFormatVersion, ShapeError when the
// stored parameters or statistics disagree with the stored dims.
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace roomflow::flow
