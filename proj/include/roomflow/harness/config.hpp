#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "roomflow/audio/stft.hpp"
#include "roomflow/flow/train.hpp"
#include "roomflow/harness/speech_synth.hpp"
#include "roomflow/metrics/blind_rt60.hpp"
#include "roomflow/metrics/srmr.hpp"
#include "roomflow/sim/corpus.hpp"
#include "roomflow/wpe/wpe.hpp"

namespace roomflow::harness {

struct FlowSettings {
  flow::FlowTrainConfig train;
  int sample_steps = 32;
  double cfg_scale = 1.0;
  std::uint64_t sample_seed = 0;
};

struct EvalSettings {
  // Extra cfg scales reported by the RIR evaluation next to cfg_scale.
  std::vector<double> cfg_sweep{3.0};
  double test_fraction = 0.2;
};

// Every tunable default of the pipeline in one place. The INI form has one
// section per struct member below and one key per field.
struct HarnessConfig {
  std::uint64_t seed = 0;
  int jobs = 1;
  sim::CorpusConfig corpus;
  SpeechSynthConfig speech;
  wpe::WpeConfig wpe;
  metrics::BlindRt60Config blind_rt60;
  metrics::SrmrConfig srmr;
  FlowSettings flow;
  EvalSettings eval;
};

// Overlays the keys found in an INI file onto config. Throws IoError when
// the file is unreadable and ConfigError on syntax errors, unknown sections
// or keys, and values that do not parse or break an invariant.
void load_config_file(const std::filesystem::path& path, HarnessConfig& config);

// Applies one "section.key=value" assignment with the INI key names. Throws
// ConfigError for unknown keys or unparsable values; validate() is left to
// the caller so several overrides can be applied first.
void set_config_value(HarnessConfig& config, const std::string& assignment);

// Checks the cross-field invariants of every section; throws ConfigError.
void validate(const HarnessConfig& config);

nlohmann::json to_json(const HarnessConfig& config);

// INI text that load_config_file reads back to the same config.
std::string to_ini(const HarnessConfig& config);

}  // namespace roomflow::harness
