#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "roomflow/harness/config.hpp"
#include "roomflow/harness/manifest.hpp"

namespace roomflow::harness {

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr int kReportSchemaVersion = 1;

// One (item, method) row. Values use report units: milliseconds for times,
// dB for DRR, plain ratio for SRMR.
struct ItemResult {
  std::string id;
  std::string method;
  std::string rt60_source;  // "blind" or "oracle"
  std::map<std::string, double> metrics;
  std::vector<std::string> errors;  // metrics that could not be computed
};

struct EvalReport {
  std::string kind;  // "dereverb" or "rir"
  std::string note;
  std::vector<std::string> methods;
  std::vector<std::string> columns;  // metric keys in table order
  std::vector<ItemResult> per_item;  // item-major, methods in order
  // method -> metric -> arithmetic mean over the rows carrying that metric
  std::map<std::string, std::map<std::string, double>> aggregates;
  std::map<std::string, std::map<std::string, std::size_t>> counts;
  nlohmann::json config_snapshot;
  std::string tool_version = kToolVersion;
  std::string generated_at;  // the only field that varies between identical runs

  std::size_t failure_count() const;
};

// Fills aggregates and counts from per_item, summing in row order.
void aggregate(EvalReport& report);

struct DereverbEvalOptions {
  std::vector<std::string> methods{"none", "wpe"};  // subset of none, wpe, flow
  std::filesystem::path checkpoint;  // required for flow
  std::filesystem::path audio_out;   // when set, processed audio is written here
  bool clean_input = false;          // feed clean files instead of reverberant
};

// Per test item and method: output audio, SRMR, blind RT60 and RTE against
// the clean reference. Metric failures are recorded per row. Throws
// ConfigError for unknown methods or a missing/unsuitable checkpoint.
EvalReport run_dereverb_eval(const Manifest& manifest, const DereverbEvalOptions& options,
                             const HarnessConfig& config);

struct RirEvalOptions {
  std::vector<std::string> methods{"flow"};
  std::filesystem::path checkpoint;
  bool include_baselines = true;  // corpus-mean feature and roundtrip rows
};

// Per test item: RIR predicted from the central 2.56 s of reverberant speech
// by the flow at cfg_scale and each cfg_sweep scale, plus the corpus-mean
// feature and featurize/defeaturize roundtrip reference rows; deltas against
// the stored RIR.
EvalReport run_rir_eval(const Manifest& manifest, const RirEvalOptions& options,
                        const HarnessConfig& config);

nlohmann::json to_json(const EvalReport& report);
EvalReport report_from_json(const nlohmann::json& j);

// Methods as rows, metrics as columns, aggregate means.
std::string to_markdown(const EvalReport& report);

// <stem>.json and <stem>.md in dir, written atomically.
void write_report(const EvalReport& report, const std::filesystem::path& dir,
                  const std::string& stem);

// Current UTC time as YYYY-MM-DDTHH:MM:SSZ.
std::string utc_timestamp();

// Method label for a flow row at a cfg scale: "flow" at scale 1, otherwise
// "flow_cfg<scale>".
std::string flow_method_label(double cfg_scale);

}  // namespace roomflow::harness
