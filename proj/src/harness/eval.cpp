#include "roomflow/harness/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <optional>

#include "roomflow/audio/wav.hpp"
#include "roomflow/errors.hpp"
#include "roomflow/flow/checkpoint.hpp"
#include "roomflow/flow/features.hpp"
#include "roomflow/harness/dataset.hpp"
#include "roomflow/harness/flow_pipeline.hpp"
#include "roomflow/io.hpp"
#include "roomflow/metrics/blind_rt60.hpp"
#include "roomflow/metrics/rir_params.hpp"
#include "roomflow/metrics/srmr.hpp"
#include "roomflow/parallel.hpp"
#include "roomflow/wpe/wpe.hpp"

namespace roomflow::harness {

namespace {

using nlohmann::json;

constexpr double kMs = 1000.0;

// Evaluates f and stores its value under key, or records the failure.
template <typename F>
void measure(ItemResult& row, const std::string& key, F&& f) {
  try {
    row.metrics[key] = f();
  } catch (const Error& e) {
    row.errors.push_back(key + ": " + e.what());
  }
}

flow::Checkpoint load_checked(const std::filesystem::path& path, flow::TaskKind task,
                              const Manifest& manifest) {
  if (path.empty()) throw ConfigError("method flow needs a checkpoint");
  if (!std::filesystem::is_regular_file(path)) {
    throw ConfigError("checkpoint " + path.string() + " not found");
  }
  flow::Checkpoint ck;
  try {
    ck = flow::load_checkpoint(path);
  } catch (const FormatError& e) {
    throw ConfigError(e.what());
  }
  if (ck.task != task) {
    throw ConfigError("checkpoint " + path.string() + " was trained for " +
                      flow::to_string(ck.task) + ", not " + flow::to_string(task));
  }
  audit_no_test_leak(manifest, ck);
  return ck;
}

}  // namespace

std::size_t EvalReport::failure_count() const {
  return static_cast<std::size_t>(std::count_if(
      per_item.begin(), per_item.end(), [](const ItemResult& r) { return !r.errors.empty(); }));
}

void aggregate(EvalReport& report) {
  report.aggregates.clear();
  report.counts.clear();
  std::map<std::string, std::map<std::string, double>> sums;
  for (const auto& m : report.methods) {
    sums[m];
    report.counts[m];
  }
  for (const auto& row : report.per_item) {
    for (const auto& [key, value] : row.metrics) {
      sums[row.method][key] += value;
      ++report.counts[row.method][key];
    }
  }
  for (const auto& [method, by_key] : sums) {
    auto& agg = report.aggregates[method];
    for (const auto& [key, sum] : by_key) {
      agg[key] = sum / static_cast<double>(report.counts[method][key]);
    }
  }
}

std::string flow_method_label(double cfg_scale) {
  if (cfg_scale == 1.0) return "flow";
  char buf[32];
  std::snprintf(buf, sizeof buf, "flow_cfg%g", cfg_scale);
  return buf;
}

EvalReport run_dereverb_eval(const Manifest& manifest, const DereverbEvalOptions& options,
                             const HarnessConfig& config) {
  validate(config);
  for (const auto& m : options.methods) {
    if (m != "none" && m != "wpe" && m != "flow") {
      throw ConfigError("unknown dereverb method '" + m + "' (expected none, wpe or flow)");
    }
  }
  if (options.methods.empty()) throw ConfigError("no dereverb method selected");
  std::optional<flow::Checkpoint> ck;
  if (std::count(options.methods.begin(), options.methods.end(), "flow")) {
    ck = load_checked(options.checkpoint, flow::TaskKind::kDereverb, manifest);
  }
  if (!options.audio_out.empty()) {
    for (const auto& m : options.methods) {
      std::filesystem::create_directories(options.audio_out / m);
    }
  }

  const auto items = manifest.select(Split::kTest);
  const std::size_t n_methods = options.methods.size();
  std::vector<ItemResult> rows(items.size() * n_methods);
  parallel_for(items.size(), config.jobs, [&](std::size_t i) {
    const ManifestItem& item = *items[i];
    const audio::AudioBuffer clean = audio::read_wav(manifest.resolve(item.clean_path));
    const audio::AudioBuffer input =
        options.clean_input ? clean : audio::read_wav(manifest.resolve(item.reverberant_path));
    std::optional<double> ref_rt60;
    std::string ref_error;
    try {
      ref_rt60 = metrics::blind_rt60(clean, config.blind_rt60);
    } catch (const Error& e) {
      ref_error = e.what();
    }
    for (std::size_t k = 0; k < n_methods; ++k) {
      const std::string& method = options.methods[k];
      ItemResult& row = rows[i * n_methods + k];
      row.id = item.id;
      row.method = method;
      row.rt60_source = "blind";
      audio::AudioBuffer output;
      try {
        if (method == "none") {
          output = input;
        } else if (method == "wpe") {
          output = wpe::wpe_dereverb(input, config.wpe);
        } else {
          output = flow_dereverb(*ck, input, config.flow.sample_steps,
                                 item_seed(config.flow.sample_seed, item.id), config.flow.cfg_scale);
        }
      } catch (const Error& e) {
        row.errors.push_back(std::string("output: ") + e.what());
        continue;
      }
      if (!options.audio_out.empty() && method != "none") {
        audio::write_wav(output, options.audio_out / method / (item.id + ".wav"));
      }
      measure(row, "srmr", [&] { return metrics::srmr(output, config.srmr); });
      std::optional<double> out_rt60;
      measure(row, "rt60_ms", [&] {
        out_rt60 = metrics::blind_rt60(output, config.blind_rt60);
        return *out_rt60 * kMs;
      });
      if (out_rt60 && ref_rt60) {
        row.metrics["rte_ms"] = std::abs(*out_rt60 - *ref_rt60) * kMs;
      } else if (out_rt60) {
        row.errors.push_back("rte_ms: clean reference: " + ref_error);
      }
    }
  });

  EvalReport report;
  report.kind = "dereverb";
  report.note =
      "Dereverberation is evaluated on each file at its original duration; RT60 is the "
      "blind estimate from the output audio and RTE compares it with the blind estimate of "
      "the clean reference.";
  report.methods = options.methods;
  report.columns = {"srmr", "rt60_ms", "rte_ms"};
  report.per_item = std::move(rows);
  aggregate(report);
  report.config_snapshot = to_json(config);
  report.config_snapshot["input"] = options.clean_input ? "clean" : "reverberant";
  if (ck) report.config_snapshot["checkpoint_model_hash"] = std::to_string(ck->model.hash());
  return report;
}

EvalReport run_rir_eval(const Manifest& manifest, const RirEvalOptions& options,
                        const HarnessConfig& config) {
  validate(config);
  for (const auto& m : options.methods) {
    if (m != "flow") throw ConfigError("unknown rir method '" + m + "' (expected flow)");
  }
  if (options.methods.empty() && !options.include_baselines) {
    throw ConfigError("no rir method selected");
  }
  std::optional<flow::Checkpoint> ck;
  if (!options.methods.empty() || options.include_baselines) {
    ck = load_checked(options.checkpoint, flow::TaskKind::kRirEstimation, manifest);
  }

  std::vector<double> scales;
  if (!options.methods.empty()) {
    scales.push_back(config.flow.cfg_scale);
    for (double s : config.eval.cfg_sweep) {
      if (std::find(scales.begin(), scales.end(), s) == scales.end()) scales.push_back(s);
    }
  }
  std::vector<std::string> methods;
  for (double s : scales) methods.push_back(flow_method_label(s));
  if (options.include_baselines) {
    methods.push_back("mean_feature");
    methods.push_back("roundtrip");
  }

  const auto items = manifest.select(Split::kTest);
  const std::size_t n_methods = methods.size();
  std::vector<ItemResult> rows(items.size() * n_methods);
  parallel_for(items.size(), config.jobs, [&](std::size_t i) {
    const ManifestItem& item = *items[i];
    const sim::Rir reference = load_item_rir(manifest, item);
    const audio::AudioBuffer reverberant =
        audio::read_wav(manifest.resolve(item.reverberant_path));
    const std::uint64_t sample_seed = item_seed(config.flow.sample_seed, item.id);
    const std::uint64_t carrier_seed = item_seed(~config.flow.sample_seed, item.id);
    double reference_rt60 = 0.0;
    try {
      reference_rt60 = metrics::analyze_rir(metrics::analysis_window(reference)).rt60;
    } catch (const Error&) {
      // rir_delta below reports the failing side
    }
    for (std::size_t k = 0; k < n_methods; ++k) {
      ItemResult& row = rows[i * n_methods + k];
      row.id = item.id;
      row.method = methods[k];
      row.rt60_source = "oracle";
      std::optional<flow::DefeaturizedRir> predicted;
      try {
        flow::VectorXd feature;
        if (k < scales.size()) {
          feature = predict_rir_feature(*ck, reverberant, config.flow.sample_steps, sample_seed,
                                        scales[k]);
        } else if (methods[k] == "mean_feature") {
          feature = ck->target_norm.mean;
        } else {
          feature = flow::rir_feature(reference);
        }
        predicted = flow::defeaturize_rir(feature, carrier_seed);
      } catch (const Error& e) {
        row.errors.push_back(std::string("prediction: ") + e.what());
        continue;
      }
      row.metrics["projected"] = predicted->projected ? 1.0 : 0.0;
      try {
        const metrics::AcousticReport d = metrics::rir_delta(predicted->rir, reference);
        row.metrics["delta_rt60_ms"] = *d.delta_rt60 * kMs;
        row.metrics["delta_drr_db"] = *d.delta_drr;
        row.metrics["delta_edt_ms"] = *d.delta_edt * kMs;
        row.metrics["rt60_ms"] = *d.rt60 * kMs;
        row.metrics["edt_ms"] = *d.edt * kMs;
        row.metrics["drr_db"] = *d.drr;
        row.metrics["reference_rt60_ms"] = reference_rt60 * kMs;
      } catch (const Error& e) {
        row.errors.push_back(std::string("delta: ") + e.what());
      }
    }
  });

  EvalReport report;
  report.kind = "rir";
  report.note =
      "RIRs are compared on fixed 2.56 s windows; the condition is the central 2.56 s of the "
      "reverberant speech. mean_feature predicts the train-split mean RIR feature; roundtrip "
      "re-synthesizes the reference from its own feature and bounds what feature-space "
      "prediction can reach.";
  report.methods = methods;
  report.columns = {"delta_rt60_ms", "delta_drr_db", "delta_edt_ms"};
  report.per_item = std::move(rows);
  aggregate(report);
  report.config_snapshot = to_json(config);
  if (ck) report.config_snapshot["checkpoint_model_hash"] = std::to_string(ck->model.hash());
  return report;
}

json to_json(const EvalReport& r) {
  json rows = json::array();
  for (const auto& row : r.per_item) {
    json j = {{"id", row.id},
              {"method", row.method},
              {"rt60_source", row.rt60_source},
              {"metrics", row.metrics}};
    if (!row.errors.empty()) j["errors"] = row.errors;
    rows.push_back(std::move(j));
  }
  return {{"schema_version", kReportSchemaVersion},
          {"generated_at", r.generated_at},
          {"tool_version", r.tool_version},
          {"kind", r.kind},
          {"note", r.note},
          {"methods", r.methods},
          {"columns", r.columns},
          {"aggregates", r.aggregates},
          {"counts", r.counts},
          {"failures", r.failure_count()},
          {"per_item", std::move(rows)},
          {"config_snapshot", r.config_snapshot}};
}

EvalReport report_from_json(const json& j) {
  EvalReport r;
  r.generated_at = j.at("generated_at").get<std::string>();
  r.tool_version = j.at("tool_version").get<std::string>();
  r.kind = j.at("kind").get<std::string>();
  r.note = j.at("note").get<std::string>();
  r.methods = j.at("methods").get<std::vector<std::string>>();
  r.columns = j.at("columns").get<std::vector<std::string>>();
  r.aggregates = j.at("aggregates").get<decltype(r.aggregates)>();
  r.counts = j.at("counts").get<decltype(r.counts)>();
  for (const auto& jr : j.at("per_item")) {
    ItemResult row;
    row.id = jr.at("id").get<std::string>();
    row.method = jr.at("method").get<std::string>();
    row.rt60_source = jr.at("rt60_source").get<std::string>();
    row.metrics = jr.at("metrics").get<std::map<std::string, double>>();
    if (jr.contains("errors")) row.errors = jr.at("errors").get<std::vector<std::string>>();
    r.per_item.push_back(std::move(row));
  }
  r.config_snapshot = j.at("config_snapshot");
  return r;
}

std::string to_markdown(const EvalReport& r) {
  auto header = [](const std::string& key) -> std::string {
    if (key == "srmr") return "SRMR";
    if (key == "rt60_ms") return "RT60 (ms)";
    if (key == "rte_ms") return "RTE (ms)";
    if (key == "delta_rt60_ms") return "ΔRT60 (ms)";
    if (key == "delta_drr_db") return "ΔDRR (dB)";
    if (key == "delta_edt_ms") return "ΔEDT (ms)";
    return key;
  };
  std::string out = "# " + std::string(r.kind == "rir" ? "RIR estimation" : "Dereverberation") +
                    " report\n\n" + r.note + "\n\nGenerated " + r.generated_at + " by roomflow " +
                    r.tool_version + ". Values are means over test items.\n\n| Method |";
  for (const auto& c : r.columns) out += " " + header(c) + " |";
  out += " Items | Failures |\n|---|";
  for (std::size_t i = 0; i < r.columns.size(); ++i) out += "---:|";
  out += "---:|---:|\n";
  for (const auto& m : r.methods) {
    out += "| " + m + " |";
    const auto agg = r.aggregates.find(m);
    for (const auto& c : r.columns) {
      char buf[32] = "n/a";
      if (agg != r.aggregates.end()) {
        const auto it = agg->second.find(c);
        if (it != agg->second.end()) std::snprintf(buf, sizeof buf, "%.2f", it->second);
      }
      out += std::string(" ") + buf + " |";
    }
    std::size_t n = 0, failed = 0;
    for (const auto& row : r.per_item) {
      if (row.method != m) continue;
      ++n;
      if (!row.errors.empty()) ++failed;
    }
    out += " " + std::to_string(n) + " | " + std::to_string(failed) + " |\n";
  }
  return out;
}

void write_report(const EvalReport& report, const std::filesystem::path& dir,
                  const std::string& stem) {
  std::filesystem::create_directories(dir);
  write_file_atomic(dir / (stem + ".json"), to_json(report).dump(2) + "\n");
  write_file_atomic(dir / (stem + ".md"), to_markdown(report));
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace roomflow::harness
