#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "roomflow/audio/convolve.hpp"
#include "roomflow/audio/wav.hpp"
#include "roomflow/errors.hpp"
#include "roomflow/flow/checkpoint.hpp"
#include "roomflow/harness/config.hpp"
#include "roomflow/harness/dataset.hpp"
#include "roomflow/harness/edc_export.hpp"
#include "roomflow/harness/eval.hpp"
#include "roomflow/harness/flow_pipeline.hpp"
#include "roomflow/harness/manifest.hpp"
#include "roomflow/metrics/blind_rt60.hpp"
#include "roomflow/metrics/rir_params.hpp"
#include "roomflow/metrics/srmr.hpp"
#include "roomflow/sim/corpus.hpp"
#include "roomflow/sim/image_source.hpp"
#include "roomflow/sim/synth.hpp"
#include "roomflow/wpe/wpe.hpp"

namespace fs = std::filesystem;
using namespace roomflow;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitPartial = 1;
constexpr int kExitConfig = 2;

struct Globals {
  std::optional<std::uint64_t> seed;
  std::optional<int> jobs;
  std::string config_file;
  std::vector<std::string> overrides;
  std::string out = ".";
};

harness::HarnessConfig effective_config(const Globals& g) {
  harness::HarnessConfig config;
  if (!g.config_file.empty()) harness::load_config_file(g.config_file, config);
  for (const auto& o : g.overrides) harness::set_config_value(config, o);
  if (g.seed) config.seed = *g.seed;
  if (g.jobs) config.jobs = *g.jobs;
  config.corpus.jobs = config.jobs;
  harness::validate(config);
  return config;
}

fs::path out_path(const Globals& g, const std::string& explicit_path, const std::string& name) {
  if (!explicit_path.empty()) return explicit_path;
  fs::create_directories(g.out);
  return fs::path(g.out) / name;
}

sim::Vec3 to_vec3(const std::vector<double>& v) { return {v[0], v[1], v[2]}; }

void print_json(const json& j) { std::cout << j.dump(2) << "\n"; }

// Runs f and stores its result under key, or records why it failed.
template <typename F>
bool try_metric(json& out, json& errors, const std::string& key, F&& f) {
  try {
    out[key] = f();
    return true;
  } catch (const Error& e) {
    errors[key] = e.what();
    return false;
  }
}

json rir_parameters_json(const sim::Rir& rir, json& errors) {
  json out = json::object();
  try {
    const auto p = metrics::analyze_rir(metrics::analysis_window(rir));
    out["rt60"] = p.rt60;
    out["rt60_estimator"] = metrics::to_string(p.rt60_estimator);
    out["edt"] = p.edt;
    out["drr"] = p.drr;
  } catch (const Error& e) {
    errors["rir"] = e.what();
  }
  return out;
}

void report_progress(long step, double loss) {
  std::fprintf(stderr, "step %ld loss %.6f\n", step, loss);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Room acoustics toolkit: RIR simulation, acoustic metrics, WPE and flow matching"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--seed", g.seed, "Base seed (general.seed)");
  app.add_option("--config", g.config_file, "INI config file")->check(CLI::ExistingFile);
  app.add_option("--out", g.out, "Output directory");
  app.add_option("--jobs", g.jobs, "Worker threads")->check(CLI::PositiveNumber);
  app.add_option("--set", g.overrides, "Config override section.key=value (repeatable)");

  auto* config_cmd = app.add_subcommand("config", "Print the effective config as INI");

  // simulate-rir
  auto* sim_cmd = app.add_subcommand("simulate-rir", "Simulate a shoebox RIR or a synthetic exponential RIR");
  std::vector<double> dims, source, receiver, absorption;
  double alpha = -1.0, synth_t60 = 0.0, synth_duration = 2.56;
  std::size_t room_index = 0;
  int max_order = -1;
  std::string sim_output;
  sim_cmd->add_option("--dims", dims, "Room size Lx Ly Lz (m)")->expected(3);
  sim_cmd->add_option("--source", source, "Source position x y z")->expected(3);
  sim_cmd->add_option("--receiver", receiver, "Receiver position x y z")->expected(3);
  sim_cmd->add_option("--alpha", alpha, "Uniform wall absorption");
  sim_cmd->add_option("--absorption", absorption, "Six wall absorptions")->expected(6);
  sim_cmd->add_option("--max-order", max_order, "Image order per axis");
  sim_cmd->add_option("--index", room_index, "Corpus room index when no room is given");
  sim_cmd->add_option("--synth-t60", synth_t60, "Exponential-decay noise RIR with this T60 (s)");
  sim_cmd->add_option("--duration", synth_duration, "Length of the synthetic RIR (s)");
  sim_cmd->add_option("--output", sim_output, "Output WAV (default <out>/rir.wav)");

  // build-dataset
  auto* ds_cmd = app.add_subcommand("build-dataset", "Build a simulated train/test corpus");
  std::size_t n_items = 50;
  std::string clean_source = "synthetic", wav_dir;
  ds_cmd->add_option("--n", n_items, "Number of items")->check(CLI::PositiveNumber);
  ds_cmd->add_option("--clean-source", clean_source, "synthetic or wav-dir")
      ->check(CLI::IsMember({"synthetic", "wav-dir"}));
  ds_cmd->add_option("--wav-dir", wav_dir, "Directory of mono 16 kHz WAVs");

  // convolve
  auto* conv_cmd = app.add_subcommand("convolve", "Convolve audio with an RIR");
  std::string conv_input, conv_rir, conv_output;
  bool keep_length = false;
  conv_cmd->add_option("--input", conv_input)->required();
  conv_cmd->add_option("--rir", conv_rir)->required();
  conv_cmd->add_option("--output", conv_output, "Output WAV (default <out>/convolved.wav)");
  conv_cmd->add_flag("--keep-length", keep_length, "Truncate to the input length");

  // dereverb
  auto* der_cmd = app.add_subcommand("dereverb", "Dereverberate one file");
  std::string der_method = "wpe", der_input, der_output, der_checkpoint;
  der_cmd->add_option("--method", der_method)->check(CLI::IsMember({"wpe", "flow"}));
  der_cmd->add_option("--input", der_input)->required();
  der_cmd->add_option("--output", der_output, "Output WAV (default <out>/dereverb.wav)");
  der_cmd->add_option("--checkpoint", der_checkpoint, "Dereverb checkpoint for --method flow");

  // train-flow
  auto* train_cmd = app.add_subcommand("train-flow", "Train a flow-matching model on a manifest");
  std::string train_task = "rir", train_manifest, train_checkpoint;
  train_cmd->add_option("--task", train_task)->check(CLI::IsMember({"dereverb", "rir"}));
  train_cmd->add_option("--manifest", train_manifest)->required();
  train_cmd->add_option("--checkpoint", train_checkpoint, "Output (default <out>/flow_<task>.json)");

  // estimate-rir
  auto* est_cmd = app.add_subcommand("estimate-rir", "Estimate an RIR from reverberant speech");
  std::string est_input, est_checkpoint, est_output, est_reference;
  est_cmd->add_option("--input", est_input)->required();
  est_cmd->add_option("--checkpoint", est_checkpoint)->required();
  est_cmd->add_option("--output", est_output, "Output WAV (default <out>/estimated_rir.wav)");
  est_cmd->add_option("--reference", est_reference, "Reference RIR for deltas");

  // metrics
  auto* met_cmd = app.add_subcommand("metrics", "Acoustic metrics of files");
  met_cmd->require_subcommand(1);
  auto* met_rir = met_cmd->add_subcommand("rir", "RT60, EDT and DRR of an RIR");
  std::string met_rir_file;
  met_rir->add_option("rir", met_rir_file)->required();
  auto* met_speech = met_cmd->add_subcommand("speech", "SRMR and blind RT60 of speech");
  std::string met_speech_file, met_speech_ref;
  met_speech->add_option("speech", met_speech_file)->required();
  met_speech->add_option("--reference", met_speech_ref, "Clean reference for RTE");
  auto* met_delta = met_cmd->add_subcommand("delta", "Parameter deltas between two RIRs");
  std::string met_pred, met_ref;
  met_delta->add_option("predicted", met_pred)->required();
  met_delta->add_option("reference", met_ref)->required();

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "Batch evaluation over a manifest's test split");
  eval_cmd->require_subcommand(1);
  auto* eval_der = eval_cmd->add_subcommand("dereverb", "Dereverberation table");
  auto* eval_rir = eval_cmd->add_subcommand("rir", "RIR estimation table");
  std::string eval_manifest, eval_checkpoint;
  std::vector<std::string> eval_der_methods{"none", "wpe"};
  std::vector<std::string> eval_rir_methods{"flow"};
  bool save_audio = false, clean_input = false, no_baselines = false;
  for (auto* c : {eval_der, eval_rir}) {
    c->add_option("--manifest", eval_manifest)->required();
    c->add_option("--checkpoint", eval_checkpoint);
  }
  eval_der->add_option("--methods", eval_der_methods, "Subset of none,wpe,flow")->delimiter(',');
  eval_der->add_flag("--save-audio", save_audio, "Write processed audio under <out>/audio");
  eval_der->add_flag("--clean-input", clean_input, "Process clean files instead of reverberant");
  eval_rir->add_option("--methods", eval_rir_methods, "Subset of flow")->delimiter(',');
  eval_rir->add_flag("--no-baselines", no_baselines, "Skip the mean-feature and roundtrip rows");

  // export-edc
  auto* edc_cmd = app.add_subcommand("export-edc", "Write EDC plot data as long-format CSV");
  std::vector<std::string> edc_files;
  std::string edc_output;
  std::size_t edc_stride = 16;
  edc_cmd->add_option("rirs", edc_files)->required();
  edc_cmd->add_option("--output", edc_output, "CSV path (default <out>/edc.csv)");
  edc_cmd->add_option("--stride", edc_stride, "Samples between rows")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    const harness::HarnessConfig config = effective_config(g);

    if (config_cmd->parsed()) {
      std::cout << harness::to_ini(config);
      return kExitOk;
    }

    if (sim_cmd->parsed()) {
      sim::Rir rir;
      json info;
      if (synth_t60 > 0.0) {
        rir = sim::synth_exponential_rir(synth_t60, synth_duration, config.corpus.sample_rate,
                                         config.seed);
        info["synth_t60"] = synth_t60;
      } else {
        sim::RoomSpec room = sim::sample_room(config.seed, room_index, config.corpus);
        if (!dims.empty()) {
          if (source.empty() || receiver.empty()) {
            throw ConfigError("--dims needs --source and --receiver");
          }
          room.dims = to_vec3(dims);
          room.source = to_vec3(source);
          room.receiver = to_vec3(receiver);
        }
        if (alpha >= 0.0) room.set_uniform_absorption(alpha);
        if (!absorption.empty()) std::copy(absorption.begin(), absorption.end(), room.absorption.begin());
        if (max_order >= 0) room.max_order = max_order;
        sim::validate(room);
        rir = sim::simulate_rir(room, config.corpus.simulation);
        info["room"] = harness::room_to_json(room);
        info["eyring_t60"] = sim::eyring_t60(room);
        info["sabine_t60"] = sim::sabine_t60(room);
      }
      const fs::path path = out_path(g, sim_output, "rir.wav");
      audio::write_wav(rir.h, path);
      json errors = json::object();
      info["output"] = path.string();
      info["parameters"] = rir_parameters_json(rir, errors);
      if (!errors.empty()) info["errors"] = errors;
      print_json(info);
      return errors.empty() ? kExitOk : kExitPartial;
    }

    if (ds_cmd->parsed()) {
      harness::DatasetRequest req;
      req.n_items = n_items;
      req.seed = config.seed;
      req.source = clean_source == "synthetic" ? harness::CleanSource::kSynthetic
                                               : harness::CleanSource::kWavDir;
      if (req.source == harness::CleanSource::kWavDir && wav_dir.empty()) {
        throw ConfigError("--clean-source wav-dir needs --wav-dir");
      }
      req.wav_dir = wav_dir;
      req.out_dir = g.out;
      const harness::Manifest m = harness::build_dataset(req, config);
      std::cout << "wrote " << m.items.size() << " items ("
                << m.select(harness::Split::kTest).size() << " test) to "
                << (fs::path(g.out) / "manifest.json").string() << "\n";
      return kExitOk;
    }

    if (conv_cmd->parsed()) {
      const audio::AudioBuffer x = audio::read_wav(conv_input);
      audio::AudioBuffer y = audio::convolve(x, audio::read_wav(conv_rir));
      if (keep_length) y = y.fitted(x.size());
      const fs::path path = out_path(g, conv_output, "convolved.wav");
      audio::write_wav(y, path);
      std::cout << path.string() << "\n";
      return kExitOk;
    }

    if (der_cmd->parsed()) {
      const audio::AudioBuffer x = audio::read_wav(der_input);
      audio::AudioBuffer y;
      if (der_method == "wpe") {
        y = wpe::wpe_dereverb(x, config.wpe);
      } else {
        if (der_checkpoint.empty()) throw ConfigError("--method flow needs --checkpoint");
        const flow::Checkpoint ck = flow::load_checkpoint(der_checkpoint);
        y = harness::flow_dereverb(ck, x, config.flow.sample_steps, config.flow.sample_seed,
                                   config.flow.cfg_scale);
      }
      const fs::path path = out_path(g, der_output, "dereverb.wav");
      audio::write_wav(y, path);
      std::cout << path.string() << "\n";
      return kExitOk;
    }

    if (train_cmd->parsed()) {
      const harness::Manifest m = harness::load_manifest(train_manifest);
      const flow::TaskKind task = flow::task_from_string(train_task);
      const flow::Checkpoint ck = harness::train_flow(m, task, config, report_progress);
      harness::audit_no_test_leak(m, ck);
      std::fprintf(stderr, "audit: %zu train ids used for normalization and training, none of the %zu test ids\n",
                   ck.train_ids.size(), m.select(harness::Split::kTest).size());
      const fs::path path = out_path(g, train_checkpoint, "flow_" + train_task + ".json");
      flow::save_checkpoint(ck, path);
      std::cout << path.string() << "\n";
      return kExitOk;
    }

    if (est_cmd->parsed()) {
      const flow::Checkpoint ck = flow::load_checkpoint(est_checkpoint);
      const audio::AudioBuffer x = audio::read_wav(est_input);
      const flow::VectorXd feature = harness::predict_rir_feature(
          ck, x, config.flow.sample_steps, config.flow.sample_seed, config.flow.cfg_scale);
      const flow::DefeaturizedRir est = flow::defeaturize_rir(feature, ~config.flow.sample_seed);
      const fs::path path = out_path(g, est_output, "estimated_rir.wav");
      audio::write_wav(est.rir.h, path);
      json errors = json::object();
      json info = {{"output", path.string()}, {"projected", est.projected}};
      info["parameters"] = rir_parameters_json(est.rir, errors);
      if (!est_reference.empty()) {
        sim::Rir ref{audio::read_wav(est_reference), std::nullopt, std::nullopt};
        try {
          info["delta"] = metrics::rir_delta(est.rir, ref);
        } catch (const Error& e) {
          errors["delta"] = e.what();
        }
      }
      if (!errors.empty()) info["errors"] = errors;
      print_json(info);
      return errors.empty() ? kExitOk : kExitPartial;
    }

    if (met_cmd->parsed()) {
      json out = json::object();
      json errors = json::object();
      if (met_rir->parsed()) {
        out = rir_parameters_json({audio::read_wav(met_rir_file), std::nullopt, std::nullopt}, errors);
      } else if (met_speech->parsed()) {
        const audio::AudioBuffer x = audio::read_wav(met_speech_file);
        try_metric(out, errors, "srmr", [&] { return metrics::srmr(x, config.srmr); });
        try_metric(out, errors, "rt60", [&] { return metrics::blind_rt60(x, config.blind_rt60); });
        if (!met_speech_ref.empty()) {
          const audio::AudioBuffer ref = audio::read_wav(met_speech_ref);
          try_metric(out, errors, "rte", [&] { return metrics::rte(x, ref, config.blind_rt60); });
        }
      } else {
        const sim::Rir p{audio::read_wav(met_pred), std::nullopt, std::nullopt};
        const sim::Rir r{audio::read_wav(met_ref), std::nullopt, std::nullopt};
        try {
          out = metrics::rir_delta(p, r);
        } catch (const Error& e) {
          errors["delta"] = e.what();
        }
      }
      if (!errors.empty()) out["errors"] = errors;
      print_json(out);
      return errors.empty() ? kExitOk : kExitPartial;
    }

    if (eval_cmd->parsed()) {
      const harness::Manifest m = harness::load_manifest(eval_manifest);
      harness::EvalReport report;
      std::string stem;
      if (eval_der->parsed()) {
        harness::DereverbEvalOptions opts;
        opts.methods = eval_der_methods;
        opts.checkpoint = eval_checkpoint;
        if (save_audio) opts.audio_out = fs::path(g.out) / "audio";
        opts.clean_input = clean_input;
        report = harness::run_dereverb_eval(m, opts, config);
        stem = "dereverb_report";
      } else {
        harness::RirEvalOptions opts;
        opts.methods = eval_rir_methods;
        opts.checkpoint = eval_checkpoint;
        opts.include_baselines = !no_baselines;
        report = harness::run_rir_eval(m, opts, config);
        stem = "rir_report";
      }
      report.generated_at = harness::utc_timestamp();
      harness::write_report(report, g.out, stem);
      std::cout << harness::to_markdown(report);
      const std::size_t failed = report.failure_count();
      if (failed) std::fprintf(stderr, "%zu rows had metric failures\n", failed);
      return failed ? kExitPartial : kExitOk;
    }

    if (edc_cmd->parsed()) {
      std::vector<fs::path> paths(edc_files.begin(), edc_files.end());
      const fs::path path = out_path(g, edc_output, "edc.csv");
      const auto result = harness::export_edc_plotdata(paths, path, edc_stride);
      for (const auto& [file, message] : result.errors) {
        std::fprintf(stderr, "%s: %s\n", file.c_str(), message.c_str());
      }
      std::cout << result.rows << " rows written to " << path.string() << "\n";
      return result.errors.empty() ? kExitOk : kExitPartial;
    }
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const IoError& e) {
    std::fprintf(stderr, "io error: %s\n", e.what());
    return kExitConfig;
  } catch (const FormatError& e) {
    std::fprintf(stderr, "format error: %s\n", e.what());
    return kExitConfig;
  } catch (const RateError& e) {
    std::fprintf(stderr, "rate error: %s\n", e.what());
    return kExitConfig;
  } catch (const UnsupportedError& e) {
    std::fprintf(stderr, "unsupported: %s\n", e.what());
    return kExitConfig;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitPartial;
  } catch (const std::filesystem::filesystem_error& e) {
    std::fprintf(stderr, "io error: %s\n", e.what());
    return kExitConfig;
  }
  return kExitOk;
}
