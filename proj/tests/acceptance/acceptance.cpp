// Acceptance suite: one PASS/FAIL line per criterion.
//   acceptance                      run every criterion
//   acceptance --criterion 7 -c 8   run a subset
//   acceptance --prepare --work D   build the shared RIR-estimation run in D
// Criteria 7 and 8 read the run in --work, building it when absent.
#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include "../support.hpp"
#include "roomflow/audio/convolve.hpp"
#include "roomflow/audio/stft.hpp"
#include "roomflow/errors.hpp"
#include "roomflow/flow/checkpoint.hpp"
#include "roomflow/flow/loss.hpp"
#include "roomflow/flow/sample.hpp"
#include "roomflow/flow/train.hpp"
#include "roomflow/harness/config.hpp"
#include "roomflow/harness/dataset.hpp"
#include "roomflow/harness/eval.hpp"
#include "roomflow/harness/flow_pipeline.hpp"
#include "roomflow/harness/speech_synth.hpp"
#include "roomflow/metrics/blind_rt60.hpp"
#include "roomflow/metrics/edc.hpp"
#include "roomflow/metrics/rir_params.hpp"
#include "roomflow/metrics/srmr.hpp"
#include "roomflow/parallel.hpp"
#include "roomflow/sim/corpus.hpp"
#include "roomflow/sim/image_source.hpp"
#include "roomflow/sim/synth.hpp"
#include "roomflow/wpe/wpe.hpp"

using namespace roomflow;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double median(std::vector<double> v) { return v.empty() ? NAN : test::median(std::move(v)); }

int g_jobs = 1;

audio::AudioBuffer reverberate(const audio::AudioBuffer& clean, const audio::AudioBuffer& h) {
  return audio::convolve(clean, h).fitted(clean.size());
}

// 1. Oracle RT60 accuracy on synthetic exponential decays.
Outcome oracle_rt60() {
  double worst = 0.0;
  int n = 0;
  for (double t60 : {0.2, 0.5, 1.0}) {
    const double duration = std::max(1.0, 2.0 * t60 + 0.5);
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      const sim::Rir r = sim::synth_exponential_rir(t60, duration, 16000, 1000 + seed);
      const double got = metrics::rt60_from_edc(metrics::edc(r)).seconds;
      worst = std::max(worst, std::abs(got - t60) / t60);
      ++n;
    }
  }
  return {worst <= 0.05, fmt("worst relative error %.2f%% over %d RIRs (bound 5%%)", 100 * worst, n)};
}

// 2. Image-source RT60 against the Eyring prediction.
Outcome eyring_crosscheck() {
  sim::CorpusConfig cc;
  cc.alpha_min = 0.2;
  cc.alpha_max = 0.5;
  const auto rooms = sim::sample_rooms(10, 2024, cc);
  std::vector<double> ratio(rooms.size());
  parallel_for(rooms.size(), g_jobs, [&](std::size_t i) {
    const sim::Rir r = sim::simulate_rir(rooms[i]);
    ratio[i] = metrics::rt60_from_edc(metrics::edc(r)).seconds / sim::eyring_t60(rooms[i]);
  });
  int within = 0;
  std::string list;
  for (double q : ratio) {
    within += std::abs(q - 1.0) <= 0.2;
    list += fmt(" %.2f", q);
  }
  return {within >= 8, fmt("%d/10 rooms within 20%% of Eyring (need 8); measured/Eyring:%s",
                           within, list.c_str())};
}

// 3. Identity deltas and EDC onset level.
Outcome identity_deltas() {
  sim::CorpusConfig cc;
  cc.jobs = g_jobs;
  const auto corpus = sim::sample_corpus(50, 3, cc);
  int ok = 0;
  for (const auto& item : corpus) {
    const metrics::AcousticReport d = metrics::rir_delta(item.rir, item.rir);
    const bool zero = d.delta_rt60 == 0.0 && d.delta_edt == 0.0 && d.delta_drr == 0.0;
    const bool onset = metrics::edc(item.rir).values_db.at(0) == 0.0 &&
                       metrics::edc(metrics::analysis_window(item.rir)).values_db.at(0) == 0.0;
    ok += zero && onset;
  }
  return {ok == 50, fmt("%d/50 RIRs give (0, 0, 0) deltas and EDC(0) = 0 dB", ok)};
}

// 4. WPE direction on reverberant speech, plus the exponential-tail halving example.
Outcome wpe_direction() {
  sim::CorpusConfig cc;
  cc.jobs = g_jobs;
  const auto corpus = sim::sample_corpus(50, 4, cc);
  const std::size_t n = corpus.size();
  std::vector<double> srmr_in(n), srmr_out(n), rt_in(n, NAN), rt_out(n, NAN);
  parallel_for(n, g_jobs, [&](std::size_t i) {
    const audio::AudioBuffer x = reverberate(harness::synth_speech(4000 + i), corpus[i].rir.h);
    const audio::AudioBuffer y = wpe::wpe_dereverb(x);
    srmr_in[i] = metrics::srmr(x);
    srmr_out[i] = metrics::srmr(y);
    try {
      rt_in[i] = metrics::blind_rt60(x);
      rt_out[i] = metrics::blind_rt60(y);
    } catch (const Error&) {
    }
  });
  int up = 0;
  std::vector<double> a, b;
  for (std::size_t i = 0; i < n; ++i) {
    up += srmr_out[i] > srmr_in[i];
    if (std::isfinite(rt_in[i]) && std::isfinite(rt_out[i])) {
      a.push_back(rt_in[i]);
      b.push_back(rt_out[i]);
    }
  }
  const double reduction = 1.0 - median(b) / median(a);

  int halved = 0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const audio::AudioBuffer x = reverberate(harness::synth_speech(seed),
                                             sim::synth_exponential_rir(0.6, 0.6, 16000, seed + 10).h);
    halved += metrics::blind_rt60(wpe::wpe_dereverb(x)) <= 0.5 * metrics::blind_rt60(x);
  }
  const bool pass = up >= 40 && reduction >= 0.40 && halved == 5;
  return {pass, fmt("SRMR up on %d/50 (need 40); median blind RT60 %.0f -> %.0f ms, %.1f%% "
                    "reduction over %zu items (need 40%%); exp tail t60=0.6 halved on %d/5",
                    up, 1e3 * median(a), 1e3 * median(b), 100 * reduction, a.size(), halved)};
}

// 5. Analytic against finite-difference gradients.
Outcome gradient_check() {
  using namespace flow;
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> normal;
  auto randn = [&](Index k, double s) {
    VectorXd v(k);
    for (Index i = 0; i < k; ++i) v[i] = s * normal(rng);
    return v;
  };
  double worst = 0.0;
  Index checked = 0;
  for (int cfg = 0; cfg < 20; ++cfg) {
    const FlowDims d{1 + static_cast<Index>(rng() % 6), 1 + static_cast<Index>(rng() % 5),
                     2 + static_cast<Index>(rng() % 10), 2 * (1 + static_cast<Index>(rng() % 4))};
    FlowModel m(d, rng());
    const VectorXd theta = m.parameters() + randn(m.parameter_count(), 0.3);
    m.set_parameters(theta);
    const VectorXd x1 = randn(d.d_x, 1.0), x0 = randn(d.d_x, 1.0), c = randn(d.d_c, 1.0);
    const double t = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    const bool drop = cfg % 4 == 0;
    const double sigma = cfg % 2 ? 0.05 : 0.0;
    const VectorXd g = flow_loss(m, x1, c, x0, t, sigma, drop).gradient;
    const double h = 1e-5;
    for (Index i = 0; i < m.parameter_count(); ++i) {
      VectorXd p = theta;
      p[i] = theta[i] + h;
      m.set_parameters(p);
      const double lp = flow_loss(m, x1, c, x0, t, sigma, drop).loss;
      p[i] = theta[i] - h;
      m.set_parameters(p);
      const double lm = flow_loss(m, x1, c, x0, t, sigma, drop).loss;
      const double num = (lp - lm) / (2.0 * h);
      worst = std::max(worst, std::abs(g[i] - num) / std::max({std::abs(g[i]), std::abs(num), 1e-8}));
      ++checked;
    }
  }
  return {worst < 1e-4, fmt("max relative error %.2e over %ld parameters in 20 configs (bound 1e-4)",
                            worst, static_cast<long>(checked))};
}

// 6. Two-dimensional rotation toy.
Outcome rotation_toy() {
  using namespace flow;
  const double noise = 0.01;
  std::mt19937_64 rng(3);
  std::normal_distribution<double> normal;
  std::vector<FlowPair> data;
  for (int i = 0; i < 1000; ++i) {
    VectorXd c(2), y(2);
    c << normal(rng), normal(rng);
    y << -c[1] + noise * normal(rng), c[0] + noise * normal(rng);
    data.push_back({c, y});
  }
  FlowTrainConfig cfg;
  cfg.steps = 10000;
  cfg.seed = 3;
  const TrainResult a = train(data, cfg);
  const TrainResult b = train(data, cfg);
  double mse = 0.0;
  for (int i = 0; i < 200; ++i) {
    VectorXd c(2), y(2);
    c << normal(rng), normal(rng);
    y << -c[1], c[0];
    mse += (sample(a.model, c, kDefaultSampleSteps, 5000 + i) - y).squaredNorm() / 2.0 / 200.0;
  }
  const double floor = noise * noise;
  const bool same = a.model.hash() == b.model.hash() && a.loss_curve == b.loss_curve;
  return {mse < 10.0 * floor && same,
          fmt("test MSE %.2e = %.1fx the noise floor %.0e after 10000 steps (bound 10x); "
              "repeat run %s",
              mse, mse / floor, floor, same ? "bit-identical" : "DIFFERS")};
}

// Shared RIR-estimation run for criteria 7 and 8.
struct RirRun {
  fs::path dir;
  fs::path report() const { return dir / "rir_report.json"; }
};

harness::HarnessConfig rir_run_config() {
  harness::HarnessConfig cfg;
  cfg.jobs = g_jobs;
  cfg.flow.train.seed = 5;
  cfg.eval.cfg_sweep = {3.0};
  return cfg;
}

void prepare_rir_run(const RirRun& run) {
  const auto t0 = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  };
  fs::remove_all(run.dir);
  fs::create_directories(run.dir);
  const harness::HarnessConfig cfg = rir_run_config();
  harness::DatasetRequest req;
  req.n_items = 800;
  req.seed = 2024;
  req.out_dir = run.dir / "dataset";
  const harness::Manifest manifest = harness::build_dataset(req, cfg);
  std::fprintf(stderr, "dataset of %zu items built in %.0f s\n", manifest.items.size(), elapsed());
  const flow::Checkpoint ck = harness::train_flow(manifest, flow::TaskKind::kRirEstimation, cfg);
  harness::audit_no_test_leak(manifest, ck);
  flow::save_checkpoint(ck, run.dir / "flow_rir.json");
  std::fprintf(stderr, "trained on %zu items by %.0f s\n", ck.train_ids.size(), elapsed());
  harness::RirEvalOptions opts;
  opts.checkpoint = run.dir / "flow_rir.json";
  const harness::EvalReport report = harness::run_rir_eval(manifest, opts, cfg);
  harness::write_report(report, run.dir, "rir_report");
  std::fprintf(stderr, "evaluated by %.0f s\n", elapsed());
}

harness::EvalReport load_rir_run(const RirRun& run) {
  if (!fs::exists(run.report())) prepare_rir_run(run);
  std::ifstream in(run.report());
  return harness::report_from_json(nlohmann::json::parse(in));
}

std::vector<double> column(const harness::EvalReport& r, const std::string& method,
                           const std::string& key) {
  std::vector<double> v;
  for (const auto& item : r.per_item) {
    if (item.method != method) continue;
    const auto it = item.metrics.find(key);
    if (it != item.metrics.end()) v.push_back(it->second);
  }
  return v;
}

std::vector<double> relative_rt60(const harness::EvalReport& r, const std::string& method) {
  std::vector<double> v;
  for (const auto& item : r.per_item) {
    if (item.method != method || !item.metrics.count("delta_rt60_ms") ||
        !item.metrics.count("reference_rt60_ms")) {
      continue;
    }
    v.push_back(item.metrics.at("delta_rt60_ms") / item.metrics.at("reference_rt60_ms"));
  }
  return v;
}

// 7. Guidance off is no worse than guidance 3 on RIR estimation.
Outcome cfg_finding(const RirRun& run) {
  const harness::EvalReport r = load_rir_run(run);
  const std::string cfg3 = harness::flow_method_label(3.0);
  const auto d1 = column(r, "flow", "delta_rt60_ms"), d3 = column(r, cfg3, "delta_rt60_ms");
  const double m1 = median(d1), m3 = median(d3);
  return {!d1.empty() && m1 <= m3,
          fmt("median dRT60 %.1f ms at cfg 1 vs %.1f ms at cfg 3 over %zu test items", m1, m3,
              d1.size())};
}

// 8. Trained model against the corpus-mean baseline and the roundtrip floor.
Outcome beats_baseline(const RirRun& run) {
  const harness::EvalReport r = load_rir_run(run);
  const double rt_flow = median(column(r, "flow", "delta_rt60_ms"));
  const double rt_mean = median(column(r, "mean_feature", "delta_rt60_ms"));
  const double edt_flow = median(column(r, "flow", "delta_edt_ms"));
  const double edt_mean = median(column(r, "mean_feature", "delta_edt_ms"));
  const double rel_flow = median(relative_rt60(r, "flow"));
  const double rel_floor = median(relative_rt60(r, "roundtrip"));
  const double drr_flow = median(column(r, "flow", "delta_drr_db"));
  const double drr_floor = median(column(r, "roundtrip", "delta_drr_db"));
  const bool beats = rt_flow < rt_mean && edt_flow < edt_mean;
  const bool within = rel_flow <= 3 * 0.10 && drr_flow <= 3 * 2.0;
  return {beats && within,
          fmt("median dRT60 %.1f vs mean-feature %.1f ms; dEDT %.1f vs %.1f ms; relative dRT60 "
              "%.1f%% (bound 30%%, roundtrip %.1f%%); dDRR %.2f dB (bound 6, roundtrip %.2f)",
              rt_flow, rt_mean, edt_flow, edt_mean, 100 * rel_flow, 100 * rel_floor, drr_flow,
              drr_floor)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// Everything a small end-to-end run writes, with report timestamps blanked.
std::map<std::string, std::string> end_to_end(const fs::path& dir) {
  harness::HarnessConfig cfg;
  cfg.jobs = g_jobs;
  cfg.flow.train.steps = 400;
  cfg.flow.train.hidden = 64;
  cfg.flow.train.seed = 8;
  cfg.flow.sample_seed = 13;
  cfg.flow.sample_steps = 8;
  harness::DatasetRequest req;
  req.n_items = 12;
  req.seed = 9;
  req.out_dir = dir / "dataset";
  const harness::Manifest m = harness::build_dataset(req, cfg);
  for (auto task : {flow::TaskKind::kRirEstimation, flow::TaskKind::kDereverb}) {
    flow::save_checkpoint(harness::train_flow(m, task, cfg),
                          dir / ("flow_" + flow::to_string(task) + ".json"));
  }
  harness::DereverbEvalOptions dopts;
  dopts.methods = {"none", "wpe", "flow"};
  dopts.checkpoint = dir / "flow_dereverb.json";
  dopts.audio_out = dir / "audio";
  harness::write_report(harness::run_dereverb_eval(m, dopts, cfg), dir, "dereverb_report");
  harness::RirEvalOptions ropts;
  ropts.checkpoint = dir / "flow_rir.json";
  harness::write_report(harness::run_rir_eval(m, ropts, cfg), dir, "rir_report");

  const std::regex stamp(R"(\d{4}-\d{2}-\d{2}T\d{2}:\d{2}:\d{2}Z)");
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    const std::string rel = fs::relative(e.path(), dir).string();
    std::string body = slurp(e.path());
    if (rel.find("_report.") != std::string::npos) body = std::regex_replace(body, stamp, "");
    files[rel] = body;
  }
  return files;
}

// 9. Byte-identical artifacts from identical seeds.
Outcome determinism() {
  test::TempDir a("accept_a"), b("accept_b");
  const auto fa = end_to_end(a.path()), fb = end_to_end(b.path());
  std::size_t same = 0;
  std::string first_diff;
  for (const auto& [rel, body] : fa) {
    const auto it = fb.find(rel);
    if (it != fb.end() && it->second == body) {
      ++same;
    } else if (first_diff.empty()) {
      first_diff = rel;
    }
  }
  const bool pass = same == fa.size() && fa.size() == fb.size();
  return {pass, fmt("%zu/%zu files identical across two runs (timestamps excluded)%s%s", same,
                    fa.size(), first_diff.empty() ? "" : "; first difference: ",
                    first_diff.c_str())};
}

// 10. STFT roundtrip and FFT convolution floors.
Outcome dsp_floor() {
  std::mt19937_64 rng(10);
  double stft_err = 0.0;
  for (int i = 0; i < 20; ++i) {
    const std::size_t n = 1000 + rng() % 40000;
    const audio::AudioBuffer x = test::noise(n, rng());
    const audio::AudioBuffer y = audio::istft(audio::stft(x));
    for (std::size_t k = 0; k < n; ++k) stft_err = std::max(stft_err, std::abs(x[k] - y[k]));
  }
  double conv_err = 0.0;
  for (int i = 0; i < 200; ++i) {
    const std::size_t n = 1 + rng() % 3000, m = 1 + rng() % 1500;
    const auto x = test::gaussian(n, rng()), h = test::gaussian(m, rng());
    const auto y = audio::convolve(x, h);
    std::vector<double> ref(n + m - 1, 0.0);
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = 0; q < m; ++q) ref[p + q] += x[p] * h[q];
    }
    double diff = 0.0, scale = 0.0;
    for (std::size_t k = 0; k < ref.size(); ++k) {
      diff = std::max(diff, std::abs(y[k] - ref[k]));
      scale = std::max(scale, std::abs(ref[k]));
    }
    conv_err = std::max(conv_err, diff / scale);
  }
  return {stft_err < 1e-6 && conv_err < 1e-8,
          fmt("STFT roundtrip max error %.1e over 20 signals (bound 1e-6); FFT convolution max "
              "relative error %.1e over 200 cases (bound 1e-8)",
              stft_err, conv_err)};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"roomflow acceptance suite"};
  std::vector<int> selected;
  std::string work = (fs::temp_directory_path() / "roomflow_acceptance").string();
  bool prepare = false;
  app.add_option("-c,--criterion", selected, "Criterion number (repeatable)")
      ->check(CLI::Range(1, 10));
  app.add_option("--work", work, "Directory for the shared RIR-estimation run");
  app.add_flag("--prepare", prepare, "Build the shared RIR-estimation run and exit");
  app.add_option("--jobs", g_jobs, "Worker threads")->check(CLI::PositiveNumber);
  CLI11_PARSE(app, argc, argv);

  const RirRun run{work};
  if (prepare) {
    try {
      prepare_rir_run(run);
    } catch (const std::exception& e) {
      std::fprintf(stderr, "prepare failed: %s\n", e.what());
      return 1;
    }
    return 0;
  }

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"oracle RT60 accuracy", oracle_rt60},
      {"image-source RT60 vs Eyring", eyring_crosscheck},
      {"identity deltas", identity_deltas},
      {"WPE direction", wpe_direction},
      {"flow gradient check", gradient_check},
      {"flow rotation toy", rotation_toy},
      {"guidance off vs on", [&] { return cfg_finding(run); }},
      {"RIR estimation vs baseline", [&] { return beats_baseline(run); }},
      {"end-to-end determinism", determinism},
      {"DSP floor", dsp_floor},
  };
  if (selected.empty()) {
    for (int i = 1; i <= 10; ++i) selected.push_back(i);
  }
  int failed = 0;
  for (int k : selected) {
    const auto& [title, fn] = criteria[static_cast<std::size_t>(k - 1)];
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s %d %s: %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", k, title.c_str(),
                o.detail.c_str(), secs);
    std::fflush(stdout);
    failed += !o.pass;
  }
  return failed == 0 ? 0 : 1;
}
