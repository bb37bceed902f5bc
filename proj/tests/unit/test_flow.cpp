#include <doctest.h>
#include <json.hpp>

#include <cmath>
#include <fstream>
#include <random>

#include "../support.hpp"
#include "roomflow/errors.hpp"
#include "roomflow/flow/checkpoint.hpp"
#include "roomflow/flow/features.hpp"
#include "roomflow/flow/loss.hpp"
#include "roomflow/flow/model.hpp"
#include "roomflow/flow/sample.hpp"
#include "roomflow/flow/train.hpp"
#include "roomflow/harness/speech_synth.hpp"
#include "roomflow/metrics/rir_params.hpp"
#include "roomflow/sim/corpus.hpp"
#include "roomflow/sim/synth.hpp"

using namespace roomflow;
using namespace roomflow::flow;

namespace {

VectorXd randn(Index n, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> d(0.0, scale);
  VectorXd v(n);
  for (Index i = 0; i < n; ++i) v[i] = d(rng);
  return v;
}

// Output layer offset: W3 and b3 sit just before the null condition.
Index output_layer_offset(const FlowModel& m) {
  const FlowDims& d = m.dims();
  return m.null_condition_offset() - d.d_x * d.hidden - d.d_x;
}

FlowTrainConfig small_config(long steps, std::uint64_t seed = 0) {
  FlowTrainConfig c;
  c.steps = steps;
  c.seed = seed;
  c.hidden = 64;
  c.time_embed = 16;
  return c;
}

std::vector<FlowPair> rotation_pairs(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<FlowPair> pairs;
  for (std::size_t i = 0; i < n; ++i) {
    const VectorXd c = randn(2, rng);
    VectorXd y(2);
    y << -c[1], c[0];
    pairs.push_back({c, y + randn(2, rng, 0.01)});
  }
  return pairs;
}

sim::Rir make_rir(std::vector<double> h) { return {audio::AudioBuffer(std::move(h), 16000), {}, {}}; }

}  // namespace

TEST_CASE("time embedding") {
  const VectorXd e = time_embedding(0.0, 8);
  REQUIRE(e.size() == 8);
  for (Index k = 0; k < 4; ++k) {
    CHECK(e[k] == 0.0);
    CHECK(e[4 + k] == 1.0);
  }
  CHECK_THROWS_AS(time_embedding(0.5, 7), ShapeError);
}

TEST_CASE("analytic gradient matches central differences") {
  std::mt19937_64 rng(7);
  double worst = 0.0;
  for (int cfg = 0; cfg < 20; ++cfg) {
    const FlowDims d{1 + static_cast<Index>(rng() % 5), 1 + static_cast<Index>(rng() % 4),
                     2 + static_cast<Index>(rng() % 8), 2 * (1 + static_cast<Index>(rng() % 4))};
    FlowModel m(d, rng());
    const VectorXd theta = m.parameters() + randn(m.parameter_count(), rng, 0.3);
    m.set_parameters(theta);
    const VectorXd x1 = randn(d.d_x, rng), x0 = randn(d.d_x, rng), c = randn(d.d_c, rng);
    const double t = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    const bool drop = cfg % 3 == 0;
    const double sigma = cfg % 2 ? 0.05 : 0.0;
    const LossResult r = flow_loss(m, x1, c, x0, t, sigma, drop);
    const double h = 1e-5;
    for (Index i = 0; i < m.parameter_count(); ++i) {
      VectorXd p = theta;
      p[i] += h;
      m.set_parameters(p);
      const double lp = flow_loss(m, x1, c, x0, t, sigma, drop).loss;
      p[i] = theta[i] - h;
      m.set_parameters(p);
      const double lm = flow_loss(m, x1, c, x0, t, sigma, drop).loss;
      const double num = (lp - lm) / (2.0 * h);
      const double a = r.gradient[i];
      worst = std::max(worst, std::abs(a - num) / std::max({std::abs(a), std::abs(num), 1e-8}));
    }
    m.set_parameters(theta);
  }
  MESSAGE("worst relative gradient error " << worst);
  CHECK(worst < 1e-4);
}

TEST_CASE("loss vanishes when source equals target and the field is zero") {
  FlowModel m(FlowDims{3, 2, 8, 4}, 1);
  VectorXd theta = m.parameters();
  theta.segment(output_layer_offset(m), 3 * 8 + 3).setZero();
  m.set_parameters(theta);
  std::mt19937_64 rng(2);
  const VectorXd x = randn(3, rng), c = randn(2, rng);
  for (double t : {0.0, 0.3, 1.0}) {
    const LossResult r = flow_loss(m, x, c, x, t);
    CHECK(r.loss == 0.0);
    CHECK(r.gradient.norm() == 0.0);
  }
}

TEST_CASE("path point") {
  VectorXd x0(2), x1(2);
  x0 << 1.0, -2.0;
  x1 << 3.0, 0.5;
  const PathPoint p = path_point(x0, x1, 0.25, 0.05);
  CHECK(p.xt[0] == doctest::Approx(0.75 * 1.0 + 0.25 * 3.0 + 0.05 * 0.75 * 1.0));
  CHECK(p.u[1] == doctest::Approx(0.5 - 1.05 * -2.0));
}

TEST_CASE("batch loss is invariant to column order") {
  FlowModel m(FlowDims{3, 2, 16, 8}, 4);
  std::mt19937_64 rng(5);
  const Index n = 6;
  MatrixXd x1(3, n), x0(3, n), c(2, n);
  VectorXd t(n);
  for (Index j = 0; j < n; ++j) {
    x1.col(j) = randn(3, rng);
    x0.col(j) = randn(3, rng);
    c.col(j) = randn(2, rng);
    t[j] = (j + 0.5) / n;
  }
  std::vector<bool> drop{true, false, false, true, false, false};
  const LossResult a = flow_loss_batch(m, x1, c, x0, t, 0.0, drop);
  const std::vector<Index> perm{4, 2, 0, 5, 1, 3};
  MatrixXd px1(3, n), px0(3, n), pc(2, n);
  VectorXd pt(n);
  std::vector<bool> pdrop(n);
  for (Index j = 0; j < n; ++j) {
    px1.col(j) = x1.col(perm[j]);
    px0.col(j) = x0.col(perm[j]);
    pc.col(j) = c.col(perm[j]);
    pt[j] = t[perm[j]];
    pdrop[j] = drop[perm[j]];
  }
  const LossResult b = flow_loss_batch(m, px1, pc, px0, pt, 0.0, pdrop);
  CHECK(b.loss == doctest::Approx(a.loss).epsilon(1e-12));
  CHECK((b.gradient - a.gradient).norm() <= 1e-12 * a.gradient.norm());

  double mean = 0.0;
  for (Index j = 0; j < n; ++j) {
    mean += flow_loss(m, x1.col(j), c.col(j), x0.col(j), t[j], 0.0, drop[j]).loss / n;
  }
  CHECK(a.loss == doctest::Approx(mean).epsilon(1e-12));
}

TEST_CASE("shape and range errors") {
  FlowModel m(FlowDims{3, 2, 8, 4}, 1);
  const VectorXd x3 = VectorXd::Zero(3), x2 = VectorXd::Zero(2), x4 = VectorXd::Zero(4);
  CHECK_THROWS_AS(flow_loss(m, x4, x2, x3, 0.5), ShapeError);
  CHECK_THROWS_AS(flow_loss(m, x3, x3, x3, 0.5), ShapeError);
  CHECK_THROWS_AS(flow_loss(m, x3, x2, x3, 1.5), ConfigError);
  CHECK_THROWS_AS(flow_loss(m, x3, x2, x3, 0.5, 0.2), ConfigError);
  CHECK_THROWS_AS(m.set_parameters(VectorXd::Zero(5)), ShapeError);
  CHECK_THROWS_AS(sample_from(m, x2, x3, 0), ConfigError);
  CHECK_THROWS_AS(sample_from(m, x3, x3, 4), ShapeError);

  FlowTrainConfig c = small_config(10);
  CHECK_THROWS_AS(train({}, c), ConfigError);
  CHECK_THROWS_AS(train({{x2, x3}, {x2, x4}}, c), ShapeError);
  c.steps = 0;
  CHECK_THROWS_AS(validate(c), ConfigError);
  c = small_config(10);
  c.cond_drop_prob = 1.0;
  CHECK_THROWS_AS(validate(c), ConfigError);
  c = small_config(10);
  c.lr = 0.0;
  CHECK_THROWS_AS(validate(c), ConfigError);
}

TEST_CASE("training is deterministic given a seed") {
  const auto pairs = rotation_pairs(100, 3);
  const TrainResult a = train(pairs, small_config(200, 11));
  const TrainResult b = train(pairs, small_config(200, 11));
  const TrainResult c = train(pairs, small_config(200, 12));
  CHECK(a.model.hash() == b.model.hash());
  CHECK(a.loss_curve == b.loss_curve);
  CHECK(a.model.hash() != c.model.hash());
  CHECK(a.loss_curve.size() == 200);
  CHECK(a.loss_curve.back() < a.loss_curve.front());
}

TEST_CASE("constant dataset is reproduced") {
  std::mt19937_64 rng(21);
  const FlowPair p{randn(3, rng), randn(4, rng)};
  FlowTrainConfig c;
  c.steps = 5000;
  c.seed = 1;
  const TrainResult r = train({p}, c);
  std::vector<double> errors;
  for (std::uint64_t s = 0; s < 20; ++s) {
    errors.push_back((sample(r.model, p.condition, 32, s) - p.target).norm());
  }
  // typical draw; single draws from the far tail of the source land further out
  MESSAGE("terminal error median " << test::median(errors) << ", worst "
                                   << *std::max_element(errors.begin(), errors.end()));
  CHECK(test::median(errors) < 0.05);
}

TEST_CASE("a fixed source and a single target give a straight path") {
  std::mt19937_64 rng(8);
  const FlowPair p{randn(2, rng), randn(3, rng)};
  FlowTrainConfig c = small_config(3000, 2);
  c.fixed_source = randn(3, rng);
  const TrainResult r = train({p}, c);
  for (int steps : {1, 2, 4, 8, 32, 128}) {
    const double err = (sample_from(r.model, p.condition, *c.fixed_source, steps) - p.target).norm();
    CAPTURE(steps);
    CHECK(err < 0.05);
  }
}

TEST_CASE("unit guidance is the conditional sampler bit for bit") {
  const TrainResult r = train(rotation_pairs(200, 4), small_config(300, 5));
  std::mt19937_64 rng(9);
  for (int i = 0; i < 5; ++i) {
    const VectorXd c = randn(2, rng), x0 = randn(2, rng);
    const VectorXd a = sample_from(r.model, c, x0, 16, 1.0);
    const VectorXd b = sample_conditional(r.model, c, x0, 16);
    CHECK(a.cwiseEqual(b).all());
    CHECK_FALSE(sample_from(r.model, c, x0, 16, 3.0).cwiseEqual(a).all());
  }
  const VectorXd c = randn(2, rng);
  CHECK(sample(r.model, c, 8, 42).cwiseEqual(sample(r.model, c, 8, 42)).all());
}

TEST_CASE("euler samples converge as steps increase") {
  const TrainResult r = train(rotation_pairs(500, 6), small_config(2000, 7));
  std::vector<double> fine, coarse;
  std::mt19937_64 rng(10);
  for (std::uint64_t s = 0; s < 50; ++s) {
    const VectorXd c = randn(2, rng);
    const VectorXd x0 = source_sample(2, s);
    fine.push_back((sample_from(r.model, c, x0, 256) - sample_from(r.model, c, x0, 128)).norm());
    coarse.push_back((sample_from(r.model, c, x0, 8) - sample_from(r.model, c, x0, 4)).norm());
  }
  MESSAGE("median |s256-s128| " << test::median(fine) << ", |s8-s4| " << test::median(coarse));
  CHECK(test::median(fine) < test::median(coarse));
}

TEST_CASE("divergence is reported") {
  FlowModel m(FlowDims{2, 1, 4, 4}, 3);
  VectorXd theta = m.parameters();
  theta.segment(output_layer_offset(m), 2 * 4).setZero();
  theta.segment(output_layer_offset(m) + 2 * 4, 2).setConstant(1e308);
  m.set_parameters(theta);
  CHECK_THROWS_AS(sample_from(m, VectorXd::Ones(1), VectorXd::Constant(2, 1e308), 4),
                  SampleDivergedError);

  VectorXd huge(2);
  huge << 1e5, -1e5;
  try {
    train({{VectorXd::Ones(1), huge}}, small_config(50));
    FAIL("expected divergence");
  } catch (const TrainingDivergedError& e) {
    CHECK(e.step() >= 0);
    CHECK(e.step() < 50);
  }
}

TEST_CASE("speech feature") {
  const audio::AudioBuffer s = harness::synth_speech(3);
  const VectorXd a = speech_feature(s);
  CHECK(a.size() == kSpeechFeatureDim);
  CHECK(a.allFinite());
  CHECK(a.cwiseEqual(speech_feature(s)).all());
  CHECK_THROWS_AS(speech_feature(audio::AudioBuffer(std::vector<double>(40960, 0.0), 16000)),
                  SilenceError);
  CHECK_THROWS_AS(speech_feature(audio::AudioBuffer(test::gaussian(20480, 1), 8000)), RateError);
}

TEST_CASE("rir feature layout and gain behaviour") {
  CHECK(edc_point_time(0) == 0.0);
  CHECK(edc_point_time(63) == doctest::Approx(2.56));
  const sim::Rir r = sim::synth_exponential_rir(0.6, 1.0, 16000, 4);
  const VectorXd f = rir_feature(r);
  REQUIRE(f.size() == kRirFeatureDim);
  CHECK(f[0] == doctest::Approx(0.0).epsilon(1e-12));
  for (Index j = 1; j < kEdcPoints; ++j) CHECK(f[j] <= f[j - 1]);
  std::vector<double> scaled = r.h.samples();
  for (double& v : scaled) v *= -0.3;
  const VectorXd g = rir_feature(make_rir(scaled));
  CHECK((g.head(kEdcPoints) - f.head(kEdcPoints)).cwiseAbs().maxCoeff() < 1e-9);
  CHECK(g[kEdcPoints] - f[kEdcPoints] == doctest::Approx(std::log10(0.09)).epsilon(1e-9));
  CHECK(g[kEdcPoints + 1] == doctest::Approx(f[kEdcPoints + 1]).epsilon(1e-9));
  CHECK_THROWS_AS(rir_feature(make_rir(std::vector<double>(16000, 0.0))), SilenceError);
  CHECK(rir_feature(r).cwiseEqual(f).all());
}

TEST_CASE("late edc dims rise with rt60") {
  std::vector<double> t60s;
  std::vector<std::vector<double>> dims(kEdcPoints);
  for (int k = 0; k < 12; ++k) {
    const double t60 = 0.2 + 0.1 * k;
    t60s.push_back(t60);
    const VectorXd f = rir_feature(sim::synth_exponential_rir(t60, 2.0 * t60 + 0.5, 16000, 77 + k));
    for (Index j = 0; j < kEdcPoints; ++j) dims[j].push_back(f[j]);
  }
  for (Index j = 32; j < kEdcPoints; ++j) {
    CAPTURE(j);
    CHECK(test::spearman(t60s, dims[j]) > 0.95);
  }
}

TEST_CASE("pool adjacent violators matches the reference fit") {
  const std::vector<double> y{0, -3, -2, -8, -7.5, -7, -12, -11, -20, -19.5};
  const std::vector<double> want{0, -2.5, -2.5, -7.5, -7.5, -7.5, -11.5, -11.5, -19.75, -19.75};
  const auto got = nonincreasing_projection(y);
  REQUIRE(got.size() == want.size());
  for (std::size_t i = 0; i < want.size(); ++i) CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-12));
  const std::vector<double> mono{3, 1, 1, -2};
  CHECK(nonincreasing_projection(mono) == mono);
}

TEST_CASE("defeaturized rir reproduces its parameters") {
  sim::CorpusConfig cc;
  cc.jobs = 4;
  const auto corpus = sim::sample_corpus(20, 55, cc);
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto want = metrics::analyze_rir(corpus[i].rir);
    const DefeaturizedRir d = defeaturize_rir(rir_feature(corpus[i].rir), i);
    CHECK_FALSE(d.projected);
    const auto got = metrics::analyze_rir(d.rir);
    CAPTURE(i);
    CHECK(std::abs(got.rt60 - want.rt60) <= 0.1 * want.rt60);
    CHECK(std::abs(got.drr - want.drr) <= 2.0);
  }
}

TEST_CASE("flat decay feature gives the matching rt60") {
  VectorXd f(kRirFeatureDim);
  for (Index j = 0; j < kEdcPoints; ++j) f[j] = -120.0 * edc_point_time(j);
  f[kEdcPoints] = -2.0;
  f[kEdcPoints + 1] = 5.0;
  const DefeaturizedRir a = defeaturize_rir(f, 3);
  const DefeaturizedRir b = defeaturize_rir(f, 3);
  CHECK(a.rir.h.samples() == b.rir.h.samples());
  CHECK_FALSE(a.projected);
  const auto p = metrics::analyze_rir(a.rir);
  CHECK(p.rt60 == doctest::Approx(0.5).epsilon(0.05));
  CHECK(p.drr == doctest::Approx(5.0).epsilon(0.4));

  f[10] = f[5] + 3.0;
  CHECK(defeaturize_rir(f, 3).projected);
  CHECK_THROWS_AS(defeaturize_rir(VectorXd::Zero(10)), ShapeError);
  f[2] = std::nan("");
  CHECK_THROWS_AS(defeaturize_rir(f), ShapeError);
}

TEST_CASE("normalizer") {
  std::mt19937_64 rng(12);
  std::vector<VectorXd> xs;
  for (int i = 0; i < 200; ++i) {
    VectorXd v(3);
    v << 5.0 + 2.0 * randn(1, rng)[0], -1.0 + 0.1 * randn(1, rng)[0], 7.0;
    xs.push_back(v);
  }
  const Normalizer n = Normalizer::fit(xs);
  CHECK(n.scale[2] == 1.0);
  VectorXd sum = VectorXd::Zero(3), sq = VectorXd::Zero(3);
  for (const auto& x : xs) {
    const VectorXd z = n.apply(x);
    sum += z;
    sq += z.cwiseProduct(z);
    CHECK((n.invert(z) - x).norm() < 1e-12);
  }
  CHECK(std::abs(sum[0] / 200) < 1e-12);
  CHECK(sq[0] / 200 == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(sq[1] / 200 == doctest::Approx(1.0).epsilon(1e-9));
  CHECK_THROWS_AS(Normalizer::fit({}), ConfigError);
  CHECK_THROWS_AS(Normalizer::fit({VectorXd::Zero(2), VectorXd::Zero(3)}), ShapeError);
}

TEST_CASE("checkpoint roundtrip and refusal") {
  test::TempDir dir("ckpt");
  const auto pairs = rotation_pairs(50, 13);
  Checkpoint ck;
  ck.task = TaskKind::kDereverb;
  ck.train_config = small_config(30, 3);
  TrainResult r = train(pairs, ck.train_config);
  ck.model = r.model;
  std::vector<VectorXd> cs, ts;
  for (const auto& p : pairs) {
    cs.push_back(p.condition);
    ts.push_back(p.target);
  }
  ck.condition_norm = Normalizer::fit(cs);
  ck.target_norm = Normalizer::fit(ts);
  ck.train_ids = {"a", "b"};
  ck.loss_curve = r.loss_curve;
  const auto path = dir / "ck.json";
  save_checkpoint(ck, path);
  const Checkpoint back = load_checkpoint(path);
  CHECK(back.task == TaskKind::kDereverb);
  CHECK(back.model.hash() == ck.model.hash());
  CHECK(back.model.dims() == ck.model.dims());
  CHECK(back.condition_norm.mean.cwiseEqual(ck.condition_norm.mean).all());
  CHECK(back.target_norm.scale.cwiseEqual(ck.target_norm.scale).all());
  CHECK(back.train_ids == ck.train_ids);
  CHECK(back.loss_curve == ck.loss_curve);
  CHECK(back.train_config.seed == 3);

  nlohmann::json j;
  std::ifstream(path) >> j;
  auto write = [&](const nlohmann::json& v) {
    std::ofstream(dir / "bad.json") << v.dump();
    return dir / "bad.json";
  };
  nlohmann::json v = j;
  v["format_version"] = kCheckpointFormatVersion + 1;
  CHECK_THROWS_AS(load_checkpoint(write(v)), FormatError);
  v = j;
  v["parameters"].erase(v["parameters"].size() - 1);
  CHECK_THROWS_AS(load_checkpoint(write(v)), ShapeError);
  CHECK_THROWS_AS(load_checkpoint(dir / "missing.json"), IoError);
  std::ofstream(dir / "junk.json") << "{not json";
  CHECK_THROWS_AS(load_checkpoint(dir / "junk.json"), FormatError);
}
