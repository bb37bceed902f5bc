#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>

#include "../support.hpp"
#include "roomflow/audio/convolve.hpp"
#include "roomflow/errors.hpp"
#include "roomflow/harness/speech_synth.hpp"
#include "roomflow/metrics/blind_rt60.hpp"
#include "roomflow/metrics/edc.hpp"
#include "roomflow/metrics/report.hpp"
#include "roomflow/metrics/rir_params.hpp"
#include "roomflow/metrics/srmr.hpp"
#include "roomflow/sim/corpus.hpp"
#include "roomflow/sim/image_source.hpp"
#include "roomflow/sim/synth.hpp"

using namespace roomflow;
using namespace roomflow::metrics;

namespace {

sim::Rir as_rir(std::vector<double> h) { return {audio::AudioBuffer(std::move(h), 16000), {}, {}}; }

const std::vector<sim::CorpusItem>& corpus50() {
  static const auto c = [] {
    sim::CorpusConfig cfg;
    cfg.jobs = 4;
    return sim::sample_corpus(50, 77, cfg);
  }();
  return c;
}

audio::AudioBuffer reverberate(const audio::AudioBuffer& clean, const audio::AudioBuffer& h) {
  return audio::convolve(clean, h).fitted(clean.size());
}

audio::AudioBuffer am_noise(double mod_hz, std::uint64_t seed) {
  auto v = test::gaussian(32000, seed, 0.1);
  for (std::size_t n = 0; n < v.size(); ++n) {
    v[n] *= 1.0 + std::sin(2.0 * std::numbers::pi * mod_hz * n / 16000.0);
  }
  return {v, 16000};
}

}  // namespace

TEST_CASE("edc normalization and monotonicity") {
  for (const auto& item : corpus50()) {
    const Edc c = edc(item.rir);
    REQUIRE(c.size() > 0);
    CHECK(c.values_db[0] == 0.0);
    bool monotone = true;
    for (std::size_t i = 1; i < c.size(); ++i) monotone &= c.values_db[i] <= c.values_db[i - 1] + 1e-9;
    CHECK(monotone);
  }
  CHECK_THROWS_AS(edc(as_rir(std::vector<double>(100, 0.0))), DegenerateError);
}

TEST_CASE("single impulse edc drops to the floor") {
  std::vector<double> h(200, 0.0);
  h[50] = 0.7;
  const Edc c = edc(as_rir(h));
  CHECK(c.values_db[0] == 0.0);
  CHECK(c.t0 == doctest::Approx(50.0 / 16000.0));
  for (std::size_t i = 1; i < c.size(); ++i) CHECK(c.values_db[i] == kEdcFloorDb);
  CHECK_THROWS_AS(rt60_from_edc(c), InsufficientDecayError);
  CHECK_THROWS_AS(edt_from_edc(c), InsufficientDecayError);
}

TEST_CASE("linear edc gives closed-form decay times") {
  Edc line;
  line.values_db.resize(16000);
  for (std::size_t i = 0; i < line.size(); ++i) line.values_db[i] = -120.0 * i / 16000.0;
  const DecayFit fit = rt60_from_edc(line);
  CHECK(fit.estimator == DecayEstimator::kT30);
  CHECK(fit.seconds == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(fit.slope_db_per_s == doctest::Approx(-120.0).epsilon(1e-12));
  CHECK(edt_from_edc(line) == doctest::Approx(0.5).epsilon(1e-12));

  // reaches only -30 dB: T20 fallback
  line.values_db.resize(4000);
  const DecayFit t20 = rt60_from_edc(line);
  CHECK(t20.estimator == DecayEstimator::kT20);
  CHECK(t20.seconds == doctest::Approx(0.5).epsilon(1e-12));
  line.values_db.resize(2800);  // -21 dB
  CHECK_THROWS_AS(rt60_from_edc(line), InsufficientDecayError);
}

TEST_CASE("synthetic exponential decay slope and edt") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const sim::Rir r = sim::synth_exponential_rir(0.5, 1.5, 16000, seed);
    const Edc c = edc(r);
    CHECK(fit_decay_slope(c, -5.0, -35.0) == doctest::Approx(-120.0).epsilon(0.05));
    const double t = rt60_from_edc(c).seconds;
    CHECK(edt_from_edc(c) == doctest::Approx(t).epsilon(0.1));
  }
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const double t = rt60_from_edc(edc(sim::synth_exponential_rir(1.0, 2.56, 16000, seed))).seconds;
    CHECK(t >= 0.95);
    CHECK(t <= 1.05);
  }
}

TEST_CASE("image-source rooms decay faster early than late") {
  int early_faster = 0;
  for (const auto& item : corpus50()) {
    const Edc c = edc(analysis_window(item.rir));
    if (edt_from_edc(c) < rt60_from_edc(c).seconds) ++early_faster;
  }
  MESSAGE(early_faster << "/50 rooms with EDT < RT60");
  CHECK(early_faster >= 45);
}

TEST_CASE("drr") {
  std::vector<double> h(1600, 0.0);
  h[100] = 1.0;
  // tail of energy 0.1 spread after the +-2.5 ms window
  for (std::size_t n = 300; n < 310; ++n) h[n] = std::sqrt(0.01);
  sim::Rir r = as_rir(h);
  CHECK(drr(r) == doctest::Approx(10.0).epsilon(1e-12));
  r.direct_delay = 100.0 / 16000.0;
  CHECK(drr(r) == doctest::Approx(10.0).epsilon(1e-12));

  sim::RoomSpec room;
  room.dims = {6.0, 5.0, 3.0};
  room.source = {1.0, 1.0, 1.5};
  room.receiver = {4.0, 3.0, 1.5};
  room.set_uniform_absorption(1.0);
  CHECK(drr(sim::simulate_rir(room)) == kDrrClampDb);
  CHECK_THROWS_AS(drr(as_rir(std::vector<double>(10, 0.0))), DegenerateError);

  std::vector<double> scaled = h, flipped = h;
  for (double& s : scaled) s *= 10.0;
  for (double& s : flipped) s = -s;
  CHECK(std::abs(drr(as_rir(scaled)) - drr(as_rir(h))) < 1e-9);
  CHECK(drr(as_rir(flipped)) == drr(as_rir(h)));
}

TEST_CASE("drr falls with source-receiver distance") {
  std::vector<double> dist, values;
  for (int i = 0; i < 20; ++i) {
    sim::RoomSpec room;
    room.dims = {9.0, 6.0, 3.0};
    room.set_uniform_absorption(0.3);
    room.max_order = 20;
    room.source = {0.8, 3.0, 1.5};
    room.receiver = {1.2 + 0.35 * i, 2.6, 1.4};
    dist.push_back(sim::distance(room.source, room.receiver));
    values.push_back(drr(sim::simulate_rir(room)));
  }
  CHECK(test::spearman(dist, values) < 0.0);
}

TEST_CASE("rir deltas") {
  for (std::size_t i = 0; i < 10; ++i) {
    const AcousticReport d = rir_delta(corpus50()[i].rir, corpus50()[i].rir);
    CHECK(*d.delta_rt60 == 0.0);
    CHECK(*d.delta_edt == 0.0);
    CHECK(*d.delta_drr == 0.0);
  }
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const AcousticReport d = rir_delta(sim::synth_exponential_rir(0.4, 1.0, 16000, seed),
                                       sim::synth_exponential_rir(0.6, 1.0, 16000, seed + 100));
    CHECK(*d.delta_rt60 >= 0.17);
    CHECK(*d.delta_rt60 <= 0.23);
  }
  std::vector<double> impulse(100, 0.0);
  impulse[3] = 1.0;
  try {
    rir_delta(as_rir(impulse), corpus50()[0].rir);
    FAIL("expected an analysis error");
  } catch (const InsufficientDecayError& e) {
    CHECK(std::string(e.what()).find("predicted") != std::string::npos);
  }
}

TEST_CASE("metrics ignore polarity") {
  const sim::Rir r = corpus50()[3].rir;
  std::vector<double> neg(r.h.samples());
  for (double& s : neg) s = -s;
  const sim::Rir n{audio::AudioBuffer(neg, 16000), r.room, r.direct_delay};
  const auto a = analyze_rir(analysis_window(r));
  const auto b = analyze_rir(analysis_window(n));
  CHECK(a.rt60 == b.rt60);
  CHECK(a.edt == b.edt);
  CHECK(a.drr == b.drr);
  const audio::AudioBuffer s = harness::synth_speech(4);
  CHECK(srmr(s) == doctest::Approx(srmr(s.scaled(-1.0))).epsilon(1e-12));
}

TEST_CASE("report json and invariants") {
  AcousticReport r;
  r.rt60 = 0.4;
  r.delta_drr = 1.5;
  nlohmann::json j = r;
  CHECK(j.size() == 2);
  CHECK(j["rt60"] == 0.4);
  CHECK(j.get<AcousticReport>() == r);
  CHECK_NOTHROW(validate(r));
  r.drr = 90.0;
  CHECK_THROWS_AS(validate(r), ConfigError);
  r.drr.reset();
  r.delta_edt = -0.1;
  CHECK_THROWS_AS(validate(r), ConfigError);
  r.delta_edt.reset();
  r.rt60 = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(validate(r), ConfigError);
}

TEST_CASE("blind rt60 on known decays") {
  std::vector<double> errors;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const audio::AudioBuffer clean = harness::synth_speech(seed);
    const auto h = sim::synth_exponential_rir(0.5, 0.5, 16000, seed + 50).h;
    const double est = blind_rt60(reverberate(clean, h));
    errors.push_back(std::abs(est - 0.5));
    const double clean_est = blind_rt60(clean);
    CHECK(rte(reverberate(clean, h), clean) == doctest::Approx(std::abs(est - clean_est)));
    CHECK(std::abs(rte(reverberate(clean, h), clean) - (0.5 - clean_est)) <= 0.15);
  }
  for (double e : errors) CHECK(e <= 0.15);
  CHECK_THROWS_AS(blind_rt60(audio::AudioBuffer(std::vector<double>(32000, 0.0), 16000)), SilenceError);
  CHECK_THROWS_AS(blind_rt60(harness::synth_speech(1).slice(0, 8000)), LengthError);
  const audio::AudioBuffer x = harness::synth_speech(3);
  CHECK(rte(x, x) == 0.0);
  const audio::AudioBuffer y = reverberate(x, sim::synth_exponential_rir(0.3, 0.3, 16000, 1).h);
  CHECK(rte(x, y) == rte(y, x));
}

TEST_CASE("reverberation raises blind rt60 and lowers srmr across a corpus") {
  int rt_up = 0, srmr_down = 0;
  const auto& c = corpus50();
  for (std::size_t i = 0; i < c.size(); ++i) {
    const audio::AudioBuffer clean = harness::synth_speech(1000 + i);
    const audio::AudioBuffer rev = reverberate(clean, c[i].rir.h);
    if (blind_rt60(rev) > blind_rt60(clean)) ++rt_up;
    if (srmr(clean) > srmr(rev)) ++srmr_down;
  }
  MESSAGE("blind rt60 up on " << rt_up << "/50, srmr down on " << srmr_down << "/50");
  CHECK(rt_up >= 48);
  CHECK(srmr_down >= 45);
}

TEST_CASE("srmr of modulated noise against a reference pipeline") {
  // Means over 8 noise draws from an independent IIR-gammatone / Hilbert /
  // framed-energy implementation; the filter shapes differ, hence 15%.
  const std::vector<std::pair<double, double>> reference{
      {0.0, 0.27022}, {4.0, 2.75850}, {100.0, 0.10758}};
  for (const auto& [mod_hz, expected] : reference) {
    double mean = 0.0;
    for (std::uint64_t seed = 0; seed < 8; ++seed) {
      mean += srmr(mod_hz > 0.0 ? am_noise(mod_hz, seed)
                                : audio::AudioBuffer(test::gaussian(32000, seed, 0.1), 16000));
    }
    mean /= 8.0;
    MESSAGE("srmr at " << mod_hz << " Hz modulation: " << mean);
    CHECK(mean == doctest::Approx(expected).epsilon(0.15));
  }
  CHECK(srmr(am_noise(4.0, 1)) > 1.0);
  CHECK(srmr(am_noise(100.0, 2)) < 1.0);
  const audio::AudioBuffer s = harness::synth_speech(8);
  CHECK(srmr(s.scaled(7.5)) == doctest::Approx(srmr(s)).epsilon(1e-6));
  CHECK_THROWS_AS(srmr(audio::AudioBuffer(std::vector<double>(16000, 0.0), 16000)), SilenceError);
  CHECK_THROWS_AS(srmr(s.slice(0, 4000)), LengthError);
  CHECK(modulation_centers()[0] == doctest::Approx(4.0));
  CHECK(modulation_centers()[7] == doctest::Approx(128.0));
  const auto erb = erb_space(125.0, 8000.0, 23);
  CHECK(erb.size() == 23);
  CHECK(erb.front() == doctest::Approx(8000.0).epsilon(0.2));
  CHECK(erb.back() == doctest::Approx(125.0).epsilon(1e-9));
}

TEST_CASE("metric determinism") {
  const audio::AudioBuffer x = reverberate(harness::synth_speech(12), corpus50()[5].rir.h);
  CHECK(blind_rt60(x) == blind_rt60(x));
  CHECK(srmr(x) == srmr(x));
  const auto a = rir_delta(corpus50()[1].rir, corpus50()[2].rir);
  const auto b = rir_delta(corpus50()[1].rir, corpus50()[2].rir);
  CHECK(a == b);
}
