#include "roomflow/wpe/wpe.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "roomflow/errors.hpp"

namespace roomflow::wpe {

using audio::Complex;

void validate(const WpeConfig& config) {
  if (config.taps < 1 || config.delay < 1 || config.iterations < 1) {
    throw ConfigError("WPE needs taps >= 1, delay >= 1 and iterations >= 1");
  }
  if (!(config.epsilon > 0.0)) throw ConfigError("WPE epsilon must be positive");
  audio::validate(config.stft);
}

namespace {

using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

CVector solve_hermitian(const CMatrix& a, const CVector& b) {
  const CMatrix sym = 0.5 * (a + a.adjoint());
  Eigen::LLT<CMatrix> llt(sym);
  if (llt.info() == Eigen::Success) return llt.solve(b);
  return sym.completeOrthogonalDecomposition().solve(b);
}

}  // namespace

WpeResult wpe_dereverb_detailed(const audio::AudioBuffer& input, const WpeConfig& config) {
  validate(config);
  if (input.sample_rate() != audio::kDefaultSampleRate) {
    throw RateError("WPE expects 16 kHz input, got " + std::to_string(input.sample_rate()) +
                    " Hz");
  }
  audio::Spectrogram spec = audio::stft(input, config.stft);
  const auto K = static_cast<std::size_t>(config.taps);
  const auto D = static_cast<std::size_t>(config.delay);
  const std::size_t T = spec.n_frames;
  if (T < K + D + 1) {
    throw LengthError("WPE needs at least " + std::to_string(K + D + 1) +
                      " STFT frames, input has " + std::to_string(T));
  }
  const std::size_t first = D + K - 1;

  WpeResult result;
  result.filter_norms.resize(spec.n_bins, 0.0);
  audio::Spectrogram out = spec;
  std::vector<Complex> x(T);
  std::vector<Complex> d(T);
  std::vector<double> weight(T);
  CMatrix R(K, K);
  CVector r(K);
  CVector g = CVector::Zero(K);
  CVector ctx(K);

  for (std::size_t f = 0; f < spec.n_bins; ++f) {
    for (std::size_t t = 0; t < T; ++t) x[t] = spec.at(t, f);
    d = x;
    g.setZero();
    for (int it = 0; it < config.iterations; ++it) {
      for (std::size_t t = first; t < T; ++t) {
        weight[t] = 1.0 / std::max(std::norm(d[t]), config.epsilon);
      }
      R.setZero();
      r.setZero();
      for (std::size_t t = first; t < T; ++t) {
        for (std::size_t k = 0; k < K; ++k) ctx[k] = x[t - D - k];
        R.noalias() += weight[t] * (ctx * ctx.adjoint());
        r.noalias() += weight[t] * ctx * std::conj(x[t]);
      }
      const double trace = R.trace().real();
      if (!(trace > 0.0)) {
        g.setZero();
        break;
      }
      const double delta = 1e-6 * trace / static_cast<double>(K);
      g = solve_hermitian(R + delta * CMatrix::Identity(K, K), r);
      for (std::size_t t = first; t < T; ++t) {
        Complex pred{};
        for (std::size_t k = 0; k < K; ++k) pred += std::conj(g[k]) * x[t - D - k];
        d[t] = x[t] - pred;
      }
    }
    result.filter_norms[f] = g.norm();
    for (std::size_t t = 0; t < T; ++t) out.at(t, f) = d[t];
  }
  result.output = audio::istft(out);
  return result;
}

audio::AudioBuffer wpe_dereverb(const audio::AudioBuffer& input, const WpeConfig& config) {
  return wpe_dereverb_detailed(input, config).output;
}

}  // namespace roomflow::wpe
