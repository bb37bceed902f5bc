#include "roomflow/audio/convolve.hpp"

#include <algorithm>
#include <string>

#include "roomflow/audio/fft.hpp"
#include "roomflow/errors.hpp"

namespace roomflow::audio {
namespace {

constexpr std::size_t kDirectMaxTaps = 32;

std::vector<double> convolve_direct(std::span<const double> x,
                                    std::span<const double> h) {
  std::vector<double> y(x.size() + h.size() - 1, 0.0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] == 0.0) continue;
    for (std::size_t k = 0; k < h.size(); ++k) y[i + k] += x[i] * h[k];
  }
  return y;
}

// Uniformly partitioned overlap-add. The kernel is cut into blocks of B
// taps, each transformed at size 2B; output block m accumulates
// X_{m-p}·H_p in the frequency domain before a single inverse transform.
std::vector<double> convolve_partitioned(std::span<const double> x,
                                         std::span<const double> h) {
  const std::size_t block = partition_size(h.size());
  const std::size_t n_fft = 2 * block;
  const FftPlan plan(n_fft);
  const std::size_t bins = block + 1;

  const std::size_t n_parts = (h.size() + block - 1) / block;
  const std::size_t n_in = (x.size() + block - 1) / block;
  const std::size_t out_len = x.size() + h.size() - 1;
  const std::size_t n_out = (out_len + block - 1) / block;

  auto spectra = [&](std::span<const double> v, std::size_t count) {
    std::vector<std::vector<Complex>> out(count);
    for (std::size_t p = 0; p < count; ++p) {
      const std::size_t begin = p * block;
      const std::size_t len = std::min(block, v.size() - begin);
      out[p] = plan.forward_real(v.subspan(begin, len));
    }
    return out;
  };
  const auto kernel_parts = spectra(h, n_parts);
  const auto input_blocks = spectra(x, n_in);

  std::vector<double> y(n_out * block + block, 0.0);
  std::vector<Complex> acc(bins);
  for (std::size_t m = 0; m < n_out; ++m) {
    std::fill(acc.begin(), acc.end(), Complex{});
    const std::size_t p_lo = m >= n_in ? m - n_in + 1 : 0;
    const std::size_t p_hi = std::min(m, n_parts - 1);
    for (std::size_t p = p_lo; p <= p_hi; ++p) {
      const auto& xb = input_blocks[m - p];
      const auto& hb = kernel_parts[p];
      for (std::size_t k = 0; k < bins; ++k) acc[k] += xb[k] * hb[k];
    }
    const auto time = plan.inverse_real(acc);
    double* dst = y.data() + m * block;
    for (std::size_t i = 0; i < n_fft; ++i) dst[i] += time[i];
  }
  y.resize(out_len);
  return y;
}

}  // namespace

std::size_t partition_size(std::size_t kernel_size) {
  return std::clamp<std::size_t>(next_power_of_two(kernel_size), 64, 4096);
}

std::vector<double> convolve(std::span<const double> signal,
                             std::span<const double> kernel) {
  if (signal.empty() || kernel.empty()) return {};
  if (kernel.size() <= kDirectMaxTaps || signal.size() <= kDirectMaxTaps) {
    return signal.size() >= kernel.size() ? convolve_direct(signal, kernel)
                                          : convolve_direct(kernel, signal);
  }
  return convolve_partitioned(signal, kernel);
}

AudioBuffer convolve(const AudioBuffer& signal, const AudioBuffer& kernel) {
  if (signal.sample_rate() != kernel.sample_rate()) {
    throw RateError("cannot convolve " + std::to_string(signal.sample_rate()) +
                    " Hz signal with " + std::to_string(kernel.sample_rate()) +
                    " Hz kernel");
  }
  return AudioBuffer(convolve(signal.view(), kernel.view()), signal.sample_rate());
}

}  // namespace roomflow::audio
