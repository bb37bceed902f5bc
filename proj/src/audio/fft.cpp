#include "roomflow/audio/fft.hpp"

#include <cmath>
#include <numbers>
#include <string>
#include <utility>

#include "roomflow/errors.hpp"

namespace roomflow::audio {

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

std::size_t next_power_of_two(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

FftPlan::FftPlan(std::size_t n) : n_(n), bitrev_(n), twiddles_(n / 2) {
  if (!is_power_of_two(n)) {
    throw ConfigError("FFT size must be a power of two, got " +
                      std::to_string(n));
  }
  std::size_t bits = 0;
  while ((std::size_t{1} << bits) < n) ++bits;
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t r = 0;
    for (std::size_t b = 0; b < bits; ++b) {
      if (i & (std::size_t{1} << b)) r |= std::size_t{1} << (bits - 1 - b);
    }
    bitrev_[i] = r;
  }
  for (std::size_t k = 0; k < n / 2; ++k) {
    const double angle =
        -2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
    twiddles_[k] = Complex(std::cos(angle), std::sin(angle));
  }
}

void FftPlan::transform(std::span<Complex> data, bool inverse) const {
  if (data.size() != n_) {
    throw ShapeError("FFT buffer has " + std::to_string(data.size()) +
                     " points, plan expects " + std::to_string(n_));
  }
  for (std::size_t i = 0; i < n_; ++i) {
    if (i < bitrev_[i]) std::swap(data[i], data[bitrev_[i]]);
  }
  for (std::size_t len = 2; len <= n_; len <<= 1) {
    const std::size_t half = len / 2;
    const std::size_t stride = n_ / len;
    for (std::size_t start = 0; start < n_; start += len) {
      for (std::size_t k = 0; k < half; ++k) {
        Complex w = twiddles_[k * stride];
        if (inverse) w = std::conj(w);
        const Complex a = data[start + k];
        const Complex b = data[start + k + half] * w;
        data[start + k] = a + b;
        data[start + k + half] = a - b;
      }
    }
  }
}

void FftPlan::forward(std::span<Complex> data) const { transform(data, false); }

void FftPlan::inverse(std::span<Complex> data) const {
  transform(data, true);
  const double scale = 1.0 / static_cast<double>(n_);
  for (Complex& c : data) c *= scale;
}

std::vector<Complex> FftPlan::forward_real(std::span<const double> x) const {
  if (x.size() > n_) {
    throw ShapeError("real FFT input longer than plan size");
  }
  std::vector<Complex> buf(n_);
  for (std::size_t i = 0; i < x.size(); ++i) buf[i] = Complex(x[i], 0.0);
  forward(buf);
  buf.resize(n_ / 2 + 1);
  return buf;
}

std::vector<double> FftPlan::inverse_real(std::span<const Complex> half) const {
  if (half.size() != n_ / 2 + 1) {
    throw ShapeError("half spectrum must have n/2 + 1 bins");
  }
  std::vector<Complex> buf(n_);
  for (std::size_t k = 0; k <= n_ / 2; ++k) buf[k] = half[k];
  for (std::size_t k = 1; k < n_ / 2; ++k) buf[n_ - k] = std::conj(half[k]);
  buf[0] = Complex(half[0].real(), 0.0);
  if (n_ > 1) buf[n_ / 2] = Complex(half[n_ / 2].real(), 0.0);
  inverse(buf);
  std::vector<double> out(n_);
  for (std::size_t i = 0; i < n_; ++i) out[i] = buf[i].real();
  return out;
}

}  // namespace roomflow::audio
