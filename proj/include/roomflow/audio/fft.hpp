#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace roomflow::audio {

using Complex = std::complex<double>;

bool is_power_of_two(std::size_t n);
std::size_t next_power_of_two(std::size_t n);

// Iterative radix-2 FFT for one power-of-two size. Twiddles are computed
// directly (not by recurrence) so accuracy does not degrade with size.
// A plan is immutable after construction and may be shared across threads.
class FftPlan {
 public:
  explicit FftPlan(std::size_t n);

  std::size_t size() const { return n_; }

  // Forward transform is unnormalized; inverse scales by 1/n.
  void forward(std::span<Complex> data) const;
  void inverse(std::span<Complex> data) const;

  // Real input zero-padded to n; returns n/2 + 1 bins.
  std::vector<Complex> forward_real(std::span<const double> x) const;
  // Hermitian half spectrum (n/2 + 1 bins) back to n real samples.
  std::vector<double> inverse_real(std::span<const Complex> half) const;

 private:
  void transform(std::span<Complex> data, bool inverse) const;

  std::size_t n_;
  std::vector<std::size_t> bitrev_;
  std::vector<Complex> twiddles_;  // exp(-2πik/n), k < n/2
};

}  // namespace roomflow::audio
