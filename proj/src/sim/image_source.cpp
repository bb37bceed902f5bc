#include "roomflow/sim/image_source.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "roomflow/errors.hpp"

namespace roomflow::sim {
namespace {

constexpr int kHalfTaps = kFractionalDelayTaps / 2;
constexpr double kPi = std::numbers::pi;

// Per-axis image table: signed offset image - receiver and the product of
// reflection coefficients picked up along that axis.
struct AxisImages {
  std::vector<double> offset;
  std::vector<double> gain;
};

AxisImages axis_images(double length, double src, double rcv, double beta_low,
                       double beta_high, int order) {
  AxisImages out;
  out.offset.reserve(2 * order + 1);
  out.gain.reserve(2 * order + 1);
  for (int i = -order; i <= order; ++i) {
    const bool even = i % 2 == 0;
    const double pos = even ? i * length + src : (i + 1) * length - src;
    const int n = std::abs(i);
    // Image i > 0 hits the far wall ceil(i/2) times, the near wall floor(i/2);
    // mirrored for i < 0.
    const int far = i > 0 ? (n + 1) / 2 : n / 2;
    const int near = i > 0 ? n / 2 : (n + 1) / 2;
    out.offset.push_back(pos - rcv);
    out.gain.push_back(std::pow(beta_low, near) * std::pow(beta_high, far));
  }
  return out;
}

// Blackman-windowed sinc evaluated on the 81 integer taps around a delay.
// With delay = n0 + frac and tap k = n - n0, the argument is x = k - frac, so
// sin(πx) = -(-1)^k sin(π frac) and the window cosines expand by angle
// addition; only a handful of trig calls are needed per image.
class FractionalDelayKernel {
 public:
  FractionalDelayKernel() {
    for (int k = -kHalfTaps; k <= kHalfTaps; ++k) {
      const double a = 2.0 * kPi * k / kFractionalDelayTaps;
      cos1_[k + kHalfTaps] = std::cos(a);
      sin1_[k + kHalfTaps] = std::sin(a);
      cos2_[k + kHalfTaps] = std::cos(2.0 * a);
      sin2_[k + kHalfTaps] = std::sin(2.0 * a);
    }
  }

  void taps(double frac, std::array<double, kFractionalDelayTaps>& out) const {
    const double b = 2.0 * kPi * frac / kFractionalDelayTaps;
    const double cb = std::cos(b), sb = std::sin(b);
    const double c2b = std::cos(2.0 * b), s2b = std::sin(2.0 * b);
    const double sin_pf = std::sin(kPi * frac);
    for (int k = -kHalfTaps; k <= kHalfTaps; ++k) {
      const int j = k + kHalfTaps;
      const double x = k - frac;
      // cos(a - b) = cos a cos b + sin a sin b
      const double w = 0.42 + 0.5 * (cos1_[j] * cb + sin1_[j] * sb) +
                       0.08 * (cos2_[j] * c2b + sin2_[j] * s2b);
      double sinc;
      if (std::abs(x) < 1e-12) {
        sinc = 1.0;
      } else {
        const double sign = (k % 2 == 0) ? -1.0 : 1.0;
        sinc = sign * sin_pf / (kPi * x);
      }
      out[j] = w * sinc;
    }
  }

 private:
  std::array<double, kFractionalDelayTaps> cos1_{}, sin1_{}, cos2_{}, sin2_{};
};

// Allen-Berkley second-order high-pass. Dense late arrivals all carry the
// same sign, so without it their sum builds up a slowly decaying
// low-frequency offset that is absent from the incoherent image energy.
void highpass_in_place(std::vector<double>& x, double cutoff_hz, double fs) {
  const double w = 2.0 * kPi * cutoff_hz / fs;
  const double r1 = std::exp(-w);
  const double b1 = 2.0 * r1 * std::cos(w);
  const double b2 = -r1 * r1;
  const double a1 = -(1.0 + r1);
  double x1 = 0.0, x2 = 0.0, y1 = 0.0, y2 = 0.0;
  for (double& v : x) {
    const double y = v + a1 * x1 + r1 * x2 + b1 * y1 + b2 * y2;
    x2 = x1;
    x1 = v;
    y2 = y1;
    y1 = y;
    v = y;
  }
}

void add_image(std::vector<double>& h, const FractionalDelayKernel& kernel, double amp,
               double delay, std::array<double, kFractionalDelayTaps>& taps) {
  const double center = std::round(delay);
  kernel.taps(delay - center, taps);
  const long n0 = static_cast<long>(center);
  const long length = static_cast<long>(h.size());
  for (int k = -kHalfTaps; k <= kHalfTaps; ++k) {
    const long n = n0 + k;
    if (n < 0 || n >= length) continue;
    h[static_cast<std::size_t>(n)] += amp * taps[k + kHalfTaps];
  }
}

}  // namespace

void add_fractional_impulse(std::vector<double>& h, double delay_samples, double amplitude) {
  static const FractionalDelayKernel kernel;
  std::array<double, kFractionalDelayTaps> taps{};
  add_image(h, kernel, amplitude, delay_samples, taps);
}

std::size_t image_count(int max_order) {
  const std::size_t per_axis = 2 * static_cast<std::size_t>(max_order) + 1;
  return per_axis * per_axis * per_axis;
}

std::size_t rir_length(const RoomSpec& room, const SimulationOptions& options) {
  const double direct = distance(room.source, room.receiver) / room.speed_of_sound;
  const double tail = std::max(2.0 * sabine_t60(room), 80.0 / 60.0 * eyring_t60(room));
  const double seconds = std::min(direct + tail, options.max_seconds);
  return static_cast<std::size_t>(std::ceil(seconds * room.sample_rate)) + kHalfTaps + 1;
}

SimulationResult simulate_rir_detailed(const RoomSpec& room,
                                       const SimulationOptions& options) {
  validate(room);
  const std::size_t count = image_count(room.max_order);
  if (count > options.max_images) {
    throw ResourceError("max_order " + std::to_string(room.max_order) + " needs " +
                        std::to_string(count) + " images, cap is " +
                        std::to_string(options.max_images));
  }
  const int order = room.max_order;
  const double fs = room.sample_rate;
  const double c = room.speed_of_sound;
  std::array<AxisImages, 3> axes;
  for (int axis = 0; axis < 3; ++axis) {
    axes[axis] = axis_images(room.dims[axis], room.source[axis], room.receiver[axis],
                             std::sqrt(1.0 - room.absorption[2 * axis]),
                             std::sqrt(1.0 - room.absorption[2 * axis + 1]), order);
  }

  const std::size_t length = rir_length(room, options);
  std::vector<double> h(length, 0.0);
  const double direct_distance = distance(room.source, room.receiver);
  const double direct_amp = 1.0 / (4.0 * kPi * direct_distance);
  const double cull = direct_amp * std::pow(10.0, options.cull_db / 20.0);
  const double max_delay = static_cast<double>(length) + kHalfTaps;

  const FractionalDelayKernel kernel;
  std::array<double, kFractionalDelayTaps> taps{};
  SimulationResult result;
  result.images_enumerated = count;
  const std::size_t span = 2 * static_cast<std::size_t>(order) + 1;
  const auto center_index = static_cast<std::size_t>(order);
  for (std::size_t ix = 0; ix < span; ++ix) {
    const double dx = axes[0].offset[ix];
    const double gx = axes[0].gain[ix];
    for (std::size_t iy = 0; iy < span; ++iy) {
      const double dy = axes[1].offset[iy];
      const double gxy = gx * axes[1].gain[iy];
      if (gxy == 0.0) continue;
      for (std::size_t iz = 0; iz < span; ++iz) {
        const double gain = gxy * axes[2].gain[iz];
        if (gain == 0.0) continue;
        const double dz = axes[2].offset[iz];
        const double d = std::sqrt(dx * dx + dy * dy + dz * dz);
        const double amp = gain / (4.0 * kPi * d);
        if (amp < cull) continue;
        const double delay = d / c * fs;
        if (delay >= max_delay) continue;
        ++result.images_rendered;
        if (ix == center_index && iy == center_index && iz == center_index) continue;
        add_image(h, kernel, amp, delay, taps);
      }
    }
  }
  // Reflections only: the direct path stays an unfiltered kernel.
  if (options.highpass_hz > 0.0) highpass_in_place(h, options.highpass_hz, fs);
  add_image(h, kernel, direct_amp, direct_distance / c * fs, taps);
  result.rir.h = audio::AudioBuffer(std::move(h), room.sample_rate);
  result.rir.room = room;
  result.rir.direct_delay = direct_distance / c;
  return result;
}

Rir simulate_rir(const RoomSpec& room, const SimulationOptions& options) {
  return simulate_rir_detailed(room, options).rir;
}

std::pair<Rir, Rir> reciprocity_check(const RoomSpec& room,
                                      const SimulationOptions& options) {
  validate(room);
  RoomSpec swapped = room;
  std::swap(swapped.source, swapped.receiver);
  return {simulate_rir(room, options), simulate_rir(swapped, options)};
}

}  // namespace roomflow::sim
