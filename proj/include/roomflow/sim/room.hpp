#pragma once

#include <array>
#include <optional>

#include "roomflow/audio/audio_buffer.hpp"

namespace roomflow::sim {

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  double operator[](int axis) const { return axis == 0 ? x : axis == 1 ? y : z; }
  friend bool operator==(const Vec3&, const Vec3&) = default;
};

double distance(const Vec3& a, const Vec3& b);

// Shoebox room with one absorption coefficient per wall, ordered
// {x=0, x=Lx, y=0, y=Ly, z=0, z=Lz}.
struct RoomSpec {
  Vec3 dims;
  std::array<double, 6> absorption{0.3, 0.3, 0.3, 0.3, 0.3, 0.3};
  Vec3 source;
  Vec3 receiver;
  int max_order = 40;
  double speed_of_sound = 343.0;
  int sample_rate = audio::kDefaultSampleRate;

  void set_uniform_absorption(double alpha) { absorption.fill(alpha); }
  double volume() const { return dims.x * dims.y * dims.z; }
  double surface_area() const;
  // Area-weighted mean absorption.
  double mean_absorption() const;

  friend bool operator==(const RoomSpec&, const RoomSpec&) = default;
};

inline constexpr double kWallMargin = 0.1;
inline constexpr double kMinSeparation = 0.05;

// Throws ConfigError on any violated invariant: positive dims, source and
// receiver at least 0.1 m inside every wall, 0 <= alpha <= 1, max_order >= 0,
// and source/receiver separated by at least 0.05 m.
void validate(const RoomSpec& room);

double sabine_t60(const RoomSpec& room);
double eyring_t60(const RoomSpec& room);

// Impulse response with optional provenance.
struct Rir {
  audio::AudioBuffer h;
  std::optional<RoomSpec> room;
  std::optional<double> direct_delay;  // seconds

  int sample_rate() const { return h.sample_rate(); }
};

}  // namespace roomflow::sim
