#include "roomflow/sim/room.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "roomflow/errors.hpp"

namespace roomflow::sim {

double distance(const Vec3& a, const Vec3& b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  const double dz = a.z - b.z;
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

double RoomSpec::surface_area() const {
  return 2.0 * (dims.x * dims.y + dims.x * dims.z + dims.y * dims.z);
}

double RoomSpec::mean_absorption() const {
  const double yz = dims.y * dims.z;
  const double xz = dims.x * dims.z;
  const double xy = dims.x * dims.y;
  const double weighted = yz * (absorption[0] + absorption[1]) +
                          xz * (absorption[2] + absorption[3]) +
                          xy * (absorption[4] + absorption[5]);
  return weighted / surface_area();
}

namespace {

void check_inside(const Vec3& p, const Vec3& dims, const char* what) {
  for (int axis = 0; axis < 3; ++axis) {
    if (!(p[axis] >= kWallMargin && p[axis] <= dims[axis] - kWallMargin)) {
      throw ConfigError(std::string(what) + " must lie at least 0.1 m inside the room");
    }
  }
}

}  // namespace

void validate(const RoomSpec& room) {
  for (int axis = 0; axis < 3; ++axis) {
    if (!(room.dims[axis] > 2.0 * kWallMargin) || !std::isfinite(room.dims[axis])) {
      throw ConfigError("room dimensions must be finite and larger than 0.2 m");
    }
  }
  for (double a : room.absorption) {
    if (!(a >= 0.0 && a <= 1.0)) {
      throw ConfigError("absorption coefficients must lie in [0, 1]");
    }
  }
  if (room.max_order < 0) throw ConfigError("max_order must be >= 0");
  if (!(room.speed_of_sound > 0.0)) throw ConfigError("speed_of_sound must be positive");
  if (room.sample_rate <= 0) throw ConfigError("sample_rate must be positive");
  check_inside(room.source, room.dims, "source");
  check_inside(room.receiver, room.dims, "receiver");
  if (distance(room.source, room.receiver) < kMinSeparation) {
    throw ConfigError("source and receiver must be at least 0.05 m apart");
  }
}

double sabine_t60(const RoomSpec& room) {
  const double absorption_area = room.surface_area() * room.mean_absorption();
  if (absorption_area <= 0.0) return std::numeric_limits<double>::infinity();
  return 0.161 * room.volume() / absorption_area;
}

double eyring_t60(const RoomSpec& room) {
  const double a = room.mean_absorption();
  if (a >= 1.0) return 0.0;
  if (a <= 0.0) return std::numeric_limits<double>::infinity();
  return 0.161 * room.volume() / (-room.surface_area() * std::log(1.0 - a));
}

}  // namespace roomflow::sim
