#include "roomflow/sim/corpus.hpp"

#include <random>

#include "roomflow/errors.hpp"
#include "roomflow/parallel.hpp"
#include "roomflow/random.hpp"

namespace roomflow::sim {
namespace {

double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

Vec3 point_inside(Rng& rng, const Vec3& dims, double margin) {
  return {uniform(rng, margin, dims.x - margin), uniform(rng, margin, dims.y - margin),
          uniform(rng, margin, dims.z - margin)};
}

}  // namespace

RoomSpec sample_room(std::uint64_t seed, std::size_t index, const CorpusConfig& config) {
  Rng rng(derive_seed(seed, index));
  RoomSpec room;
  room.dims = {uniform(rng, config.dims_min.x, config.dims_max.x),
               uniform(rng, config.dims_min.y, config.dims_max.y),
               uniform(rng, config.dims_min.z, config.dims_max.z)};
  room.set_uniform_absorption(uniform(rng, config.alpha_min, config.alpha_max));
  room.max_order = config.max_order;
  room.speed_of_sound = config.speed_of_sound;
  room.sample_rate = config.sample_rate;
  room.source = point_inside(rng, room.dims, config.wall_margin);
  do {
    room.receiver = point_inside(rng, room.dims, config.wall_margin);
  } while (distance(room.source, room.receiver) < config.min_separation);
  validate(room);
  return room;
}

std::vector<RoomSpec> sample_rooms(std::size_t n_items, std::uint64_t seed,
                                   const CorpusConfig& config) {
  if (n_items == 0) throw ConfigError("corpus needs at least one item");
  std::vector<RoomSpec> rooms;
  rooms.reserve(n_items);
  for (std::size_t i = 0; i < n_items; ++i) rooms.push_back(sample_room(seed, i, config));
  return rooms;
}

std::vector<CorpusItem> sample_corpus(std::size_t n_items, std::uint64_t seed,
                                      const CorpusConfig& config) {
  const auto rooms = sample_rooms(n_items, seed, config);
  std::vector<CorpusItem> items(n_items);
  parallel_for(n_items, config.jobs, [&](std::size_t i) {
    items[i] = CorpusItem{rooms[i], simulate_rir(rooms[i], config.simulation)};
  });
  return items;
}

}  // namespace roomflow::sim
