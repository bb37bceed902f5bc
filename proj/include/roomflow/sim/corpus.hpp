#pragma once

#include <cstdint>
#include <vector>

#include "roomflow/sim/image_source.hpp"
#include "roomflow/sim/room.hpp"

namespace roomflow::sim {

struct CorpusConfig {
  Vec3 dims_min{3.0, 3.0, 2.5};
  Vec3 dims_max{10.0, 8.0, 4.0};
  double alpha_min = 0.1;
  double alpha_max = 0.6;
  double wall_margin = 0.5;
  double min_separation = 1.0;
  int max_order = 40;
  double speed_of_sound = 343.0;
  int sample_rate = audio::kDefaultSampleRate;
  SimulationOptions simulation;
  int jobs = 1;
};

struct CorpusItem {
  RoomSpec room;
  Rir rir;
};

// Room i is drawn from its own generator seeded by derive_seed(seed, i).
RoomSpec sample_room(std::uint64_t seed, std::size_t index,
                     const CorpusConfig& config = {});

std::vector<RoomSpec> sample_rooms(std::size_t n_items, std::uint64_t seed,
                                   const CorpusConfig& config = {});

// Rooms plus their simulated RIRs. Throws ConfigError when n_items == 0.
std::vector<CorpusItem> sample_corpus(std::size_t n_items, std::uint64_t seed,
                                      const CorpusConfig& config = {});

}  // namespace roomflow::sim
