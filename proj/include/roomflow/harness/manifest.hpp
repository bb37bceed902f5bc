#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "roomflow/metrics/rir_params.hpp"
#include "roomflow/sim/room.hpp"

namespace roomflow::harness {

inline constexpr int kManifestSchemaVersion = 1;

enum class Split { kTrain, kTest };

std::string to_string(Split split);

struct ManifestItem {
  std::string id;
  sim::RoomSpec room;
  // Relative to the manifest directory.
  std::string rir_path;
  std::string clean_path;
  std::string reverberant_path;
  Split split = Split::kTrain;
  std::string clean_origin;  // "synthetic:<seed>" or the source WAV name
  std::optional<metrics::RirParameters> oracle;
};

struct Manifest {
  int schema_version = kManifestSchemaVersion;
  std::uint64_t seed = 0;
  std::string clean_source;  // "synthetic" or "wav-dir"
  std::vector<ManifestItem> items;
  std::filesystem::path root;  // directory holding manifest.json; not serialized

  std::filesystem::path resolve(const std::string& relative) const { return root / relative; }
  std::vector<const ManifestItem*> select(Split split) const;
  const ManifestItem& find(const std::string& id) const;  // throws ConfigError
};

// Ranks items by a hash of (id, seed); the lowest round(n·test_fraction)
// (at least one when n >= 2) become test items. Depends only on the id set
// and seed, not on item order.
std::vector<Split> assign_splits(const std::vector<std::string>& ids, std::uint64_t seed,
                                 double test_fraction);

// 64-bit FNV-1a of a string, stable across platforms.
std::uint64_t stable_hash(const std::string& text);

nlohmann::json room_to_json(const sim::RoomSpec& room);
sim::RoomSpec room_from_json(const nlohmann::json& j);

nlohmann::json to_json(const Manifest& manifest);

// Atomic write of manifest JSON.
void save_manifest(const Manifest& manifest, const std::filesystem::path& path);

// Parses and checks the whole manifest before returning: schema version,
// unique ids, a valid room per item and every referenced file present.
// Throws IoError when unreadable, FormatError on malformed JSON or a wrong
// schema_version, ConfigError on any other violation.
Manifest load_manifest(const std::filesystem::path& path);

// The item's RIR read from disk with its room and direct-path delay
// restored from the manifest.
sim::Rir load_item_rir(const Manifest& manifest, const ManifestItem& item);

}  // namespace roomflow::harness
