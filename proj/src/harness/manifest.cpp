#include "roomflow/harness/manifest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "roomflow/audio/wav.hpp"
#include "roomflow/errors.hpp"
#include "roomflow/io.hpp"
#include "roomflow/random.hpp"

namespace roomflow::harness {

using nlohmann::json;

std::string to_string(Split split) { return split == Split::kTest ? "test" : "train"; }

std::vector<const ManifestItem*> Manifest::select(Split split) const {
  std::vector<const ManifestItem*> out;
  for (const auto& item : items) {
    if (item.split == split) out.push_back(&item);
  }
  return out;
}

const ManifestItem& Manifest::find(const std::string& id) const {
  for (const auto& item : items) {
    if (item.id == id) return item;
  }
  throw ConfigError("no manifest item with id '" + id + "'");
}

std::uint64_t stable_hash(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::vector<Split> assign_splits(const std::vector<std::string>& ids, std::uint64_t seed,
                                 double test_fraction) {
  const std::size_t n = ids.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  auto key = [&](std::size_t i) { return mix_seed(stable_hash(ids[i]) ^ mix_seed(seed)); };
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto ka = key(a), kb = key(b);
    return ka != kb ? ka < kb : ids[a] < ids[b];
  });
  auto n_test = static_cast<std::size_t>(std::lround(test_fraction * static_cast<double>(n)));
  if (n >= 2) n_test = std::clamp<std::size_t>(n_test, 1, n - 1);
  std::vector<Split> out(n, Split::kTrain);
  for (std::size_t r = 0; r < n_test && r < n; ++r) out[order[r]] = Split::kTest;
  return out;
}

json room_to_json(const sim::RoomSpec& r) {
  auto v3 = [](const sim::Vec3& v) { return json::array({v.x, v.y, v.z}); };
  return {{"dims", v3(r.dims)},
          {"absorption", r.absorption},
          {"source", v3(r.source)},
          {"receiver", v3(r.receiver)},
          {"max_order", r.max_order},
          {"speed_of_sound", r.speed_of_sound},
          {"sample_rate", r.sample_rate}};
}

sim::RoomSpec room_from_json(const json& j) {
  auto v3 = [](const json& a) {
    const auto v = a.get<std::vector<double>>();
    if (v.size() != 3) throw ConfigError("room vectors need three coordinates");
    return sim::Vec3{v[0], v[1], v[2]};
  };
  sim::RoomSpec r;
  r.dims = v3(j.at("dims"));
  r.absorption = j.at("absorption").get<std::array<double, 6>>();
  r.source = v3(j.at("source"));
  r.receiver = v3(j.at("receiver"));
  r.max_order = j.at("max_order").get<int>();
  r.speed_of_sound = j.at("speed_of_sound").get<double>();
  r.sample_rate = j.at("sample_rate").get<int>();
  sim::validate(r);
  return r;
}

json to_json(const Manifest& m) {
  json items = json::array();
  for (const auto& it : m.items) {
    json j = {{"id", it.id},
              {"room", room_to_json(it.room)},
              {"rir_path", it.rir_path},
              {"clean_path", it.clean_path},
              {"reverberant_path", it.reverberant_path},
              {"split", to_string(it.split)},
              {"clean_origin", it.clean_origin}};
    if (it.oracle) {
      j["oracle"] = {{"rt60", it.oracle->rt60},
                     {"rt60_estimator", metrics::to_string(it.oracle->rt60_estimator)},
                     {"edt", it.oracle->edt},
                     {"drr", it.oracle->drr}};
    }
    items.push_back(std::move(j));
  }
  return {{"schema_version", m.schema_version},
          {"seed", m.seed},
          {"clean_source", m.clean_source},
          {"items", std::move(items)}};
}

void save_manifest(const Manifest& m, const std::filesystem::path& path) {
  write_file_atomic(path, to_json(m).dump(2) + "\n");
}

Manifest load_manifest(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": not valid JSON: " + e.what());
  }
  Manifest m;
  m.root = path.parent_path();
  try {
    m.schema_version = j.at("schema_version").get<int>();
    if (m.schema_version != kManifestSchemaVersion) {
      throw FormatError(path.string() + ": manifest schema_version " +
                        std::to_string(m.schema_version) + " is not supported");
    }
    m.seed = j.at("seed").get<std::uint64_t>();
    m.clean_source = j.at("clean_source").get<std::string>();
    std::set<std::string> seen;
    for (const auto& ji : j.at("items")) {
      ManifestItem it;
      it.id = ji.at("id").get<std::string>();
      if (!seen.insert(it.id).second) throw ConfigError("duplicate manifest id '" + it.id + "'");
      it.room = room_from_json(ji.at("room"));
      it.rir_path = ji.at("rir_path").get<std::string>();
      it.clean_path = ji.at("clean_path").get<std::string>();
      it.reverberant_path = ji.at("reverberant_path").get<std::string>();
      const auto split = ji.at("split").get<std::string>();
      if (split != "train" && split != "test") {
        throw ConfigError("item '" + it.id + "' has unknown split '" + split + "'");
      }
      it.split = split == "test" ? Split::kTest : Split::kTrain;
      it.clean_origin = ji.value("clean_origin", "");
      if (ji.contains("oracle")) {
        const json& o = ji.at("oracle");
        metrics::RirParameters p;
        p.rt60 = o.at("rt60").get<double>();
        p.rt60_estimator = o.at("rt60_estimator").get<std::string>() == "T20"
                               ? metrics::DecayEstimator::kT20
                               : metrics::DecayEstimator::kT30;
        p.edt = o.at("edt").get<double>();
        p.drr = o.at("drr").get<double>();
        it.oracle = p;
      }
      for (const auto* rel : {&it.rir_path, &it.clean_path, &it.reverberant_path}) {
        if (!std::filesystem::is_regular_file(m.resolve(*rel))) {
          throw ConfigError("item '" + it.id + "' references missing file " + *rel);
        }
      }
      m.items.push_back(std::move(it));
    }
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": malformed manifest: " + e.what());
  }
  return m;
}

sim::Rir load_item_rir(const Manifest& manifest, const ManifestItem& item) {
  sim::Rir rir;
  rir.h = audio::read_wav(manifest.resolve(item.rir_path));
  rir.room = item.room;
  rir.direct_delay = sim::distance(item.room.source, item.room.receiver) /
                     item.room.speed_of_sound;
  return rir;
}

}  // namespace roomflow::harness
