#include "roomflow/harness/config.hpp"

#include <algorithm>
#include <charconv>
#include <functional>
#include <map>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "roomflow/errors.hpp"

namespace roomflow::harness {

namespace {

using nlohmann::json;

struct Field {
  std::string section;
  std::string key;
  std::function<json()> get;
  std::function<void(const std::string&)> set;
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(const std::string& text) {
  const std::string s = trim(text);
  T value{};
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || end != s.data() + s.size()) {
    throw ConfigError("'" + text + "' is not a valid number");
  }
  return value;
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!trim(item).empty()) out.push_back(parse_number<double>(item));
  }
  return out;
}

template <typename T>
Field number(std::string section, std::string key, T& ref) {
  return {std::move(section), std::move(key), [&ref] { return json(ref); },
          [&ref](const std::string& v) { ref = parse_number<T>(v); }};
}

Field vec3(std::string section, std::string key, sim::Vec3& ref) {
  return {std::move(section), std::move(key),
          [&ref] { return json::array({ref.x, ref.y, ref.z}); },
          [&ref](const std::string& v) {
            const auto xs = parse_list(v);
            if (xs.size() != 3) throw ConfigError("expected three comma-separated values");
            ref = {xs[0], xs[1], xs[2]};
          }};
}

template <typename E>
Field choice(std::string section, std::string key, E& ref, std::map<std::string, E> names) {
  return {std::move(section), std::move(key),
          [&ref, names] {
            for (const auto& [n, e] : names) {
              if (e == ref) return json(n);
            }
            return json(nullptr);
          },
          [&ref, names](const std::string& v) {
            const auto it = names.find(trim(v));
            if (it == names.end()) throw ConfigError("unknown value '" + v + "'");
            ref = it->second;
          }};
}

std::vector<Field> fields(HarnessConfig& c) {
  auto& co = c.corpus;
  auto& sp = c.speech;
  auto& fl = c.flow;
  auto& tr = c.flow.train;
  auto& br = c.blind_rt60;
  auto& sr = c.srmr;
  std::vector<Field> f = {
      number("general", "seed", c.seed),
      number("general", "jobs", c.jobs),
      {"stft", "fft_size", [&c] { return json(c.wpe.stft.fft_size); },
       [&c](const std::string& v) {
         c.wpe.stft.fft_size = c.blind_rt60.stft.fft_size = parse_number<std::size_t>(v);
       }},
      {"stft", "hop", [&c] { return json(c.wpe.stft.hop); },
       [&c](const std::string& v) {
         c.wpe.stft.hop = c.blind_rt60.stft.hop = parse_number<std::size_t>(v);
       }},
      vec3("corpus", "dims_min", co.dims_min),
      vec3("corpus", "dims_max", co.dims_max),
      number("corpus", "alpha_min", co.alpha_min),
      number("corpus", "alpha_max", co.alpha_max),
      number("corpus", "wall_margin", co.wall_margin),
      number("corpus", "min_separation", co.min_separation),
      number("corpus", "max_order", co.max_order),
      number("corpus", "speed_of_sound", co.speed_of_sound),
      number("simulation", "cull_db", co.simulation.cull_db),
      number("simulation", "max_images", co.simulation.max_images),
      number("simulation", "max_seconds", co.simulation.max_seconds),
      number("simulation", "highpass_hz", co.simulation.highpass_hz),
      number("speech", "duration", sp.duration),
      number("speech", "syllable_rate_min", sp.syllable_rate_min),
      number("speech", "syllable_rate_max", sp.syllable_rate_max),
      number("speech", "pause_probability", sp.pause_probability),
      number("speech", "peak_level", sp.peak_level),
      number("speech", "noise_floor_db", sp.noise_floor_db),
      number("wpe", "taps", c.wpe.taps),
      number("wpe", "delay", c.wpe.delay),
      number("wpe", "iterations", c.wpe.iterations),
      number("wpe", "epsilon", c.wpe.epsilon),
      number("blind_rt60", "n_bands", br.n_bands),
      number("blind_rt60", "fmin", br.fmin),
      number("blind_rt60", "fmax", br.fmax),
      number("blind_rt60", "smooth_frames", br.smooth_frames),
      number("blind_rt60", "min_frames", br.min_frames),
      number("blind_rt60", "min_drop_db", br.min_drop_db),
      number("blind_rt60", "dynamic_range_db", br.dynamic_range_db),
      number("blind_rt60", "max_rt60", br.max_rt60),
      number("srmr", "n_channels", sr.n_channels),
      number("srmr", "low_hz", sr.low_hz),
      number("srmr", "high_hz", sr.high_hz),
      number("srmr", "mod_low_hz", sr.mod_low_hz),
      number("srmr", "mod_high_hz", sr.mod_high_hz),
      number("srmr", "mod_q", sr.mod_q),
      number("flow", "steps", tr.steps),
      number("flow", "batch", tr.batch),
      number("flow", "lr", tr.lr),
      choice("flow", "optimizer", tr.optimizer,
             {{"adam", flow::Optimizer::kAdam}, {"sgd", flow::Optimizer::kSgdMomentum}}),
      choice("flow", "schedule", tr.schedule,
             {{"cosine", flow::LrSchedule::kCosine}, {"constant", flow::LrSchedule::kConstant}}),
      number("flow", "momentum", tr.momentum),
      number("flow", "beta2", tr.beta2),
      number("flow", "train_seed", tr.seed),
      number("flow", "sigma_min", tr.sigma_min),
      number("flow", "cond_drop_prob", tr.cond_drop_prob),
      number("flow", "hidden", tr.hidden),
      number("flow", "time_embed", tr.time_embed),
      number("flow", "sample_steps", fl.sample_steps),
      number("flow", "cfg_scale", fl.cfg_scale),
      number("flow", "sample_seed", fl.sample_seed),
      {"eval", "cfg_sweep", [&c] { return json(c.eval.cfg_sweep); },
       [&c](const std::string& v) { c.eval.cfg_sweep = parse_list(v); }},
      number("eval", "test_fraction", c.eval.test_fraction),
  };
  return f;
}

std::string ini_value(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_array()) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + v[i].dump();
    return out;
  }
  return v.dump();
}

void set_field(std::vector<Field>& table, const std::string& section, const std::string& key,
               const std::string& value) {
  auto it = std::find_if(table.begin(), table.end(), [&](const Field& f) {
    return f.section == section && f.key == key;
  });
  if (it == table.end()) throw ConfigError("unknown key [" + section + "] " + key);
  try {
    it->set(value);
  } catch (const ConfigError& e) {
    throw ConfigError("[" + section + "] " + key + ": " + e.what());
  }
}

}  // namespace

void load_config_file(const std::filesystem::path& path, HarnessConfig& config) {
  if (!std::filesystem::is_regular_file(path)) {
    throw IoError("cannot read config file " + path.string());
  }
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::read_ini(path.string(), tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  HarnessConfig updated = config;
  auto table = fields(updated);
  for (const auto& [section, keys] : tree) {
    if (keys.empty()) throw ConfigError(path.string() + ": key '" + section + "' outside a section");
    for (const auto& [key, value] : keys) {
      try {
        set_field(table, section, key, value.data());
      } catch (const ConfigError& e) {
        throw ConfigError(path.string() + ": " + e.what());
      }
    }
  }
  validate(updated);
  config = updated;
}

void set_config_value(HarnessConfig& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  const auto dot = assignment.find('.');
  if (eq == std::string::npos || dot == std::string::npos || dot > eq) {
    throw ConfigError("override '" + assignment + "' is not section.key=value");
  }
  HarnessConfig updated = config;
  auto table = fields(updated);
  set_field(table, trim(assignment.substr(0, dot)), trim(assignment.substr(dot + 1, eq - dot - 1)),
            assignment.substr(eq + 1));
  config = updated;
}

void validate(const HarnessConfig& c) {
  if (c.jobs < 1) throw ConfigError("jobs must be >= 1");
  const auto& co = c.corpus;
  for (int a = 0; a < 3; ++a) {
    if (!(co.dims_min[a] > 0.0 && co.dims_min[a] <= co.dims_max[a])) {
      throw ConfigError("corpus dims_min must be positive and not above dims_max");
    }
  }
  if (!(co.alpha_min >= 0.0 && co.alpha_min <= co.alpha_max && co.alpha_max <= 1.0)) {
    throw ConfigError("corpus absorption range must satisfy 0 <= alpha_min <= alpha_max <= 1");
  }
  if (co.max_order < 0) throw ConfigError("max_order must be >= 0");
  if (!(c.speech.duration > 0.0)) throw ConfigError("speech duration must be positive");
  if (!(c.speech.syllable_rate_min > 0.0 &&
        c.speech.syllable_rate_min <= c.speech.syllable_rate_max)) {
    throw ConfigError("syllable rate range is empty");
  }
  audio::validate(c.wpe.stft);
  wpe::validate(c.wpe);
  flow::validate(c.flow.train);
  if (c.flow.sample_steps < 1) throw ConfigError("sample_steps must be >= 1");
  if (!(c.eval.test_fraction > 0.0 && c.eval.test_fraction < 1.0)) {
    throw ConfigError("test_fraction must lie in (0, 1)");
  }
}

nlohmann::json to_json(const HarnessConfig& config) {
  HarnessConfig copy = config;
  json out = json::object();
  for (const auto& f : fields(copy)) out[f.section][f.key] = f.get();
  return out;
}

std::string to_ini(const HarnessConfig& config) {
  HarnessConfig copy = config;
  std::string out;
  std::string section;
  for (const auto& f : fields(copy)) {
    if (f.section != section) {
      out += (section.empty() ? "[" : "\n[") + f.section + "]\n";
      section = f.section;
    }
    out += f.key + " = " + ini_value(f.get()) + "\n";
  }
  return out;
}

}  // namespace roomflow::harness
