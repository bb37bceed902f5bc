#include "roomflow/flow/checkpoint.hpp"

#include "roomflow/errors.hpp"
#include "roomflow/io.hpp"

namespace roomflow::flow {

namespace {

using nlohmann::json;

json vector_json(const VectorXd& v) {
  return json(std::vector<double>(v.data(), v.data() + v.size()));
}

VectorXd vector_from(const json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const VectorXd>(v.data(), static_cast<Index>(v.size()));
}

json normalizer_json(const Normalizer& n) {
  return {{"mean", vector_json(n.mean)}, {"scale", vector_json(n.scale)}};
}

Normalizer normalizer_from(const json& j, Index expected, const char* what) {
  Normalizer n{vector_from(j.at("mean")), vector_from(j.at("scale"))};
  if (n.mean.size() != expected || n.scale.size() != expected) {
    throw ShapeError(std::string(what) + " statistics do not match the model dims");
  }
  return n;
}

const char* optimizer_name(Optimizer o) { return o == Optimizer::kAdam ? "adam" : "sgd"; }
const char* schedule_name(LrSchedule s) {
  return s == LrSchedule::kCosine ? "cosine" : "constant";
}

}  // namespace

json train_config_json(const FlowTrainConfig& c) {
  json j = {{"steps", c.steps},
            {"batch", c.batch},
            {"lr", c.lr},
            {"schedule", schedule_name(c.schedule)},
            {"optimizer", optimizer_name(c.optimizer)},
            {"momentum", c.momentum},
            {"beta2", c.beta2},
            {"seed", c.seed},
            {"sigma_min", c.sigma_min},
            {"cond_drop_prob", c.cond_drop_prob},
            {"hidden", c.hidden},
            {"time_embed", c.time_embed}};
  if (c.fixed_source) j["fixed_source"] = vector_json(*c.fixed_source);
  return j;
}

namespace {

FlowTrainConfig train_config_from(const json& j) {
  FlowTrainConfig c;
  c.steps = j.at("steps").get<long>();
  c.batch = j.at("batch").get<int>();
  c.lr = j.at("lr").get<double>();
  c.schedule = j.at("schedule").get<std::string>() == "cosine" ? LrSchedule::kCosine
                                                               : LrSchedule::kConstant;
  c.optimizer = j.at("optimizer").get<std::string>() == "adam" ? Optimizer::kAdam
                                                               : Optimizer::kSgdMomentum;
  c.momentum = j.at("momentum").get<double>();
  c.beta2 = j.at("beta2").get<double>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.sigma_min = j.at("sigma_min").get<double>();
  c.cond_drop_prob = j.at("cond_drop_prob").get<double>();
  c.hidden = j.at("hidden").get<Index>();
  c.time_embed = j.at("time_embed").get<Index>();
  if (j.contains("fixed_source")) c.fixed_source = vector_from(j.at("fixed_source"));
  return c;
}

}  // namespace

void save_checkpoint(const Checkpoint& ck, const std::filesystem::path& path) {
  const FlowDims& d = ck.model.dims();
  json j = {{"format_version", kCheckpointFormatVersion},
            {"task", to_string(ck.task)},
            {"dims",
             {{"d_x", d.d_x}, {"d_c", d.d_c}, {"hidden", d.hidden}, {"time_embed", d.time_embed}}},
            {"parameters", vector_json(ck.model.parameters())},
            {"condition_norm", normalizer_json(ck.condition_norm)},
            {"target_norm", normalizer_json(ck.target_norm)},
            {"train_config", train_config_json(ck.train_config)},
            {"train_ids", ck.train_ids},
            {"loss_stride", ck.loss_stride},
            {"loss_curve", ck.loss_curve}};
  write_file_atomic(path, j.dump());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": not valid JSON: " + e.what());
  }
  try {
    const int version = j.at("format_version").get<int>();
    if (version != kCheckpointFormatVersion) {
      throw FormatError(path.string() + ": checkpoint format_version " + std::to_string(version) +
                        " is not supported (expected " +
                        std::to_string(kCheckpointFormatVersion) + ")");
    }
    Checkpoint ck;
    ck.task = task_from_string(j.at("task").get<std::string>());
    const json& jd = j.at("dims");
    const FlowDims dims{jd.at("d_x").get<Index>(), jd.at("d_c").get<Index>(),
                        jd.at("hidden").get<Index>(), jd.at("time_embed").get<Index>()};
    ck.model = FlowModel(dims, 0);
    ck.model.set_parameters(vector_from(j.at("parameters")));
    if (!ck.model.finite()) throw FormatError(path.string() + ": non-finite parameters");
    ck.condition_norm = normalizer_from(j.at("condition_norm"), dims.d_c, "condition");
    ck.target_norm = normalizer_from(j.at("target_norm"), dims.d_x, "target");
    ck.train_config = train_config_from(j.at("train_config"));
    ck.train_ids = j.at("train_ids").get<std::vector<std::string>>();
    ck.loss_stride = j.at("loss_stride").get<long>();
    ck.loss_curve = j.at("loss_curve").get<std::vector<double>>();
    return ck;
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": malformed checkpoint: " + e.what());
  } catch (const ConfigError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

}  // namespace roomflow::flow
