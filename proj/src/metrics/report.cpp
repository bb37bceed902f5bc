#include "roomflow/metrics/report.hpp"

#include <cmath>
#include <string>

#include "roomflow/errors.hpp"

namespace roomflow::metrics {
namespace {

struct Field {
  const char* key;
  std::optional<double> AcousticReport::*member;
};

constexpr Field kFields[] = {
    {"rt60", &AcousticReport::rt60},
    {"edt", &AcousticReport::edt},
    {"drr", &AcousticReport::drr},
    {"rte", &AcousticReport::rte},
    {"srmr", &AcousticReport::srmr},
    {"delta_rt60", &AcousticReport::delta_rt60},
    {"delta_edt", &AcousticReport::delta_edt},
    {"delta_drr", &AcousticReport::delta_drr},
};

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError("invalid acoustic report: " + what);
}

}  // namespace

void validate(const AcousticReport& r) {
  for (const auto& f : kFields) {
    const auto& v = r.*(f.member);
    if (v) require(std::isfinite(*v), std::string(f.key) + " is not finite");
  }
  if (r.rt60) require(*r.rt60 > 0.0, "rt60 must be positive");
  if (r.edt) require(*r.edt > 0.0, "edt must be positive");
  if (r.drr) require(std::abs(*r.drr) <= 80.0, "drr outside [-80, 80] dB");
  for (auto m : {&AcousticReport::rte, &AcousticReport::delta_rt60,
                 &AcousticReport::delta_edt, &AcousticReport::delta_drr}) {
    if (r.*m) require(*(r.*m) >= 0.0, "errors must be non-negative");
  }
}

void to_json(nlohmann::json& j, const AcousticReport& r) {
  j = nlohmann::json::object();
  for (const auto& f : kFields) {
    if (const auto& v = r.*(f.member)) j[f.key] = *v;
  }
}

void from_json(const nlohmann::json& j, AcousticReport& r) {
  r = {};
  for (const auto& f : kFields) {
    if (j.contains(f.key) && !j[f.key].is_null()) r.*(f.member) = j[f.key].get<double>();
  }
}

}  // namespace roomflow::metrics
