#pragma once

#include <optional>

#include <json.hpp>

namespace roomflow::metrics {

// Scalar metrics for one evaluation item. Times are seconds, DRR is dB.
// Every field is optional; absent fields are omitted from JSON.
struct AcousticReport {
  std::optional<double> rt60;
  std::optional<double> edt;
  std::optional<double> drr;
  std::optional<double> rte;
  std::optional<double> srmr;
  std::optional<double> delta_rt60;
  std::optional<double> delta_edt;
  std::optional<double> delta_drr;

  friend bool operator==(const AcousticReport&, const AcousticReport&) = default;
};

// Throws ConfigError when a present field breaks the report invariants
// (non-finite, non-positive rt60/edt, |drr| > 80, negative deltas).
void validate(const AcousticReport& report);

void to_json(nlohmann::json& j, const AcousticReport& r);
void from_json(const nlohmann::json& j, AcousticReport& r);

}  // namespace roomflow::metrics
