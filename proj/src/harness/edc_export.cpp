#include "roomflow/harness/edc_export.hpp"

#include <cstdio>

#include "roomflow/audio/wav.hpp"
#include "roomflow/errors.hpp"
#include "roomflow/io.hpp"
#include "roomflow/metrics/edc.hpp"

namespace roomflow::harness {

EdcExportResult export_edc_plotdata(const std::vector<std::filesystem::path>& rirs,
                                    const std::filesystem::path& out_csv, std::size_t stride) {
  if (stride == 0) throw ConfigError("edc export stride must be >= 1");
  EdcExportResult result;
  std::string csv = "rir_id,t_seconds,edc_db\n";
  char buf[96];
  for (const auto& path : rirs) {
    metrics::Edc curve;
    try {
      curve = metrics::edc(audio::read_wav(path));
    } catch (const Error& e) {
      result.errors.emplace_back(path.string(), e.what());
      continue;
    }
    const std::string id = path.stem().string();
    for (std::size_t i = 0; i < curve.size(); i += stride) {
      std::snprintf(buf, sizeof buf, ",%.6f,%.4f\n",
                    static_cast<double>(i) / curve.sample_rate, curve.values_db[i]);
      csv += id;
      csv += buf;
      ++result.rows;
    }
  }
  write_file_atomic(out_csv, csv);
  return result;
}

}  // namespace roomflow::harness
