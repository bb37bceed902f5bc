#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace roomflow::harness {

struct EdcExportResult {
  std::size_t rows = 0;
  // (file, message) for each RIR that could not be read or analyzed
  std::vector<std::pair<std::string, std::string>> errors;
};

// Long-format CSV with header rir_id,t_seconds,edc_db: one row every
// `stride` samples of each RIR's EDC, t measured from the RIR onset. rir_id
// is the file stem. Unreadable files are listed in errors and skipped.
// Throws ConfigError when stride is 0.
EdcExportResult export_edc_plotdata(const std::vector<std::filesystem::path>& rirs,
                                    const std::filesystem::path& out_csv, std::size_t stride = 16);

}  // namespace roomflow::harness
