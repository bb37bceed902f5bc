#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace roomflow {

// Writes to path.tmp, then renames over path, so readers never observe a
// partial file. Throws IoError.
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);

// Whole file contents. Throws IoError when unreadable.
std::string read_file(const std::filesystem::path& path);

}  // namespace roomflow
