#pragma once

#include <filesystem>
#include <string>

namespace dpcm {

/// Writes content to a sibling temp file, then renames over the target so a
/// reader never observes a half-written file.
void write_file_atomic(const std::filesystem::path& path,
                       const std::string& content);

std::string read_file(const std::filesystem::path& path);

}  // namespace dpcm
