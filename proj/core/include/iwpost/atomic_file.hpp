#pragma once

#include <filesystem>
#include <string_view>

namespace iwpost {

/// Writes `content` to a sibling temp file and renames it over `path`, so readers
/// never observe a partial file. Creates missing parent directories.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

}  // namespace iwpost
