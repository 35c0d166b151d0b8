#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace cgm {

// Whole-file helpers. Both throw Error(Errc::io) on failure.
std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view bytes);

}  // namespace cgm
