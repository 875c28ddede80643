#pragma once

#include <filesystem>
#include <string>

namespace stack3d {

// %.6g rendering used for every CSV number (6 significant digits).
std::string format_g6(double v);

// Write-to-temp then rename, so readers never observe a partial file.
void atomic_write_file(const std::filesystem::path& path,
                       const std::string& contents);

std::string read_file(const std::filesystem::path& path);

}  // namespace stack3d
