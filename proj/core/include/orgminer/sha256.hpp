#pragma once
// SHA-256 digests for manifest integrity entries.

#include <filesystem>
#include <string>
#include <string_view>

namespace orgminer {

std::string sha256Hex(std::string_view data);
std::string sha256HexOfFile(const std::filesystem::path& path);

} // namespace orgminer
