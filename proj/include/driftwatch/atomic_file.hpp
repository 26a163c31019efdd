#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace driftwatch {

// Writes to a sibling temporary file and renames it over `path`, so readers
// never observe a partially written file. Throws InputError on I/O failure.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);
void write_file_atomic(const std::filesystem::path& path, const std::vector<std::uint8_t>& contents);

std::string read_text_file(const std::filesystem::path& path);

}  // namespace driftwatch
