#pragma once

// Small serialization helpers shared by every CSV/JSON writer.

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace qctf {

// 17 significant digits, enough for an exact double round trip.
std::string format_double(double value);
double parse_double(std::string_view text);

// FNV-1a, 64-bit.
std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t value);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace qctf
