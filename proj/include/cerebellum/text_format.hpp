#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include <json.hpp>

namespace cerebellum {

using Json = nlohmann::json;

/// Shortest decimal rendering that parses back to the identical double.
std::string format_double(double x);

/// Parses JSON allowing // and /* */ comments. Errors become ConfigError with a line number.
Json parse_config_text(std::string_view text);

/// Reads a whole file; throws InputError when it cannot be opened.
std::string read_file(const std::string& path);

/// 64-bit FNV-1a, rendered as 16 hex digits by hash_hex.
std::uint64_t fnv1a(std::string_view bytes);
std::string hash_hex(std::uint64_t h);

}  // namespace cerebellum
