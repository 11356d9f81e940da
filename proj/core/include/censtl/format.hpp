#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace censtl {

/// Shortest decimal text that parses back to exactly the same double.
std::string format_double(double value);

/// Parses a full-string floating-point literal; returns false on any trailing junk.
bool parse_double(std::string_view text, double& out);

std::string_view trim(std::string_view text);

std::vector<std::string_view> split(std::string_view text, char separator);

/// Stable 64-bit seed for a named sub-stream of a parent seed.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view stream);

}  // namespace censtl
