#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace edckit {

bool is_lower_hex(std::string_view s);
std::string to_hex(const std::vector<std::uint8_t>& bytes);
std::vector<std::uint8_t> from_hex(std::string_view hex);

std::string to_lower(std::string_view s);
std::string trim(std::string_view s);
std::vector<std::string> split_lines(std::string_view text);

// Shortest decimal that round-trips the double, "nan"/"inf" spelled out.
// Every report and CSV uses this so reruns are byte-identical.
std::string format_double(double v);

// Round half to even, result clamped to [0, n].
std::size_t round_half_even(double x, std::size_t n);

std::string read_file(const std::string& path);
std::vector<std::uint8_t> read_file_bytes(const std::string& path);
void write_file(const std::string& path, std::string_view contents);
void write_file_atomic(const std::string& path, std::string_view contents);

} // namespace edckit
