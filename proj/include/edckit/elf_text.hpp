#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace edckit {

// Returns the raw contents of the section named ".text" from an ELF object
// or executable (32/64-bit, either endianness). Empty result if the section
// exists with zero size or is SHT_NOBITS. Throws Error on bad magic, a
// missing .text section, or a truncated/corrupt section header table.
std::vector<std::uint8_t> extract_text_section(std::span<const std::uint8_t> binary);

std::vector<std::uint8_t> extract_text_section_from_file(const std::string& path);

} // namespace edckit
