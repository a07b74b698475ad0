#include "edckit/elf_text.hpp"

#include "edckit/error.hpp"
#include "edckit/util.hpp"

#include <cstring>
#include <string>
#include <string_view>

namespace edckit {

namespace {

constexpr std::size_t EI_NIDENT = 16;
constexpr std::size_t EI_CLASS = 4;
constexpr std::size_t EI_DATA = 5;
constexpr std::uint8_t ELFCLASS32 = 1;
constexpr std::uint8_t ELFCLASS64 = 2;
constexpr std::uint8_t ELFDATA2LSB = 1;
constexpr std::uint8_t ELFDATA2MSB = 2;
constexpr std::uint32_t SHT_NOBITS = 8;
constexpr std::uint16_t SHN_XINDEX = 0xffff;

class Reader {
public:
    Reader(std::span<const std::uint8_t> data, bool big_endian)
        : data_(data), big_(big_endian) {}

    std::uint16_t u16(std::size_t off) const { return static_cast<std::uint16_t>(load(off, 2)); }
    std::uint32_t u32(std::size_t off) const { return static_cast<std::uint32_t>(load(off, 4)); }
    std::uint64_t u64(std::size_t off) const { return load(off, 8); }

    std::span<const std::uint8_t> bytes(std::uint64_t off, std::uint64_t len,
                                        const char* what) const {
        if (off > data_.size() || len > data_.size() - off)
            throw Error(std::string("corrupt ELF: ") + what + " extends past end of file");
        return data_.subspan(off, len);
    }

    std::size_t size() const { return data_.size(); }

private:
    std::uint64_t load(std::size_t off, std::size_t n) const {
        if (off > data_.size() || n > data_.size() - off)
            throw Error("corrupt ELF: truncated header field");
        std::uint64_t v = 0;
        if (big_) {
            for (std::size_t i = 0; i < n; ++i) v = (v << 8) | data_[off + i];
        } else {
            for (std::size_t i = n; i > 0; --i) v = (v << 8) | data_[off + i - 1];
        }
        return v;
    }

    std::span<const std::uint8_t> data_;
    bool big_;
};

struct SectionHeader {
    std::uint32_t name_off;
    std::uint32_t type;
    std::uint64_t offset;
    std::uint64_t size;
};

} // namespace

std::vector<std::uint8_t> extract_text_section(std::span<const std::uint8_t> binary) {
    if (binary.size() < 4 || binary[0] != 0x7f || binary[1] != 'E' || binary[2] != 'L' ||
        binary[3] != 'F')
        throw Error("not an ELF file (bad magic)");
    if (binary.size() < EI_NIDENT) throw Error("corrupt ELF: truncated identification");

    const std::uint8_t klass = binary[EI_CLASS];
    const std::uint8_t data_enc = binary[EI_DATA];
    if (klass != ELFCLASS32 && klass != ELFCLASS64)
        throw Error("corrupt ELF: unknown class " + std::to_string(klass));
    if (data_enc != ELFDATA2LSB && data_enc != ELFDATA2MSB)
        throw Error("corrupt ELF: unknown data encoding " + std::to_string(data_enc));

    const bool is64 = klass == ELFCLASS64;
    Reader r(binary, data_enc == ELFDATA2MSB);

    // e_shoff / e_shentsize / e_shnum / e_shstrndx
    std::uint64_t shoff = is64 ? r.u64(0x28) : r.u32(0x20);
    std::uint16_t shentsize = r.u16(is64 ? 0x3a : 0x2e);
    std::uint64_t shnum = r.u16(is64 ? 0x3c : 0x30);
    std::uint32_t shstrndx = r.u16(is64 ? 0x3e : 0x32);

    if (shoff == 0) throw Error("corrupt ELF: no section header table");
    const std::size_t min_entsize = is64 ? 64 : 40;
    if (shentsize < min_entsize)
        throw Error("corrupt ELF: section header entry size too small");

    auto read_shdr = [&](std::uint64_t index) {
        std::uint64_t off = shoff + index * shentsize;
        r.bytes(off, min_entsize, "section header");
        SectionHeader h;
        h.name_off = r.u32(off);
        h.type = r.u32(off + 4);
        if (is64) {
            h.offset = r.u64(off + 0x18);
            h.size = r.u64(off + 0x20);
        } else {
            h.offset = r.u32(off + 0x10);
            h.size = r.u32(off + 0x14);
        }
        return h;
    };

    // shnum == 0 means the real count lives in section 0's sh_size; likewise
    // SHN_XINDEX redirects shstrndx to section 0's sh_link.
    if (shnum == 0) {
        std::uint64_t off = shoff;
        r.bytes(off, min_entsize, "section header 0");
        shnum = is64 ? r.u64(off + 0x20) : r.u32(off + 0x14);
        if (shnum == 0) throw Error("corrupt ELF: extended section count is zero");
    }
    if (shstrndx == SHN_XINDEX) {
        std::uint64_t off = shoff;
        r.bytes(off, min_entsize, "section header 0");
        shstrndx = is64 ? r.u32(off + 0x28) : r.u32(off + 0x18);
    }
    if (shstrndx >= shnum)
        throw Error("corrupt ELF: section name table index out of range");
    // guard the multiply below against absurd extended counts
    if (shnum > (binary.size() - std::min<std::uint64_t>(shoff, binary.size())) / shentsize)
        throw Error("corrupt ELF: section header table extends past end of file");

    r.bytes(shoff, shnum * shentsize, "section header table");

    SectionHeader strtab = read_shdr(shstrndx);
    std::span<const std::uint8_t> names =
        r.bytes(strtab.offset, strtab.size, "section name table");

    for (std::uint64_t i = 0; i < shnum; ++i) {
        SectionHeader h = read_shdr(i);
        if (h.name_off >= names.size()) continue;
        const char* name = reinterpret_cast<const char*>(names.data() + h.name_off);
        std::size_t maxlen = names.size() - h.name_off;
        if (::strnlen(name, maxlen) == maxlen) continue; // unterminated name
        if (std::string_view(name) != ".text") continue;
        if (h.type == SHT_NOBITS || h.size == 0) return {};
        auto contents = r.bytes(h.offset, h.size, ".text contents");
        return std::vector<std::uint8_t>(contents.begin(), contents.end());
    }
    throw Error("ELF has no section named .text");
}

std::vector<std::uint8_t> extract_text_section_from_file(const std::string& path) {
    std::vector<std::uint8_t> bytes = read_file_bytes(path);
    try {
        return extract_text_section(bytes);
    } catch (const Error& e) {
        throw Error(path + ": " + e.what());
    }
}

} // namespace edckit
