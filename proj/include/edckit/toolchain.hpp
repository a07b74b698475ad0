#pragma once

#include "edckit/corpus.hpp"

#include <chrono>
#include <cstdint>
#include <map>
#include <mutex>
#include <string>
#include <vector>

namespace edckit {

struct ToolchainConfig {
    std::string toolchain_id;
    Language language = Language::c;
    // whitespace-split command with {in}/{out} placeholders
    std::string command;
    std::uint32_t timeout_seconds = 30;
};

void validate_toolchain(const ToolchainConfig& toolchain);

// Pinned flags: no optimization, no debug info, no unwind tables or ident
// strings, implicit declarations are errors (so header-less candidates only
// compile under the preamble templates). Same source in, same .text out.
std::vector<ToolchainConfig> default_toolchains();

std::vector<ToolchainConfig> load_toolchains(const std::string& path);
std::string toolchains_to_json(const std::vector<ToolchainConfig>& toolchains);

struct CompileRun {
    bool success = false;
    bool timed_out = false;
    int exit_code = -1;
    std::string diagnostics;
    std::chrono::milliseconds duration{0};
    std::vector<std::uint8_t> artifact; // object file bytes when success
};

// Writes the source into a fresh temporary directory (fixed file name, so
// path strings cannot leak into the artifact), runs the toolchain command
// there, and reads back the object file. The directory is removed on return.
CompileRun compile_source(const std::string& source, const ToolchainConfig& toolchain);

// True when every error diagnostic points at truncated input (unexpected
// EOF, unterminated literal) — used by the build report to separate
// cut-off snippets from genuinely broken code.
bool diagnostics_indicate_truncation(const std::string& diagnostics);

// .text size of each (toolchain, template) instantiated with the empty
// program, computed once and cached. A candidate whose .text is no larger
// is vacuous.
class VacuousBaselines {
public:
    std::size_t baseline(const ToolchainConfig& toolchain, const std::string& template_id);
    static std::string baseline_candidate(const std::string& template_id);

private:
    std::map<std::pair<std::string, std::string>, std::size_t> cache_;
    std::mutex mutex_;
};

bool is_vacuous(std::size_t text_section_size, std::size_t baseline_size);

// RAII temporary directory under the system temp root.
class TempDir {
public:
    TempDir();
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    const std::string& path() const { return path_; }

private:
    std::string path_;
};

} // namespace edckit
