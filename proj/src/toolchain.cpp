#include "edckit/toolchain.hpp"

#include "edckit/elf_text.hpp"
#include "edckit/error.hpp"
#include "edckit/subprocess.hpp"
#include "edckit/util.hpp"

#include <nlohmann/json.hpp>

#include <stdlib.h>
#include <unistd.h>

#include <filesystem>

namespace edckit {

void validate_toolchain(const ToolchainConfig& toolchain) {
    if (toolchain.toolchain_id.empty()) throw Error("toolchain_id must be nonempty");
    if (toolchain.timeout_seconds == 0)
        throw Error("toolchain \"" + toolchain.toolchain_id + "\": timeout must be positive");
    std::vector<std::string> argv = split_command(toolchain.command, "in", "out");
    if (argv.empty())
        throw Error("toolchain \"" + toolchain.toolchain_id + "\": empty command");
    bool has_in = toolchain.command.find("{in}") != std::string::npos;
    bool has_out = toolchain.command.find("{out}") != std::string::npos;
    if (!has_in || !has_out)
        throw Error("toolchain \"" + toolchain.toolchain_id +
                    "\": command needs {in} and {out} placeholders");
    if (!executable_exists(argv[0]))
        throw Error("toolchain \"" + toolchain.toolchain_id + "\": compiler not found: " +
                    argv[0]);
}

std::vector<ToolchainConfig> default_toolchains() {
    return {
        // -pedantic-errors rejects GNU nested functions, so a candidate that
        // carries its own main() cannot sneak through the main-wrapping
        // templates
        {"gcc-c11", Language::c,
         "gcc -x c -std=c11 -O0 -g0 -fno-asynchronous-unwind-tables -fno-ident "
         "-pedantic-errors -Werror=implicit-function-declaration -c {in} -o {out}",
         30},
        {"gpp-c++17", Language::cpp,
         "g++ -x c++ -std=c++17 -O0 -g0 -fno-asynchronous-unwind-tables -fno-ident "
         "-c {in} -o {out}",
         30},
    };
}

std::vector<ToolchainConfig> load_toolchains(const std::string& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw Error("toolchain config " + path + ": " + e.what());
    }
    if (!j.is_array()) throw Error("toolchain config " + path + ": expected a JSON array");
    std::vector<ToolchainConfig> out;
    for (const auto& item : j) {
        ToolchainConfig tc;
        try {
            tc.toolchain_id = item.at("toolchain_id").get<std::string>();
            tc.language = language_from_string(item.at("language").get<std::string>());
            tc.command = item.at("command").get<std::string>();
            tc.timeout_seconds = item.value("timeout_seconds", 30u);
        } catch (const nlohmann::json::exception& e) {
            throw Error("toolchain config " + path + ": " + e.what());
        }
        out.push_back(std::move(tc));
    }
    if (out.empty()) throw Error("toolchain config " + path + ": no toolchains");
    return out;
}

std::string toolchains_to_json(const std::vector<ToolchainConfig>& toolchains) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const ToolchainConfig& tc : toolchains) {
        nlohmann::ordered_json j;
        j["toolchain_id"] = tc.toolchain_id;
        j["language"] = to_string(tc.language);
        j["command"] = tc.command;
        j["timeout_seconds"] = tc.timeout_seconds;
        arr.push_back(j);
    }
    return arr.dump(2) + "\n";
}

TempDir::TempDir() {
    std::filesystem::path base = std::filesystem::temp_directory_path() / "edckit-XXXXXX";
    std::string tmpl = base.string();
    if (!mkdtemp(tmpl.data())) throw Error("mkdtemp failed for " + tmpl);
    path_ = tmpl;
}

TempDir::~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
}

CompileRun compile_source(const std::string& source, const ToolchainConfig& toolchain) {
    TempDir dir;
    std::string in_name = toolchain.language == Language::c ? "candidate.c" : "candidate.cc";
    std::string in_path = dir.path() + "/" + in_name;
    std::string out_path = dir.path() + "/out.o";
    write_file(in_path, source);

    std::vector<std::string> argv = split_command(toolchain.command, in_name, "out.o");
    RunResult run = run_process(argv, "", std::chrono::seconds(toolchain.timeout_seconds),
                                dir.path());

    CompileRun result;
    result.timed_out = run.timed_out;
    result.exit_code = run.exit_code;
    result.diagnostics = run.err;
    result.duration = run.duration;
    if (run.timed_out) {
        result.diagnostics += "\n[compile timed out after " +
                              std::to_string(toolchain.timeout_seconds) + " s]";
        return result;
    }
    if (run.ok() && std::filesystem::exists(out_path)) {
        result.success = true;
        result.artifact = read_file_bytes(out_path);
    }
    return result;
}

bool diagnostics_indicate_truncation(const std::string& diagnostics) {
    static const char* kMarkers[] = {
        "at end of input",
        "expected declaration or statement at end of input",
        "unterminated comment",
        "missing terminating",
        "unexpected end of file",
    };
    bool any_error = false;
    for (const std::string& line : split_lines(diagnostics)) {
        if (line.find("error:") == std::string::npos) continue;
        any_error = true;
        bool truncated = false;
        for (const char* marker : kMarkers)
            if (line.find(marker) != std::string::npos) truncated = true;
        if (!truncated) return false;
    }
    return any_error;
}

std::string VacuousBaselines::baseline_candidate(const std::string& template_id) {
    // wrapping templates get an empty body; raw templates get the empty
    // program itself
    if (template_id == "T2" || template_id == "T4") return "";
    return "int main(){}";
}

std::size_t VacuousBaselines::baseline(const ToolchainConfig& toolchain,
                                       const std::string& template_id) {
    std::pair<std::string, std::string> key{toolchain.toolchain_id, template_id};
    {
        std::lock_guard<std::mutex> lock(mutex_);
        auto it = cache_.find(key);
        if (it != cache_.end()) return it->second;
    }
    std::string source =
        instantiate_template(baseline_candidate(template_id), template_id, toolchain.language);
    CompileRun run = compile_source(source, toolchain);
    if (!run.success)
        throw Error("toolchain \"" + toolchain.toolchain_id +
                    "\" cannot compile the vacuous baseline for template " + template_id + ": " +
                    trim(run.diagnostics).substr(0, 500));
    std::size_t size = extract_text_section(run.artifact).size();
    std::lock_guard<std::mutex> lock(mutex_);
    cache_.emplace(key, size);
    return size;
}

bool is_vacuous(std::size_t text_section_size, std::size_t baseline_size) {
    return text_section_size <= baseline_size;
}

} // namespace edckit
