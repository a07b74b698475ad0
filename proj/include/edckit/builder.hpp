#pragma once

#include "edckit/corpus.hpp"
#include "edckit/dataset.hpp"
#include "edckit/toolchain.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace edckit {

struct BuildConfig {
    std::vector<std::string> tag_filter = {"c", "c++"};
    std::vector<ToolchainConfig> toolchains = default_toolchains();
    std::size_t max_span = 12; // longest snippet span enumerated per post
    std::string dataset_name = "corpus";
};

struct BuildReport {
    std::uint64_t pages_found = 0;
    std::uint64_t pages_parse_failed = 0;
    std::uint64_t pages_excluded_by_tag = 0;
    std::uint64_t pages_processed = 0;
    std::uint64_t posts_processed = 0;
    std::uint64_t posts_with_code = 0;
    std::uint64_t posts_span_capped = 0;
    std::uint64_t candidates_enumerated = 0;
    std::uint64_t compiles_attempted = 0;
    std::uint64_t compiles_timed_out = 0;
    std::uint64_t compile_failures_truncated = 0;
    std::uint64_t candidates_compile_failed = 0;
    std::uint64_t candidates_vacuous = 0;
    std::uint64_t candidates_valid = 0;
    std::uint64_t samples_emitted = 0;
    std::map<std::string, std::uint64_t> preprocess_rejections; // reason -> count
    std::map<std::string, std::uint64_t> post_rejections;       // reason -> count

    void merge(const BuildReport& other);
};

std::string build_report_to_json(const BuildReport& report);

struct BuildOutput {
    Dataset dataset;
    BuildReport report;
};

// The whole pipeline, per post: enumerate contiguous candidates, preprocess,
// instantiate templates, compile, drop vacuous binaries, keep the longest
// valid candidate, pair its .text bytes (hex) with the concatenated prose.
// A page with a question and N valid answers emits N+1 samples. Pages are
// processed in parallel; output order is (page_id, post_id).
BuildOutput build_dataset(const std::string& dump_path, const BuildConfig& config);

} // namespace edckit
