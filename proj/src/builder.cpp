#include "edckit/builder.hpp"

#include "edckit/elf_text.hpp"
#include "edckit/error.hpp"
#include "edckit/util.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <filesystem>

namespace edckit {

namespace {

struct ValidCandidate {
    CandidateProgram candidate;
    std::string toolchain_id;
    std::vector<std::uint8_t> text_section;
};

// Tries templates in order and stops at the first one that produces a
// non-vacuous binary. Returns the candidate with its final outcome.
CandidateProgram evaluate_candidate(const CandidateProgram& candidate,
                                    const ToolchainConfig& toolchain,
                                    VacuousBaselines& baselines, BuildReport& report,
                                    std::vector<std::uint8_t>* text_out) {
    CandidateProgram result = candidate;
    bool any_success = false;
    std::size_t last_vacuous_size = 0;
    for (const std::string& template_id : template_ids()) {
        std::string source = instantiate_template(candidate.source_text, template_id,
                                                  toolchain.language);
        ++report.compiles_attempted;
        CompileRun run = compile_source(source, toolchain);
        if (run.timed_out) ++report.compiles_timed_out;
        if (!run.success) {
            if (diagnostics_indicate_truncation(run.diagnostics))
                ++report.compile_failures_truncated;
            continue;
        }
        std::vector<std::uint8_t> text_bytes;
        try {
            text_bytes = extract_text_section(run.artifact);
        } catch (const Error&) {
            continue; // malformed artifact counts as a failed compile
        }
        any_success = true;
        last_vacuous_size = text_bytes.size();
        if (is_vacuous(text_bytes.size(), baselines.baseline(toolchain, template_id))) continue;
        result.template_id = template_id;
        result.compile_outcome = CompileOutcome::valid;
        result.text_section_size = text_bytes.size();
        if (text_out) *text_out = std::move(text_bytes);
        return result;
    }
    if (any_success) {
        result.compile_outcome = CompileOutcome::vacuous;
        result.text_section_size = last_vacuous_size;
    } else {
        result.compile_outcome = CompileOutcome::compile_failed;
    }
    return result;
}

// question first, then answers, each independently
std::vector<const Post*> posts_of(const Page& page) {
    std::vector<const Post*> posts;
    posts.push_back(&page.question);
    for (const Post& a : page.answers) posts.push_back(&a);
    return posts;
}

std::vector<const ToolchainConfig*> toolchains_for_page(const Page& page,
                                                        const std::vector<ToolchainConfig>& all) {
    bool has_c = std::find(page.tags.begin(), page.tags.end(), "c") != page.tags.end();
    bool has_cpp = std::find(page.tags.begin(), page.tags.end(), "c++") != page.tags.end();
    std::vector<const ToolchainConfig*> ordered;
    if (has_c || !has_cpp)
        for (const ToolchainConfig& tc : all)
            if (tc.language == Language::c) ordered.push_back(&tc);
    if (has_cpp || !has_c)
        for (const ToolchainConfig& tc : all)
            if (tc.language == Language::cpp) ordered.push_back(&tc);
    if (ordered.empty())
        for (const ToolchainConfig& tc : all) ordered.push_back(&tc);
    return ordered;
}

void process_post(const Page& page, const Post& post, const BuildConfig& config,
                  VacuousBaselines& baselines, BuildReport& report,
                  std::vector<Sample>& samples) {
    ++report.posts_processed;

    std::vector<Snippet> code;
    for (const Snippet& s : post.snippets)
        if (s.kind == SnippetKind::code) code.push_back(s);
    if (code.empty()) {
        ++report.post_rejections["no-code-snippets"];
        return;
    }
    ++report.posts_with_code;

    std::string explanation = compose_explanation(post);
    if (explanation.empty()) {
        ++report.post_rejections["empty-explanation"];
        return;
    }

    if (config.max_span > 0 && code.size() > config.max_span) ++report.posts_span_capped;
    std::vector<CandidateProgram> candidates = enumerate_candidates(code, config.max_span);
    report.candidates_enumerated += candidates.size();

    std::vector<CandidateProgram> survivors;
    for (CandidateProgram& c : candidates) {
        c.source_post = post.post_id;
        PreprocessResult pre = preprocess_candidate(c);
        if (pre.rejected) {
            ++report.preprocess_rejections[pre.reason];
            continue;
        }
        survivors.push_back(std::move(pre.candidate));
    }
    if (survivors.empty()) {
        ++report.post_rejections["no-candidates-survive-preprocess"];
        return;
    }

    for (const ToolchainConfig* toolchain : toolchains_for_page(page, config.toolchains)) {
        std::optional<ValidCandidate> best;
        for (const CandidateProgram& candidate : survivors) {
            std::vector<std::uint8_t> text_bytes;
            CandidateProgram evaluated =
                evaluate_candidate(candidate, *toolchain, baselines, report, &text_bytes);
            switch (evaluated.compile_outcome) {
            case CompileOutcome::valid: ++report.candidates_valid; break;
            case CompileOutcome::vacuous: ++report.candidates_vacuous; break;
            default: ++report.candidates_compile_failed; break;
            }
            if (evaluated.compile_outcome != CompileOutcome::valid) continue;
            // enumeration order is (start, end) ascending, so replacing only
            // on strictly longer text realizes the documented tie-break
            if (!best || evaluated.source_text.size() > best->candidate.source_text.size())
                best = ValidCandidate{std::move(evaluated), toolchain->toolchain_id,
                                      std::move(text_bytes)};
        }
        if (best) {
            Sample sample;
            sample.id = page.page_id + "#" + post.post_id;
            sample.input_kind = InputKind::binary_hex;
            sample.input = to_hex(best->text_section);
            sample.output = explanation;
            std::string tags;
            for (const std::string& t : page.tags) {
                if (!tags.empty()) tags += ",";
                tags += t;
            }
            sample.meta["page"] = page.page_id;
            sample.meta["post"] = post.post_id;
            if (!tags.empty()) sample.meta["tags"] = tags;
            sample.meta["upvotes"] = static_cast<std::int64_t>(post.upvotes);
            sample.meta["template"] = best->candidate.template_id;
            sample.meta["toolchain"] = best->toolchain_id;
            samples.push_back(std::move(sample));
            ++report.samples_emitted;
            return;
        }
    }
    ++report.post_rejections["no-valid-candidate"];
}

} // namespace

void BuildReport::merge(const BuildReport& other) {
    pages_found += other.pages_found;
    pages_parse_failed += other.pages_parse_failed;
    pages_excluded_by_tag += other.pages_excluded_by_tag;
    pages_processed += other.pages_processed;
    posts_processed += other.posts_processed;
    posts_with_code += other.posts_with_code;
    posts_span_capped += other.posts_span_capped;
    candidates_enumerated += other.candidates_enumerated;
    compiles_attempted += other.compiles_attempted;
    compiles_timed_out += other.compiles_timed_out;
    compile_failures_truncated += other.compile_failures_truncated;
    candidates_compile_failed += other.candidates_compile_failed;
    candidates_vacuous += other.candidates_vacuous;
    candidates_valid += other.candidates_valid;
    samples_emitted += other.samples_emitted;
    for (const auto& [k, v] : other.preprocess_rejections) preprocess_rejections[k] += v;
    for (const auto& [k, v] : other.post_rejections) post_rejections[k] += v;
}

std::string build_report_to_json(const BuildReport& report) {
    nlohmann::ordered_json j;
    j["pages_found"] = report.pages_found;
    j["pages_parse_failed"] = report.pages_parse_failed;
    j["pages_excluded_by_tag"] = report.pages_excluded_by_tag;
    j["pages_processed"] = report.pages_processed;
    j["posts_processed"] = report.posts_processed;
    j["posts_with_code"] = report.posts_with_code;
    j["posts_span_capped"] = report.posts_span_capped;
    j["candidates_enumerated"] = report.candidates_enumerated;
    j["preprocess_rejections"] = report.preprocess_rejections;
    j["compiles_attempted"] = report.compiles_attempted;
    j["compiles_timed_out"] = report.compiles_timed_out;
    j["compile_failures_truncated"] = report.compile_failures_truncated;
    j["candidates_compile_failed"] = report.candidates_compile_failed;
    j["candidates_vacuous"] = report.candidates_vacuous;
    j["candidates_valid"] = report.candidates_valid;
    j["post_rejections"] = report.post_rejections;
    j["samples_emitted"] = report.samples_emitted;
    return j.dump(2) + "\n";
}

BuildOutput build_dataset(const std::string& dump_path, const BuildConfig& config) {
    if (config.toolchains.empty()) throw Error("build config has no toolchains");
    for (const ToolchainConfig& tc : config.toolchains) validate_toolchain(tc);

    std::vector<std::string> files = list_dump_files(dump_path);
    std::vector<std::string> wanted;
    for (const std::string& t : config.tag_filter) wanted.push_back(to_lower(t));

    VacuousBaselines baselines;
    BuildReport report;
    report.pages_found = files.size();

    std::vector<std::vector<Sample>> per_file(files.size());
    std::vector<BuildReport> per_file_report(files.size());

#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t fi = 0; fi < static_cast<std::ptrdiff_t>(files.size()); ++fi) {
        auto i = static_cast<std::size_t>(fi);
        BuildReport& local = per_file_report[i];
        std::string page_id = std::filesystem::path(files[i]).stem().string();
        std::optional<Page> page;
        std::string err;
        try {
            page = parse_page(read_file(files[i]), page_id, &err);
        } catch (const std::exception& e) {
            err = e.what();
        }
        if (!page) {
            ++local.pages_parse_failed;
            continue;
        }
        if (!wanted.empty()) {
            bool match = false;
            for (const std::string& t : page->tags)
                if (std::find(wanted.begin(), wanted.end(), t) != wanted.end()) match = true;
            if (!match) {
                ++local.pages_excluded_by_tag;
                continue;
            }
        }
        ++local.pages_processed;
        for (const Post* post : posts_of(*page))
            process_post(*page, *post, config, baselines, local, per_file[i]);
    }

    std::vector<Sample> samples;
    for (std::size_t i = 0; i < files.size(); ++i) {
        report.merge(per_file_report[i]);
        for (Sample& s : per_file[i]) samples.push_back(std::move(s));
    }
    auto sort_key = [](const Sample& s) {
        return std::make_pair(std::get<std::string>(s.meta.at("page")),
                              std::get<std::string>(s.meta.at("post")));
    };
    std::sort(samples.begin(), samples.end(),
              [&](const Sample& a, const Sample& b) { return sort_key(a) < sort_key(b); });

    if (samples.empty())
        return BuildOutput{Dataset(), report};
    return BuildOutput{Dataset(config.dataset_name, std::move(samples)), report};
}

} // namespace edckit
