#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace edckit {

enum class SnippetKind { code, prose };

// One contiguous code or prose block from a Q&A post.
struct Snippet {
    SnippetKind kind = SnippetKind::prose;
    std::string text;
};

struct Post {
    std::string post_id;
    std::vector<Snippet> snippets; // document order
    int upvotes = 0;
};

struct Page {
    std::string page_id;
    Post question;
    std::vector<Post> answers;
    std::vector<std::string> tags; // lowercased
};

// Parses one Q&A page. Recognizes the usual Stack Overflow style markup:
// a question element (id or class "question"), answer elements (class
// "answer"), post bodies (class "post-text", "s-prose" or "js-post-body"),
// <pre> blocks as code snippets, <p>/<li>/<h*> blocks as prose snippets,
// tags from "post-tag" elements and vote counts from "vote-count*" elements.
// Returns nullopt (with a reason) when no question can be found.
std::optional<Page> parse_page(const std::string& html, const std::string& page_id,
                               std::string* error = nullptr);

struct ParseFailure {
    std::string page_id;
    std::string reason;
};

// Reads every *.html/*.htm under dump_path (sorted, recursive) and keeps
// pages whose tags intersect tag_filter (empty filter keeps everything).
// Pages that fail to parse are collected, never fatal.
std::vector<Page> parse_pages(const std::string& dump_path,
                              const std::vector<std::string>& tag_filter,
                              std::vector<ParseFailure>* failures = nullptr,
                              std::size_t* excluded_by_tag = nullptr);

std::vector<std::string> list_dump_files(const std::string& dump_path);

enum class CompileOutcome { not_attempted, compile_failed, vacuous, valid };
std::string to_string(CompileOutcome outcome);

// One contiguous snippet concatenation attempted as a compilable program.
struct CandidateProgram {
    std::string source_post;
    std::size_t span_start = 0;
    std::size_t span_end = 0; // inclusive
    std::string source_text;
    std::string template_id;
    CompileOutcome compile_outcome = CompileOutcome::not_attempted;
    std::optional<std::size_t> text_section_size;
    std::vector<std::string> applied_rules; // preprocessing provenance
};

// All contiguous spans of the post's code snippets, ordered by start then
// end: a, ab, abc, b, bc, c. k snippets yield k(k+1)/2 candidates.
// max_span > 0 limits span length (explosion control for huge posts).
std::vector<CandidateProgram> enumerate_candidates(const std::vector<Snippet>& code_snippets,
                                                   std::size_t max_span = 0);

struct PreprocessResult {
    bool rejected = false;
    std::string reason;
    CandidateProgram candidate;
};

// Ordered textual cleanup rules: strip "$ "/"> " prompts, strip line-number
// gutters, drop bare "..." lines, then reject on unbalanced braces/parens or
// when most lines carry no C punctuation. Applied rules are recorded in the
// candidate's provenance.
PreprocessResult preprocess_candidate(const CandidateProgram& candidate);

enum class Language { c, cpp };
std::string to_string(Language lang);
Language language_from_string(const std::string& s);

struct TemplateSource {
    std::string template_id;
    std::string source;
};

// T1 raw, T2 main-wrapped, T3 preamble + raw, T4 preamble + main-wrapped.
std::vector<TemplateSource> instantiate_templates(const CandidateProgram& candidate,
                                                  Language language);
std::string instantiate_template(const std::string& candidate_text, const std::string& template_id,
                                 Language language);
std::vector<std::string> template_ids();

// Longest source_text; ties broken by earliest span start, then smallest
// span end.
const CandidateProgram& select_candidate(const std::vector<CandidateProgram>& valid);

// Prose snippets joined in document order with blank lines.
std::string compose_explanation(const Post& post);

} // namespace edckit
