#include "edckit/corpus.hpp"

#include "edckit/error.hpp"
#include "edckit/html.hpp"
#include "edckit/util.hpp"

#include <algorithm>
#include <filesystem>
#include <regex>

namespace edckit {

namespace {

bool class_contains(const HtmlToken& tok, std::string_view needle) {
    auto it = tok.attrs.find("class");
    if (it == tok.attrs.end()) return false;
    const std::string& cls = it->second;
    std::size_t pos = 0;
    while (pos <= cls.size()) {
        std::size_t sp = cls.find(' ', pos);
        std::string_view token(cls.data() + pos,
                               (sp == std::string::npos ? cls.size() : sp) - pos);
        if (token == needle) return true;
        if (sp == std::string::npos) break;
        pos = sp + 1;
    }
    return false;
}

bool class_starts_with(const HtmlToken& tok, std::string_view prefix) {
    auto it = tok.attrs.find("class");
    if (it == tok.attrs.end()) return false;
    const std::string& cls = it->second;
    std::size_t pos = 0;
    while (pos <= cls.size()) {
        std::size_t sp = cls.find(' ', pos);
        std::string_view token(cls.data() + pos,
                               (sp == std::string::npos ? cls.size() : sp) - pos);
        if (token.substr(0, prefix.size()) == prefix) return true;
        if (sp == std::string::npos) break;
        pos = sp + 1;
    }
    return false;
}

// Token range [open_index+1, matching close) for the element opened at
// open_index. Void/self-closing elements yield an empty range.
std::pair<std::size_t, std::size_t> element_range(const std::vector<HtmlToken>& tokens,
                                                  std::size_t open_index) {
    const HtmlToken& open = tokens[open_index];
    if (open.self_closing) return {open_index + 1, open_index + 1};
    int depth = 1;
    for (std::size_t i = open_index + 1; i < tokens.size(); ++i) {
        const HtmlToken& t = tokens[i];
        if (t.kind == HtmlToken::Kind::open && t.name == open.name && !t.self_closing) ++depth;
        else if (t.kind == HtmlToken::Kind::close && t.name == open.name && --depth == 0)
            return {open_index + 1, i};
    }
    return {open_index + 1, tokens.size()};
}

std::string text_in_range(const std::vector<HtmlToken>& tokens, std::size_t from, std::size_t to) {
    std::string out;
    for (std::size_t i = from; i < to; ++i) {
        if (tokens[i].kind == HtmlToken::Kind::text) out += decode_entities(tokens[i].text);
        else if (tokens[i].kind == HtmlToken::Kind::open && tokens[i].name == "br") out += '\n';
    }
    return out;
}

bool is_prose_block(const std::string& name) {
    return name == "p" || name == "li" || name == "blockquote" ||
           (name.size() == 2 && name[0] == 'h' && name[1] >= '1' && name[1] <= '6');
}

std::vector<Snippet> extract_snippets(const std::vector<HtmlToken>& tokens, std::size_t from,
                                      std::size_t to) {
    std::vector<Snippet> snippets;
    auto push = [&](SnippetKind kind, const std::string& text) {
        std::string body = kind == SnippetKind::code ? text : trim(text);
        if (kind == SnippetKind::code) {
            // keep inner newlines, drop a single leading/trailing one
            while (!body.empty() && (body.front() == '\n' || body.front() == '\r'))
                body.erase(body.begin());
            while (!body.empty() && (body.back() == '\n' || body.back() == '\r')) body.pop_back();
        }
        if (trim(body).empty()) return;
        snippets.push_back(Snippet{kind, body});
    };

    std::size_t i = from;
    while (i < to) {
        const HtmlToken& t = tokens[i];
        if (t.kind == HtmlToken::Kind::open && t.name == "pre") {
            auto [b, e] = element_range(tokens, i);
            push(SnippetKind::code, text_in_range(tokens, b, e));
            i = e + 1;
        } else if (t.kind == HtmlToken::Kind::open && is_prose_block(t.name)) {
            auto [b, e] = element_range(tokens, i);
            // a <pre> nested in a prose block still counts as code
            std::size_t j = b;
            std::string prose;
            while (j < e) {
                const HtmlToken& u = tokens[j];
                if (u.kind == HtmlToken::Kind::open && u.name == "pre") {
                    push(SnippetKind::prose, prose);
                    prose.clear();
                    auto [pb, pe] = element_range(tokens, j);
                    push(SnippetKind::code, text_in_range(tokens, pb, pe));
                    j = pe + 1;
                } else {
                    if (u.kind == HtmlToken::Kind::text) prose += decode_entities(u.text);
                    else if (u.kind == HtmlToken::Kind::open && u.name == "br") prose += '\n';
                    ++j;
                }
            }
            push(SnippetKind::prose, prose);
            i = e + 1;
        } else {
            ++i;
        }
    }
    return snippets;
}

int parse_vote_count(const std::vector<HtmlToken>& tokens, std::size_t from, std::size_t to) {
    for (std::size_t i = from; i < to; ++i) {
        const HtmlToken& t = tokens[i];
        if (t.kind != HtmlToken::Kind::open) continue;
        bool is_votes = class_starts_with(t, "vote-count");
        if (!is_votes) {
            auto ip = t.attrs.find("itemprop");
            is_votes = ip != t.attrs.end() && ip->second == "upvoteCount";
        }
        if (!is_votes) continue;
        auto [b, e] = element_range(tokens, i);
        try {
            return std::stoi(trim(text_in_range(tokens, b, e)));
        } catch (...) {
            return 0;
        }
    }
    return 0;
}

Post parse_post(const std::vector<HtmlToken>& tokens, std::size_t open_index,
                const std::string& fallback_id) {
    auto [from, to] = element_range(tokens, open_index);
    Post post;
    const HtmlToken& open = tokens[open_index];
    for (const char* key : {"data-post-id", "data-questionid", "data-answerid"}) {
        auto it = open.attrs.find(key);
        if (it != open.attrs.end() && !it->second.empty()) {
            post.post_id = it->second;
            break;
        }
    }
    if (post.post_id.empty()) post.post_id = fallback_id;
    post.upvotes = parse_vote_count(tokens, from, to);

    // narrow to the body element when present
    std::size_t body_from = from, body_to = to;
    for (std::size_t i = from; i < to; ++i) {
        const HtmlToken& t = tokens[i];
        if (t.kind == HtmlToken::Kind::open &&
            (class_contains(t, "post-text") || class_contains(t, "s-prose") ||
             class_contains(t, "js-post-body"))) {
            auto [b, e] = element_range(tokens, i);
            body_from = b;
            body_to = e;
            break;
        }
    }
    post.snippets = extract_snippets(tokens, body_from, body_to);
    return post;
}

} // namespace

std::optional<Page> parse_page(const std::string& html, const std::string& page_id,
                               std::string* error) {
    std::vector<HtmlToken> tokens = tokenize_html(html);

    Page page;
    page.page_id = page_id;

    for (std::size_t i = 0; i < tokens.size(); ++i) {
        const HtmlToken& t = tokens[i];
        if (t.kind == HtmlToken::Kind::open && class_contains(t, "post-tag")) {
            auto [b, e] = element_range(tokens, i);
            std::string tag = to_lower(trim(text_in_range(tokens, b, e)));
            if (!tag.empty() &&
                std::find(page.tags.begin(), page.tags.end(), tag) == page.tags.end())
                page.tags.push_back(tag);
        }
    }

    std::optional<std::size_t> question_index;
    std::vector<std::size_t> answer_indices;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        const HtmlToken& t = tokens[i];
        if (t.kind != HtmlToken::Kind::open) continue;
        auto id_attr = t.attrs.find("id");
        bool is_question = class_contains(t, "question") ||
                           (id_attr != t.attrs.end() && id_attr->second == "question");
        if (is_question && !question_index) {
            question_index = i;
            continue;
        }
        if (class_contains(t, "answer")) answer_indices.push_back(i);
    }

    if (!question_index) {
        if (error) *error = "no question element found";
        return std::nullopt;
    }

    page.question = parse_post(tokens, *question_index, "q");
    std::size_t answer_no = 0;
    for (std::size_t idx : answer_indices)
        page.answers.push_back(parse_post(tokens, idx, "a" + std::to_string(++answer_no)));
    return page;
}

std::vector<std::string> list_dump_files(const std::string& dump_path) {
    namespace fs = std::filesystem;
    if (!fs::exists(dump_path)) throw Error("dump path not found: " + dump_path);
    std::vector<std::string> files;
    if (fs::is_regular_file(dump_path)) {
        files.push_back(dump_path);
        return files;
    }
    for (const auto& entry : fs::recursive_directory_iterator(dump_path)) {
        if (!entry.is_regular_file()) continue;
        std::string ext = to_lower(entry.path().extension().string());
        if (ext == ".html" || ext == ".htm") files.push_back(entry.path().string());
    }
    std::sort(files.begin(), files.end());
    return files;
}

std::vector<Page> parse_pages(const std::string& dump_path,
                              const std::vector<std::string>& tag_filter,
                              std::vector<ParseFailure>* failures,
                              std::size_t* excluded_by_tag) {
    std::vector<std::string> wanted;
    for (const std::string& t : tag_filter) wanted.push_back(to_lower(t));

    std::vector<Page> pages;
    for (const std::string& file : list_dump_files(dump_path)) {
        std::string page_id = std::filesystem::path(file).stem().string();
        std::string err;
        std::optional<Page> page;
        try {
            page = parse_page(read_file(file), page_id, &err);
        } catch (const std::exception& e) {
            err = e.what();
        }
        if (!page) {
            if (failures) failures->push_back({page_id, err.empty() ? "parse failed" : err});
            continue;
        }
        if (!wanted.empty()) {
            bool match = false;
            for (const std::string& t : page->tags)
                if (std::find(wanted.begin(), wanted.end(), t) != wanted.end()) match = true;
            if (!match) {
                if (excluded_by_tag) ++*excluded_by_tag;
                continue;
            }
        }
        pages.push_back(std::move(*page));
    }
    return pages;
}

std::string to_string(CompileOutcome outcome) {
    switch (outcome) {
    case CompileOutcome::not_attempted: return "not_attempted";
    case CompileOutcome::compile_failed: return "compile_failed";
    case CompileOutcome::vacuous: return "vacuous";
    default: return "valid";
    }
}

std::vector<CandidateProgram> enumerate_candidates(const std::vector<Snippet>& code_snippets,
                                                   std::size_t max_span) {
    for (const Snippet& s : code_snippets)
        if (s.kind != SnippetKind::code)
            throw Error("enumerate_candidates: all snippets must be code");
    std::vector<CandidateProgram> candidates;
    const std::size_t k = code_snippets.size();
    for (std::size_t start = 0; start < k; ++start) {
        std::string text;
        for (std::size_t end = start; end < k; ++end) {
            if (max_span > 0 && end - start + 1 > max_span) break;
            if (end > start) text += '\n';
            text += code_snippets[end].text;
            CandidateProgram c;
            c.span_start = start;
            c.span_end = end;
            c.source_text = text;
            candidates.push_back(std::move(c));
        }
    }
    return candidates;
}

namespace {

const std::regex kGutterRe(R"(^\s*\d+[:.]?\s)");

bool balanced_delimiters(const std::string& text) {
    long brace = 0, paren = 0;
    for (char c : text) {
        switch (c) {
        case '{': ++brace; break;
        case '}': if (--brace < 0) return false; break;
        case '(': ++paren; break;
        case ')': if (--paren < 0) return false; break;
        default: break;
        }
    }
    return brace == 0 && paren == 0;
}

bool mostly_proselike(const std::string& text) {
    std::size_t nonempty = 0, without_punct = 0;
    for (const std::string& line : split_lines(text)) {
        if (trim(line).empty()) continue;
        ++nonempty;
        if (line.find_first_of(";{}()=") == std::string::npos) ++without_punct;
    }
    return nonempty > 0 && without_punct * 2 > nonempty;
}

} // namespace

PreprocessResult preprocess_candidate(const CandidateProgram& candidate) {
    PreprocessResult result;
    result.candidate = candidate;

    std::vector<std::string> lines = split_lines(candidate.source_text);
    bool stripped_prompt = false, stripped_gutter = false, dropped_ellipsis = false;

    std::vector<std::string> kept;
    kept.reserve(lines.size());
    for (std::string line : lines) {
        // prompt-marked lines are shell transcript, not source
        if (line.rfind("$ ", 0) == 0 || line.rfind("> ", 0) == 0) {
            stripped_prompt = true;
            continue;
        }
        std::smatch m;
        if (std::regex_search(line, m, kGutterRe)) {
            line = line.substr(static_cast<std::size_t>(m.length(0)));
            stripped_gutter = true;
        }
        std::string t = trim(line);
        if (t == "..." || t == "…") {
            dropped_ellipsis = true;
            continue;
        }
        kept.push_back(line);
    }

    std::string text;
    for (std::size_t i = 0; i < kept.size(); ++i) {
        if (i > 0) text += '\n';
        text += kept[i];
    }

    if (stripped_prompt) result.candidate.applied_rules.push_back("strip-shell-prompt");
    if (stripped_gutter) result.candidate.applied_rules.push_back("strip-line-gutter");
    if (dropped_ellipsis) result.candidate.applied_rules.push_back("drop-ellipsis-lines");
    result.candidate.source_text = text;

    if (trim(text).empty()) {
        result.rejected = true;
        result.reason = "empty-after-cleanup";
        return result;
    }
    if (!balanced_delimiters(text)) {
        result.rejected = true;
        result.reason = "unbalanced-delimiters";
        return result;
    }
    if (mostly_proselike(text)) {
        result.rejected = true;
        result.reason = "mostly-prose";
        return result;
    }
    return result;
}

std::string to_string(Language lang) { return lang == Language::c ? "c" : "cpp"; }

Language language_from_string(const std::string& s) {
    std::string t = to_lower(s);
    if (t == "c") return Language::c;
    if (t == "cpp" || t == "c++" || t == "cxx") return Language::cpp;
    throw Error("unknown language: \"" + s + "\"");
}

namespace {

const char* kPreambleC =
    "#include <stdio.h>\n"
    "#include <stdlib.h>\n"
    "#include <string.h>\n"
    "#include <math.h>\n";

const char* kPreambleCpp =
    "#include <cstdio>\n"
    "#include <cstdlib>\n"
    "#include <cstring>\n"
    "#include <cmath>\n"
    "#include <iostream>\n"
    "#include <string>\n"
    "#include <vector>\n"
    "#include <algorithm>\n"
    "#include <map>\n"
    "using namespace std;\n";

std::string wrap_main(const std::string& body) {
    return "int main(void) {\n" + body + "\nreturn 0;\n}\n";
}

} // namespace

std::vector<std::string> template_ids() { return {"T1", "T2", "T3", "T4"}; }

std::string instantiate_template(const std::string& candidate_text, const std::string& template_id,
                                 Language language) {
    const char* preamble = language == Language::c ? kPreambleC : kPreambleCpp;
    if (template_id == "T1") return candidate_text;
    if (template_id == "T2") return wrap_main(candidate_text);
    if (template_id == "T3") return std::string(preamble) + "\n" + candidate_text;
    if (template_id == "T4") return std::string(preamble) + "\n" + wrap_main(candidate_text);
    throw Error("unknown template id: \"" + template_id + "\"");
}

std::vector<TemplateSource> instantiate_templates(const CandidateProgram& candidate,
                                                  Language language) {
    std::vector<TemplateSource> sources;
    for (const std::string& id : template_ids())
        sources.push_back({id, instantiate_template(candidate.source_text, id, language)});
    return sources;
}

const CandidateProgram& select_candidate(const std::vector<CandidateProgram>& valid) {
    if (valid.empty()) throw Error("select_candidate: no valid candidates");
    const CandidateProgram* best = &valid.front();
    for (const CandidateProgram& c : valid) {
        if (c.compile_outcome != CompileOutcome::valid)
            throw Error("select_candidate: candidate with outcome " +
                        to_string(c.compile_outcome));
        bool better = c.source_text.size() > best->source_text.size() ||
                      (c.source_text.size() == best->source_text.size() &&
                       (c.span_start < best->span_start ||
                        (c.span_start == best->span_start && c.span_end < best->span_end)));
        if (better) best = &c;
    }
    return *best;
}

std::string compose_explanation(const Post& post) {
    std::string out;
    for (const Snippet& s : post.snippets) {
        if (s.kind != SnippetKind::prose) continue;
        if (!out.empty()) out += "\n\n";
        out += s.text;
    }
    return out;
}

} // namespace edckit
