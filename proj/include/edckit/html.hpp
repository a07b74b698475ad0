#pragma once

#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace edckit {

// Decodes the named entities that matter for code (&amp; &lt; &gt; &quot;
// &apos; &nbsp;) plus numeric &#NNN; / &#xHH; references, emitting UTF-8.
std::string decode_entities(std::string_view text);

struct HtmlToken {
    enum class Kind { open, close, text };
    Kind kind = Kind::text;
    std::string name;                                   // lowercase tag name
    std::unordered_map<std::string, std::string> attrs; // lowercase keys, decoded values
    std::string text;                                   // raw text, entities NOT yet decoded
    bool self_closing = false;
};

// Forgiving tag-level tokenizer: no DOM, no validation, comments and
// script/style bodies skipped, attribute quoting optional.
std::vector<HtmlToken> tokenize_html(std::string_view html);

} // namespace edckit
