#include "edckit/html.hpp"

#include "edckit/util.hpp"

#include <cctype>
#include <cstdint>

namespace edckit {

namespace {

void append_utf8(std::string& out, std::uint32_t cp) {
    if (cp <= 0x7f) {
        out.push_back(static_cast<char>(cp));
    } else if (cp <= 0x7ff) {
        out.push_back(static_cast<char>(0xc0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
    } else if (cp <= 0xffff) {
        out.push_back(static_cast<char>(0xe0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3f)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
    } else if (cp <= 0x10ffff) {
        out.push_back(static_cast<char>(0xf0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3f)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3f)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
    }
}

} // namespace

std::string decode_entities(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    std::size_t i = 0;
    while (i < text.size()) {
        if (text[i] != '&') {
            out.push_back(text[i++]);
            continue;
        }
        std::size_t semi = text.find(';', i + 1);
        if (semi == std::string_view::npos || semi - i > 12) {
            out.push_back(text[i++]);
            continue;
        }
        std::string_view body = text.substr(i + 1, semi - i - 1);
        bool handled = true;
        if (body == "amp") out.push_back('&');
        else if (body == "lt") out.push_back('<');
        else if (body == "gt") out.push_back('>');
        else if (body == "quot") out.push_back('"');
        else if (body == "apos" || body == "#39") out.push_back('\'');
        else if (body == "nbsp") out.push_back(' ');
        else if (body.size() > 1 && body[0] == '#') {
            std::uint32_t cp = 0;
            bool ok = false;
            if (body[1] == 'x' || body[1] == 'X') {
                for (std::size_t k = 2; k < body.size(); ++k) {
                    char c = body[k];
                    std::uint32_t d;
                    if (c >= '0' && c <= '9') d = static_cast<std::uint32_t>(c - '0');
                    else if (c >= 'a' && c <= 'f') d = static_cast<std::uint32_t>(c - 'a' + 10);
                    else if (c >= 'A' && c <= 'F') d = static_cast<std::uint32_t>(c - 'A' + 10);
                    else { ok = false; break; }
                    cp = cp * 16 + d;
                    ok = true;
                }
            } else {
                for (std::size_t k = 1; k < body.size(); ++k) {
                    char c = body[k];
                    if (c < '0' || c > '9') { ok = false; break; }
                    cp = cp * 10 + static_cast<std::uint32_t>(c - '0');
                    ok = true;
                }
            }
            if (ok && cp > 0 && cp <= 0x10ffff) append_utf8(out, cp);
            else handled = false;
        } else {
            handled = false;
        }
        if (handled) i = semi + 1;
        else out.push_back(text[i++]);
    }
    return out;
}

std::vector<HtmlToken> tokenize_html(std::string_view html) {
    std::vector<HtmlToken> tokens;
    std::size_t i = 0;
    const std::size_t n = html.size();

    auto emit_text = [&](std::size_t from, std::size_t to) {
        if (to <= from) return;
        HtmlToken t;
        t.kind = HtmlToken::Kind::text;
        t.text.assign(html.substr(from, to - from));
        tokens.push_back(std::move(t));
    };

    while (i < n) {
        std::size_t lt = html.find('<', i);
        if (lt == std::string_view::npos) {
            emit_text(i, n);
            break;
        }
        emit_text(i, lt);
        if (html.substr(lt, 4) == "<!--") {
            std::size_t end = html.find("-->", lt + 4);
            i = end == std::string_view::npos ? n : end + 3;
            continue;
        }
        if (lt + 1 < n && (html[lt + 1] == '!' || html[lt + 1] == '?')) {
            std::size_t end = html.find('>', lt + 1);
            i = end == std::string_view::npos ? n : end + 1;
            continue;
        }
        std::size_t gt = html.find('>', lt + 1);
        if (gt == std::string_view::npos) {
            emit_text(lt, n);
            break;
        }
        std::string_view inner = html.substr(lt + 1, gt - lt - 1);
        HtmlToken tok;
        if (!inner.empty() && inner.front() == '/') {
            tok.kind = HtmlToken::Kind::close;
            tok.name = to_lower(trim(inner.substr(1)));
        } else {
            tok.kind = HtmlToken::Kind::open;
            if (!inner.empty() && inner.back() == '/') {
                tok.self_closing = true;
                inner.remove_suffix(1);
            }
            std::size_t p = 0;
            while (p < inner.size() && !isspace(static_cast<unsigned char>(inner[p]))) ++p;
            tok.name = to_lower(inner.substr(0, p));
            // attributes: name, name=bare, name="quoted", name='quoted'
            while (p < inner.size()) {
                while (p < inner.size() && isspace(static_cast<unsigned char>(inner[p]))) ++p;
                std::size_t name_start = p;
                while (p < inner.size() && inner[p] != '=' &&
                       !isspace(static_cast<unsigned char>(inner[p])))
                    ++p;
                if (p == name_start) break;
                std::string key = to_lower(inner.substr(name_start, p - name_start));
                std::string value;
                while (p < inner.size() && isspace(static_cast<unsigned char>(inner[p]))) ++p;
                if (p < inner.size() && inner[p] == '=') {
                    ++p;
                    while (p < inner.size() && isspace(static_cast<unsigned char>(inner[p]))) ++p;
                    if (p < inner.size() && (inner[p] == '"' || inner[p] == '\'')) {
                        char q = inner[p++];
                        std::size_t vstart = p;
                        while (p < inner.size() && inner[p] != q) ++p;
                        value = decode_entities(inner.substr(vstart, p - vstart));
                        if (p < inner.size()) ++p;
                    } else {
                        std::size_t vstart = p;
                        while (p < inner.size() && !isspace(static_cast<unsigned char>(inner[p])))
                            ++p;
                        value = decode_entities(inner.substr(vstart, p - vstart));
                    }
                }
                if (!key.empty()) tok.attrs[key] = value;
            }
        }
        tokens.push_back(tok);
        i = gt + 1;

        // raw-text elements: swallow everything up to the matching close tag
        if (tok.kind == HtmlToken::Kind::open && !tok.self_closing &&
            (tok.name == "script" || tok.name == "style")) {
            std::string close = "</" + tok.name;
            std::size_t end = i;
            for (;;) {
                end = html.find(close, end);
                if (end == std::string_view::npos) {
                    i = n;
                    break;
                }
                std::size_t after = end + close.size();
                if (after < n && (html[after] == '>' || isspace(static_cast<unsigned char>(html[after])))) {
                    std::size_t gt2 = html.find('>', after);
                    HtmlToken closeTok;
                    closeTok.kind = HtmlToken::Kind::close;
                    closeTok.name = tok.name;
                    tokens.push_back(closeTok);
                    i = gt2 == std::string_view::npos ? n : gt2 + 1;
                    break;
                }
                end = after;
            }
        }
    }
    return tokens;
}

} // namespace edckit
