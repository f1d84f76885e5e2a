#include "hypobench/textnorm.hpp"

#include <algorithm>
#include <cstdint>
#include <vector>

namespace hypobench::textnorm {

namespace {

// One normalized code point plus the byte span it covers in the original
// string. Spans survive every transform so a match can be projected back.
struct Elem {
    char32_t cp;
    uint32_t begin;
    uint32_t end;
};

using Norm = std::vector<Elem>;

bool is_space_cp(char32_t c) {
    switch (c) {
        case U' ': case U'\t': case U'\n': case U'\r': case U'\f': case U'\v':
        case 0x00A0: case 0x1680: case 0x2028: case 0x2029: case 0x202F:
        case 0x205F: case 0x3000:
            return true;
        default:
            return c >= 0x2000 && c <= 0x200A;
    }
}

bool is_dash_cp(char32_t c) {
    // ASCII hyphen plus the Unicode dash block; all become a single space.
    return c == U'-' || (c >= 0x2010 && c <= 0x2015);
}

bool is_punct_cp(char32_t c) {
    if (c < 0x80) {
        return (c >= '!' && c <= '/') || (c >= ':' && c <= '@') ||
               (c >= '[' && c <= '`') || (c >= '{' && c <= '~');
    }
    switch (c) {
        case 0x00A1: case 0x00A7: case 0x00AB: case 0x00B6: case 0x00B7:
        case 0x00BB: case 0x00BF: case 0x02BC: case 0x2044: case 0x3001:
        case 0x3002: case 0x300C: case 0x300D:
            return true;
        default:
            // General Punctuation block minus the space and dash ranges
            // handled above (covers curly quotes, ellipsis, daggers, ...).
            return (c >= 0x200B && c <= 0x200F) || (c >= 0x2016 && c <= 0x2027) ||
                   (c >= 0x2030 && c <= 0x205E);
    }
}

char32_t lower_cp(char32_t c) {
    if (c >= U'A' && c <= U'Z') {
        return c + 0x20;
    }
    // Latin-1 uppercase letters, excluding the multiplication sign.
    if (c >= 0x00C0 && c <= 0x00DE && c != 0x00D7) {
        return c + 0x20;
    }
    return c;
}

// UTF-8 decode with byte spans. Invalid bytes are passed through one at a
// time as their byte value so malformed input never aborts a pipeline run.
std::vector<Elem> decode_utf8(std::string_view s) {
    std::vector<Elem> out;
    out.reserve(s.size());
    size_t i = 0;
    while (i < s.size()) {
        unsigned char b0 = static_cast<unsigned char>(s[i]);
        size_t len = 1;
        char32_t cp = b0;
        if (b0 >= 0xF0) {
            len = 4;
            cp = b0 & 0x07;
        } else if (b0 >= 0xE0) {
            len = 3;
            cp = b0 & 0x0F;
        } else if (b0 >= 0xC0) {
            len = 2;
            cp = b0 & 0x1F;
        }
        if (len > 1) {
            if (i + len > s.size()) {
                len = 1;
                cp = b0;
            } else {
                bool ok = true;
                char32_t acc = cp;
                for (size_t k = 1; k < len; ++k) {
                    unsigned char bk = static_cast<unsigned char>(s[i + k]);
                    if ((bk & 0xC0) != 0x80) {
                        ok = false;
                        break;
                    }
                    acc = (acc << 6) | (bk & 0x3F);
                }
                if (ok) {
                    cp = acc;
                } else {
                    len = 1;
                    cp = b0;
                }
            }
        }
        out.push_back({cp, static_cast<uint32_t>(i), static_cast<uint32_t>(i + len)});
        i += len;
    }
    return out;
}

void append_utf8(std::string& out, char32_t cp) {
    if (cp < 0x80) {
        out += static_cast<char>(cp);
    } else if (cp < 0x800) {
        out += static_cast<char>(0xC0 | (cp >> 6));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    } else if (cp < 0x10000) {
        out += static_cast<char>(0xE0 | (cp >> 12));
        out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    } else {
        out += static_cast<char>(0xF0 | (cp >> 18));
        out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
        out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    }
}

// Merges runs of ' ' into one element spanning the whole run, then trims.
Norm collapse_spaces(const Norm& in) {
    Norm out;
    out.reserve(in.size());
    size_t i = 0;
    while (i < in.size()) {
        if (in[i].cp != U' ') {
            out.push_back(in[i]);
            ++i;
            continue;
        }
        uint32_t begin = in[i].begin;
        uint32_t end = in[i].end;
        while (i + 1 < in.size() && in[i + 1].cp == U' ') {
            ++i;
            end = in[i].end;
        }
        out.push_back({U' ', begin, end});
        ++i;
    }
    while (!out.empty() && out.front().cp == U' ') {
        out.erase(out.begin());
    }
    while (!out.empty() && out.back().cp == U' ') {
        out.pop_back();
    }
    return out;
}

// Stage "raw": lowercase, whitespace to single spaces, trim.
Norm stage_raw(std::string_view s) {
    Norm elems = decode_utf8(s);
    for (auto& e : elems) {
        e.cp = is_space_cp(e.cp) ? U' ' : lower_cp(e.cp);
    }
    return collapse_spaces(elems);
}

// Deletes bracketed spans, innermost pairs first. An unmatched closing
// bracket is left in place (and falls to the punctuation stage later).
Norm strip_brackets(Norm elems) {
    size_t pos = 0;
    while (true) {
        size_t close = elems.size();
        char32_t open_cp = 0;
        for (size_t i = pos; i < elems.size(); ++i) {
            if (elems[i].cp == U')') {
                close = i;
                open_cp = U'(';
                break;
            }
            if (elems[i].cp == U']') {
                close = i;
                open_cp = U'[';
                break;
            }
        }
        if (close == elems.size()) {
            break;
        }
        size_t open = close;
        bool found = false;
        while (open > 0) {
            --open;
            if (elems[open].cp == open_cp) {
                found = true;
                break;
            }
        }
        if (!found) {
            pos = close + 1;
            continue;
        }
        elems.erase(elems.begin() + static_cast<ptrdiff_t>(open),
                    elems.begin() + static_cast<ptrdiff_t>(close) + 1);
        pos = open;
    }
    return collapse_spaces(std::move(elems));
}

// Dashes to spaces, punctuation dropped, spaces re-collapsed.
Norm strip_punct(Norm elems) {
    Norm out;
    out.reserve(elems.size());
    for (const auto& e : elems) {
        if (is_dash_cp(e.cp)) {
            out.push_back({U' ', e.begin, e.end});
        } else if (!is_punct_cp(e.cp)) {
            out.push_back(e);
        }
    }
    return collapse_spaces(std::move(out));
}

std::u32string key_of(const Norm& elems) {
    std::u32string key;
    key.reserve(elems.size());
    for (const auto& e : elems) {
        key += e.cp;
    }
    return key;
}

// Position of the first occurrence of needle in hay, or npos.
size_t find_sub(const std::u32string& hay, const std::u32string& needle) {
    if (needle.empty()) {
        return std::u32string::npos;
    }
    return hay.find(needle);
}

struct Located {
    MatchStage stage = MatchStage::none;
    size_t pos = 0;
    size_t len = 0;
    Norm text_elems;
};

Located locate(std::string_view text, std::string_view subtext) {
    Norm t = stage_raw(text);
    Norm s = stage_raw(subtext);
    size_t pos = find_sub(key_of(t), key_of(s));
    if (pos != std::u32string::npos) {
        return {MatchStage::raw, pos, s.size(), std::move(t)};
    }

    t = strip_brackets(std::move(t));
    s = strip_brackets(std::move(s));
    pos = find_sub(key_of(t), key_of(s));
    if (pos != std::u32string::npos) {
        return {MatchStage::bracket_stripped, pos, s.size(), std::move(t)};
    }

    t = strip_punct(std::move(t));
    s = strip_punct(std::move(s));
    pos = find_sub(key_of(t), key_of(s));
    if (pos != std::u32string::npos) {
        return {MatchStage::punct_stripped, pos, s.size(), std::move(t)};
    }
    return {};
}

}  // namespace

const char* to_string(MatchStage stage) {
    switch (stage) {
        case MatchStage::raw: return "raw";
        case MatchStage::bracket_stripped: return "bracket_stripped";
        case MatchStage::punct_stripped: return "punct_stripped";
        case MatchStage::none: return "none";
    }
    return "none";
}

MatchReport contains_term(std::string_view text, std::string_view subtext) {
    Located loc = locate(text, subtext);
    return {loc.stage != MatchStage::none, loc.stage};
}

std::string replace_term(std::string_view text, std::string_view old_term,
                         std::string_view new_term) {
    Located loc = locate(text, old_term);
    if (loc.stage == MatchStage::none) {
        throw NotReplaceableError("term not found in text: " + std::string(old_term));
    }
    uint32_t byte_begin = loc.text_elems[loc.pos].begin;
    uint32_t byte_end = loc.text_elems[loc.pos + loc.len - 1].end;
    std::string out;
    out.reserve(text.size() + new_term.size());
    out.append(text.substr(0, byte_begin));
    out.append(new_term);
    out.append(text.substr(byte_end));
    return out;
}

std::string full_normalize(std::string_view text) {
    Norm n = strip_punct(strip_brackets(stage_raw(text)));
    std::string out;
    out.reserve(n.size());
    for (const auto& e : n) {
        append_utf8(out, e.cp);
    }
    return out;
}

}  // namespace hypobench::textnorm
