#pragma once
// Small text utilities shared across modules: UTF-8 iteration, whitespace
// and punctuation classes, case folding, whitespace normalization.
//
// Everything here is locale-independent and byte-deterministic so that
// artifacts hash identically across platforms.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace hyrag::text {

// Decodes one UTF-8 codepoint starting at `pos`. Invalid bytes decode as
// their raw value (latin-1 style) and advance one byte, so malformed input
// never throws and never stalls.
inline char32_t decode_utf8(std::string_view s, size_t& pos) {
    const auto byte = [&](size_t i) { return static_cast<unsigned char>(s[i]); };
    unsigned char b0 = byte(pos);
    if (b0 < 0x80) { pos += 1; return b0; }
    auto cont = [&](size_t i) { return i < s.size() && (byte(i) & 0xC0) == 0x80; };
    if ((b0 & 0xE0) == 0xC0 && cont(pos + 1)) {
        char32_t cp = (char32_t(b0 & 0x1F) << 6) | (byte(pos + 1) & 0x3F);
        pos += 2;
        return cp;
    }
    if ((b0 & 0xF0) == 0xE0 && cont(pos + 1) && cont(pos + 2)) {
        char32_t cp = (char32_t(b0 & 0x0F) << 12) | (char32_t(byte(pos + 1) & 0x3F) << 6) |
                      (byte(pos + 2) & 0x3F);
        pos += 3;
        return cp;
    }
    if ((b0 & 0xF8) == 0xF0 && cont(pos + 1) && cont(pos + 2) && cont(pos + 3)) {
        char32_t cp = (char32_t(b0 & 0x07) << 18) | (char32_t(byte(pos + 1) & 0x3F) << 12) |
                      (char32_t(byte(pos + 2) & 0x3F) << 6) | (byte(pos + 3) & 0x3F);
        pos += 4;
        return cp;
    }
    pos += 1;
    return b0;
}

// Unicode whitespace, covering the ASCII controls plus the common space
// codepoints. Enough for natural-language corpora.
inline bool is_space(char32_t cp) {
    switch (cp) {
        case U' ': case U'\t': case U'\n': case U'\r':
        case 0x0B: case 0x0C: case 0x85: case 0xA0:
        case 0x1680: case 0x2028: case 0x2029: case 0x202F:
        case 0x205F: case 0x3000:
            return true;
        default:
            return cp >= 0x2000 && cp <= 0x200A;
    }
}

// ASCII punctuation only; non-ASCII symbols count as word characters.
inline bool is_punct(char32_t cp) {
    if (cp > 0x7E) return false;
    char c = static_cast<char>(cp);
    return (c >= '!' && c <= '/') || (c >= ':' && c <= '@') || (c >= '[' && c <= '`') ||
           (c >= '{' && c <= '~');
}

inline char ascii_lower(char c) {
    return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
}

inline std::string to_lower(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) out.push_back(ascii_lower(c));
    return out;
}

inline std::string_view trim(std::string_view s) {
    size_t b = 0, e = s.size();
    while (b < e) {
        size_t p = b;
        if (!is_space(decode_utf8(s, p))) break;
        b = p;
    }
    // Trailing trim scans forward; cheap at these sizes and keeps UTF-8 simple.
    size_t last_end = e;
    for (size_t p = b; p < e;) {
        char32_t cp = decode_utf8(s, p);
        if (!is_space(cp)) last_end = p;
    }
    return s.substr(b, last_end > b ? last_end - b : 0);
}

// Collapses every whitespace run to a single ASCII space and trims both ends.
inline std::string collapse_whitespace(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    bool pending_space = false;
    for (size_t p = 0; p < s.size();) {
        size_t start = p;
        char32_t cp = decode_utf8(s, p);
        if (is_space(cp)) {
            pending_space = !out.empty();
        } else {
            if (pending_space) out.push_back(' ');
            pending_space = false;
            out.append(s.substr(start, p - start));
        }
    }
    return out;
}

// Splits on whitespace after collapsing; no punctuation handling.
inline std::vector<std::string> split_ws(std::string_view s) {
    std::vector<std::string> out;
    std::string cur;
    for (size_t p = 0; p < s.size();) {
        size_t start = p;
        char32_t cp = decode_utf8(s, p);
        if (is_space(cp)) {
            if (!cur.empty()) out.push_back(std::move(cur)), cur.clear();
        } else {
            cur.append(s.substr(start, p - start));
        }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
}

inline bool starts_with_upper(std::string_view word) {
    return !word.empty() && word[0] >= 'A' && word[0] <= 'Z';
}

} // namespace hyrag::text
