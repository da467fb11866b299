#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "lrtc/error.hpp"

namespace lrtc::utf8 {

/// Decodes strict UTF-8 (no overlongs, no surrogates, max U+10FFFF).
inline std::vector<char32_t> decode(std::string_view s) {
    std::vector<char32_t> out;
    out.reserve(s.size());
    std::size_t i = 0;
    const auto byte = [&](std::size_t k) { return static_cast<unsigned char>(s[k]); };
    while (i < s.size()) {
        const unsigned char b0 = byte(i);
        char32_t cp;
        std::size_t len;
        if (b0 < 0x80) {
            cp = b0;
            len = 1;
        } else if ((b0 & 0xE0) == 0xC0) {
            cp = b0 & 0x1F;
            len = 2;
        } else if ((b0 & 0xF0) == 0xE0) {
            cp = b0 & 0x0F;
            len = 3;
        } else if ((b0 & 0xF8) == 0xF0) {
            cp = b0 & 0x07;
            len = 4;
        } else {
            throw EncodingError("invalid lead byte at offset " + std::to_string(i));
        }
        if (i + len > s.size()) throw EncodingError("truncated sequence at offset " + std::to_string(i));
        for (std::size_t k = 1; k < len; ++k) {
            const unsigned char b = byte(i + k);
            if ((b & 0xC0) != 0x80) {
                throw EncodingError("invalid continuation byte at offset " + std::to_string(i + k));
            }
            cp = (cp << 6) | (b & 0x3F);
        }
        static constexpr char32_t kMin[5] = {0, 0, 0x80, 0x800, 0x10000};
        if (cp < kMin[len]) throw EncodingError("overlong encoding at offset " + std::to_string(i));
        if (cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
            throw EncodingError("invalid scalar value at offset " + std::to_string(i));
        }
        out.push_back(cp);
        i += len;
    }
    return out;
}

inline void append(std::string &out, char32_t cp) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

inline std::string encode(const std::vector<char32_t> &cps) {
    std::string out;
    out.reserve(cps.size());
    for (char32_t cp : cps) append(out, cp);
    return out;
}

inline std::string encode(char32_t cp) {
    std::string out;
    append(out, cp);
    return out;
}

/// Splits into one string per scalar value. Input must be valid UTF-8.
inline std::vector<std::string> chars(std::string_view s) {
    std::vector<std::string> out;
    for (char32_t cp : decode(s)) out.push_back(encode(cp));
    return out;
}

inline bool is_whitespace(char32_t c) {
    switch (c) {
        case 0x09: case 0x0A: case 0x0B: case 0x0C: case 0x0D: case 0x20:
        case 0x85: case 0xA0: case 0x1680: case 0x2028: case 0x2029:
        case 0x202F: case 0x205F: case 0x3000:
            return true;
        default:
            return c >= 0x2000 && c <= 0x200A;
    }
}

/// C0/C1 controls that are not whitespace.
inline bool is_control(char32_t c) {
    return (c < 0x20 || (c >= 0x7F && c <= 0x9F)) && !is_whitespace(c);
}

inline std::size_t count_non_whitespace(std::string_view s) {
    std::size_t n = 0;
    for (char32_t c : decode(s)) n += is_whitespace(c) ? 0 : 1;
    return n;
}

}  // namespace lrtc::utf8
