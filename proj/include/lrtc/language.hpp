#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

#include "lrtc/error.hpp"

namespace lrtc {

enum class Language : std::uint8_t { mn = 0, bo = 1, ug = 2, kk = 3, ko = 4 };

inline constexpr std::size_t kNumLanguages = 5;

inline constexpr std::array<Language, kNumLanguages> kAllLanguages = {
    Language::mn, Language::bo, Language::ug, Language::kk, Language::ko};

inline constexpr std::string_view to_code(Language lang) {
    switch (lang) {
        case Language::mn:
            return "mn";
        case Language::bo:
            return "bo";
        case Language::ug:
            return "ug";
        case Language::kk:
            return "kk";
        case Language::ko:
            return "ko";
    }
    return "??";
}

inline constexpr std::size_t index_of(Language lang) { return static_cast<std::size_t>(lang); }

inline Language parse_language(std::string_view code) {
    for (Language l : kAllLanguages) {
        if (to_code(l) == code) return l;
    }
    throw LanguageError("unknown language code '" + std::string(code) + "'");
}

}  // namespace lrtc
