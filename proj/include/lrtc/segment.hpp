#pragma once

#include <algorithm>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "lrtc/error.hpp"
#include "lrtc/language.hpp"
#include "lrtc/utf8.hpp"

namespace lrtc::segment {

enum class Granularity { Word, Syllable, Morpheme };

inline std::string_view to_string(Granularity g) {
    switch (g) {
        case Granularity::Word:
            return "word";
        case Granularity::Syllable:
            return "syllable";
        case Granularity::Morpheme:
            return "morpheme";
    }
    return "?";
}

inline Granularity parse_granularity(std::string_view s) {
    if (s == "word") return Granularity::Word;
    if (s == "syllable") return Granularity::Syllable;
    if (s == "morpheme") return Granularity::Morpheme;
    throw GranularityError("unknown granularity '" + std::string(s) + "'");
}

struct TokenSequence {
    std::vector<std::string> tokens;
    Language lang = Language::mn;
    Granularity granularity = Granularity::Word;

    bool operator==(const TokenSequence &) const = default;
};

inline constexpr char32_t kTsheg = 0x0F0B;
inline constexpr char32_t kShad = 0x0F0D;

/// Immutable set of morphemes (or words) used by the longest-match segmenter.
class MorphemeLexicon {
   public:
    MorphemeLexicon(std::string name, const std::vector<std::string> &entries) : name_(std::move(name)) {
        for (const auto &e : entries) {
            if (e.empty()) throw InvalidDataset("lexicon '" + name_ + "' contains an empty entry");
            const auto cps = utf8::decode(e);
            max_len_ = std::max(max_len_, cps.size());
            entries_.insert(std::u32string(cps.begin(), cps.end()));
        }
        if (entries_.empty()) throw InvalidDataset("lexicon '" + name_ + "' is empty");
    }

    const std::string &name() const { return name_; }
    std::size_t size() const { return entries_.size(); }
    std::size_t max_entry_length() const { return max_len_; }
    bool contains(const std::u32string &cps) const { return entries_.count(cps) != 0; }

   private:
    std::string name_;
    std::set<std::u32string> entries_;
    std::size_t max_len_ = 0;
};

/// One entry per line; blank lines and surrounding whitespace are ignored.
inline MorphemeLexicon load_lexicon(const std::string &path) {
    std::ifstream in(path);
    if (!in) throw InvalidDataset("cannot open lexicon " + path);
    std::vector<std::string> entries;
    std::string line;
    while (std::getline(in, line)) {
        const auto b = line.find_first_not_of(" \t\r");
        if (b == std::string::npos) continue;
        const auto e = line.find_last_not_of(" \t\r");
        entries.push_back(line.substr(b, e - b + 1));
    }
    return MorphemeLexicon(path, entries);
}

namespace detail {

template <typename IsDelimiter>
std::vector<std::string> split_on(std::string_view text, IsDelimiter is_delim) {
    std::vector<std::string> out;
    std::string cur;
    for (char32_t c : utf8::decode(text)) {
        if (is_delim(c)) {
            if (!cur.empty()) out.push_back(std::move(cur));
            cur.clear();
        } else {
            utf8::append(cur, c);
        }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
}

}  // namespace detail

/// Maximal non-whitespace runs.
inline TokenSequence segment_space(std::string_view text, Language lang = Language::mn) {
    return {detail::split_on(text, utf8::is_whitespace), lang, Granularity::Word};
}

/// Splits on tsheg, shad and whitespace; the delimiters are dropped.
inline TokenSequence segment_tibetan_syllables(std::string_view text) {
    auto is_delim = [](char32_t c) { return c == kTsheg || c == kShad || utf8::is_whitespace(c); };
    return {detail::split_on(text, is_delim), Language::bo, Granularity::Syllable};
}

/// Greedy left-to-right longest match inside each whitespace-delimited run.
/// Positions no entry covers become single-character tokens.
inline TokenSequence segment_longest_match(std::string_view text, const MorphemeLexicon &lexicon,
                                           Language lang = Language::ko,
                                           Granularity granularity = Granularity::Morpheme) {
    TokenSequence out{{}, lang, granularity};
    const std::vector<char32_t> cps = utf8::decode(text);
    std::size_t i = 0;
    while (i < cps.size()) {
        if (utf8::is_whitespace(cps[i])) {
            ++i;
            continue;
        }
        std::size_t run_end = i;
        while (run_end < cps.size() && !utf8::is_whitespace(cps[run_end])) ++run_end;
        std::size_t take = 1;
        for (std::size_t len = std::min(lexicon.max_entry_length(), run_end - i); len > 1; --len) {
            if (lexicon.contains(std::u32string(cps.begin() + i, cps.begin() + i + len))) {
                take = len;
                break;
            }
        }
        std::string token;
        for (std::size_t k = i; k < i + take; ++k) utf8::append(token, cps[k]);
        out.tokens.push_back(std::move(token));
        i += take;
    }
    return out;
}

/// Whether `granularity` is meaningful for `lang`.
inline bool is_valid_combination(Language lang, Granularity granularity) {
    switch (lang) {
        case Language::mn:
        case Language::ug:
        case Language::kk:
            return granularity == Granularity::Word;
        case Language::bo:
            return granularity == Granularity::Word || granularity == Granularity::Syllable;
        case Language::ko:
            return granularity == Granularity::Morpheme;
    }
    return false;
}

/// The per-language dispatch: space for mn/ug/kk, tsheg for bo syllables,
/// lexicon longest-match for bo words and ko morphemes.
inline TokenSequence segment(std::string_view text, Language lang, Granularity granularity,
                             const MorphemeLexicon *lexicon = nullptr) {
    if (!is_valid_combination(lang, granularity)) {
        throw GranularityError("granularity '" + std::string(to_string(granularity)) +
                               "' is not available for language '" + std::string(to_code(lang)) + "'");
    }
    if (lang == Language::bo && granularity == Granularity::Syllable) return segment_tibetan_syllables(text);
    if (lang == Language::bo || lang == Language::ko) {
        if (lexicon == nullptr) {
            throw LexiconRequired("language '" + std::string(to_code(lang)) + "' at granularity '" +
                                  std::string(to_string(granularity)) + "' needs a lexicon");
        }
        return segment_longest_match(text, *lexicon, lang, granularity);
    }
    return segment_space(text, lang);
}

/// The delimiter that rejoins a segmenter's tokens into re-segmentable text.
inline std::string canonical_delimiter(Language lang, Granularity granularity) {
    if (lang == Language::bo && granularity == Granularity::Syllable) return utf8::encode(kTsheg);
    return " ";
}

inline std::string join(const std::vector<std::string> &tokens, std::string_view delim) {
    std::string out;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (i) out.append(delim);
        out.append(tokens[i]);
    }
    return out;
}

}  // namespace lrtc::segment
