// Writes the synthetic mini-corpus: five pseudo-languages in their real
// scripts, four imbalanced topic classes, a little markup/URL noise, the
// segmentation lexicons and a small pipeline config.
//
//   gen_corpus --out data/mini --seed 2024

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "lrtc/language.hpp"
#include "lrtc/rng.hpp"
#include "lrtc/utf8.hpp"

namespace {

using lrtc::Language;
using lrtc::Rng;
namespace fs = std::filesystem;

const std::vector<std::string> kLabels = {"culture", "economy", "sports", "tech"};
const std::vector<double> kLabelWeights = {0.4, 0.3, 0.2, 0.1};
constexpr std::size_t kCommonWords = 80;
constexpr std::size_t kTopicWords = 20;

std::string cp(char32_t c) { return lrtc::utf8::encode(c); }

template <typename T>
const T &pick(const std::vector<T> &v, Rng &rng) {
    return v[rng.uniform_int(v.size())];
}

std::vector<std::string> cps(std::initializer_list<char32_t> list) {
    std::vector<std::string> out;
    for (char32_t c : list) out.push_back(cp(c));
    return out;
}

struct Script {
    std::vector<std::string> consonants;
    std::vector<std::string> vowels;
};

Script script_for(Language lang) {
    switch (lang) {
        case Language::mn:
            return {cps({0x1828, 0x1829, 0x182A, 0x182D, 0x182E, 0x182F, 0x1830, 0x1831, 0x1832, 0x1833, 0x1834,
                         0x1835, 0x1837, 0x1838}),
                    cps({0x1820, 0x1821, 0x1822, 0x1823, 0x1824, 0x1825, 0x1826})};
        case Language::ug:
            return {cps({0x628, 0x62A, 0x62C, 0x62F, 0x631, 0x632, 0x633, 0x634, 0x641, 0x642, 0x643, 0x644, 0x645,
                         0x646, 0x647, 0x64A}),
                    cps({0x627, 0x6D5, 0x648, 0x6C7, 0x649, 0x6D0})};
        case Language::kk:
            return {cps({0x431, 0x432, 0x433, 0x434, 0x436, 0x437, 0x43A, 0x43B, 0x43C, 0x43D, 0x43F, 0x440, 0x441,
                         0x442, 0x448, 0x49B, 0x493, 0x4A3}),
                    cps({0x430, 0x435, 0x43E, 0x4B1, 0x4AF, 0x44B, 0x456, 0x4D9, 0x4E9})};
        case Language::bo:
            return {cps({0x0F40, 0x0F41, 0x0F42, 0x0F44, 0x0F45, 0x0F46, 0x0F47, 0x0F49, 0x0F4F, 0x0F50, 0x0F51,
                         0x0F53, 0x0F54, 0x0F55, 0x0F56, 0x0F58, 0x0F59, 0x0F5A, 0x0F5E, 0x0F5F, 0x0F61, 0x0F62,
                         0x0F63, 0x0F64, 0x0F66, 0x0F67}),
                    {"", cp(0x0F72), cp(0x0F74), cp(0x0F7A), cp(0x0F7C)}};
        case Language::ko:
            break;
    }
    return {};
}

std::string hangul(std::size_t lead, std::size_t vowel, std::size_t tail) {
    return cp(static_cast<char32_t>(0xAC00 + (lead * 21 + vowel) * 28 + tail));
}

/// A syllable in the language's script.
std::string syllable(Language lang, const Script &s, Rng &rng) {
    if (lang == Language::ko) {
        static const std::vector<std::size_t> tails = {0, 0, 0, 4, 8, 16, 21};
        return hangul(rng.uniform_int(19), rng.uniform_int(21), pick(tails, rng));
    }
    std::string out = pick(s.consonants, rng) + pick(s.vowels, rng);
    if (lang != Language::bo && rng.uniform01() < 0.3) out += pick(s.consonants, rng);
    return out;
}

struct Lexicon {
    std::vector<std::string> common;
    std::vector<std::vector<std::string>> topics;  // per label
    std::vector<std::string> suffixes;             // ko only
};

/// Distinct words; Tibetan words carry a tsheg after every syllable.
Lexicon make_lexicon(Language lang, Rng &rng) {
    const Script s = script_for(lang);
    std::set<std::string> used;
    auto word = [&] {
        for (;;) {
            const std::size_t n = lang == Language::ko ? 1 + rng.uniform_int(2) : 1 + rng.uniform_int(3);
            std::string w;
            for (std::size_t i = 0; i < n; ++i) {
                w += syllable(lang, s, rng);
                if (lang == Language::bo) w += cp(0x0F0B);
            }
            if (used.insert(w).second) return w;
        }
    };
    Lexicon lex;
    if (lang == Language::ko) {
        // Particles, one syllable each, never stems.
        for (const char32_t c : {0xC740, 0xB294, 0xC774, 0xAC00, 0xC744, 0xB97C, 0xC5D0, 0xC758, 0xB3C4, 0xB85C}) {
            lex.suffixes.push_back(cp(c));
            used.insert(cp(c));
        }
    }
    for (std::size_t i = 0; i < kCommonWords; ++i) lex.common.push_back(word());
    lex.topics.resize(kLabels.size());
    for (auto &t : lex.topics) {
        for (std::size_t i = 0; i < kTopicWords; ++i) t.push_back(word());
    }
    return lex;
}

std::size_t sample_label(Rng &rng) {
    double u = rng.uniform01();
    for (std::size_t i = 0; i < kLabelWeights.size(); ++i) {
        if (u < kLabelWeights[i]) return i;
        u -= kLabelWeights[i];
    }
    return kLabelWeights.size() - 1;
}

/// Skewed towards low indices, so a few common words dominate.
const std::string &common_word(const Lexicon &lex, Rng &rng) {
    const double u = rng.uniform01();
    return lex.common[static_cast<std::size_t>(u * u * static_cast<double>(lex.common.size()))];
}

std::string render(Language lang, const Lexicon &lex, std::size_t label, bool labeled, Rng &rng) {
    const std::size_t n = 10 + rng.uniform_int(16);
    std::vector<std::string> words;
    for (std::size_t i = 0; i < n; ++i) {
        std::string w = labeled && rng.uniform01() < 0.3 ? pick(lex.topics[label], rng)
                        : rng.uniform01() < 0.15         ? pick(lex.topics[rng.uniform_int(kLabels.size())], rng)
                                                         : common_word(lex, rng);
        if (lang == Language::ko && rng.uniform01() < 0.6) w += pick(lex.suffixes, rng);
        words.push_back(std::move(w));
    }
    std::string text;
    for (std::size_t i = 0; i < words.size(); ++i) {
        if (lang == Language::bo) {
            text += words[i];
            if (i % 7 == 6 || i + 1 == words.size()) text += cp(0x0F0D) + (i + 1 == words.size() ? "" : " ");
        } else {
            if (i) text += ' ';
            text += words[i];
        }
    }
    return text;
}

std::string add_noise(std::string text, Rng &rng, std::size_t serial) {
    const double u = rng.uniform01();
    if (u < 0.08) return "<p>" + text + "</p>";
    if (u < 0.13) return text + " https://example.org/doc/" + std::to_string(serial);
    return text;
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"generate the synthetic mini-corpus"};
    std::string out_dir = "data/mini";
    std::uint64_t seed = 2024;
    std::size_t labeled_docs = 200, unlabeled_docs = 100;
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--seed", seed, "generator seed");
    app.add_option("--docs", labeled_docs, "labeled documents per language");
    app.add_option("--unlabeled", unlabeled_docs, "unlabeled documents per language");
    CLI11_PARSE(app, argc, argv);

    const fs::path out(out_dir);
    fs::create_directories(out / "raw");
    std::ofstream labeled(out / "raw" / "labeled.jsonl");
    std::ofstream unlabeled(out / "raw" / "unlabeled.jsonl");

    for (Language lang : lrtc::kAllLanguages) {
        const std::string code(lrtc::to_code(lang));
        Rng rng(lrtc::derive_seed(seed, code));
        const Lexicon lex = make_lexicon(lang, rng);

        if (lang == Language::bo || lang == Language::ko) {
            std::set<std::string> entries(lex.common.begin(), lex.common.end());
            for (const auto &t : lex.topics) entries.insert(t.begin(), t.end());
            entries.insert(lex.suffixes.begin(), lex.suffixes.end());
            std::ofstream lf(out / ("lexicon_" + code + ".txt"));
            for (const auto &e : entries) lf << e << '\n';
        }

        for (std::size_t i = 0; i < labeled_docs + unlabeled_docs; ++i) {
            const bool is_labeled = i < labeled_docs;
            const std::size_t label = sample_label(rng);
            std::string text;
            if (rng.uniform01() < 0.03) {
                text = pick(lex.common, rng);  // too short; cleaning drops it
            } else {
                text = add_noise(render(lang, lex, label, is_labeled, rng), rng, i);
            }
            nlohmann::json j;
            j["id"] = code + (is_labeled ? "-" : "-u") + std::to_string(i);
            j["lang"] = code;
            if (is_labeled) j["label"] = kLabels[label];
            j["text"] = text;
            (is_labeled ? labeled : unlabeled) << j.dump() << '\n';
        }
    }
    std::cout << "wrote " << out.string() << "\n";
    return 0;
}
