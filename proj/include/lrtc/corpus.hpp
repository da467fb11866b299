#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "lrtc/error.hpp"
#include "lrtc/language.hpp"
#include "lrtc/rng.hpp"
#include "lrtc/utf8.hpp"

namespace lrtc::corpus {

inline constexpr std::size_t kDefaultMinLength = 20;

struct RawDocument {
    std::string text;
    Language lang = Language::mn;
    std::string source_id;
};

struct CleanDocument {
    std::string text;
    Language lang = Language::mn;
    std::size_t length = 0;  // non-whitespace scalar values

    bool operator==(const CleanDocument &) const = default;
};

enum class RejectReason { TooShort, EmptyAfterCleaning };

inline std::string_view to_string(RejectReason r) {
    return r == RejectReason::TooShort ? "TooShort" : "EmptyAfterCleaning";
}

struct Rejection {
    RejectReason reason;
    std::string source_id;
};

using CleanResult = std::variant<CleanDocument, Rejection>;

struct LabeledExample {
    std::string text;
    std::string label;
    Language lang = Language::mn;

    bool operator==(const LabeledExample &) const = default;
};

namespace detail {

inline bool is_ascii_alnum(char32_t c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9');
}

inline bool is_scheme_char(char32_t c) { return is_ascii_alnum(c) || c == '+' || c == '-' || c == '.'; }

inline bool ends_url(char32_t c) { return utf8::is_whitespace(c) || c == '<' || c == '>' || c == '"'; }

// Replaces every `<...>` span (no nested '<') with a space, to a fixed point.
inline void strip_tags(std::vector<char32_t> &s) {
    bool changed = true;
    while (changed) {
        changed = false;
        std::vector<char32_t> out;
        out.reserve(s.size());
        std::size_t i = 0;
        while (i < s.size()) {
            if (s[i] == '<') {
                std::size_t j = i + 1;
                while (j < s.size() && s[j] != '<' && s[j] != '>') ++j;
                if (j < s.size() && s[j] == '>') {
                    out.push_back(' ');
                    i = j + 1;
                    changed = true;
                    continue;
                }
            }
            out.push_back(s[i++]);
        }
        s.swap(out);
    }
}

inline bool matches_at(const std::vector<char32_t> &s, std::size_t i, std::u32string_view lit) {
    if (i + lit.size() > s.size()) return false;
    for (std::size_t k = 0; k < lit.size(); ++k) {
        char32_t c = s[i + k];
        if (c >= 'A' && c <= 'Z') c += 32;
        if (c != lit[k]) return false;
    }
    return true;
}

// Replaces `scheme://...` and `www....` runs with a space.
inline void strip_urls(std::vector<char32_t> &s) {
    std::vector<char32_t> out;
    out.reserve(s.size());
    std::size_t i = 0;
    while (i < s.size()) {
        std::size_t url_start = s.size();
        if (matches_at(s, i, U"://")) {
            // Walk the scheme back over what has been emitted.
            std::size_t k = out.size();
            while (k > 0 && is_scheme_char(out[k - 1])) --k;
            while (k < out.size() && !((out[k] >= 'a' && out[k] <= 'z') || (out[k] >= 'A' && out[k] <= 'Z'))) ++k;
            if (k < out.size()) {
                out.resize(k);
                url_start = i;
            }
        } else if (matches_at(s, i, U"www.") && (out.empty() || !is_ascii_alnum(out.back()))) {
            url_start = i;
        }
        if (url_start != s.size()) {
            std::size_t j = url_start;
            while (j < s.size() && !ends_url(s[j])) ++j;
            out.push_back(' ');
            i = j;
            continue;
        }
        out.push_back(s[i++]);
    }
    s.swap(out);
}

}  // namespace detail

/// Removes control characters, markup tags and URLs, collapses whitespace,
/// then applies the length filter. Throws EncodingError on invalid UTF-8.
inline CleanResult clean_document(const RawDocument &raw, std::size_t min_length = kDefaultMinLength) {
    std::vector<char32_t> cps = utf8::decode(raw.text);
    std::erase_if(cps, utf8::is_control);
    detail::strip_tags(cps);
    detail::strip_urls(cps);

    std::string text;
    bool pending_space = false;
    std::size_t length = 0;
    for (char32_t c : cps) {
        if (utf8::is_whitespace(c)) {
            pending_space = !text.empty();
            continue;
        }
        if (pending_space) text.push_back(' ');
        pending_space = false;
        utf8::append(text, c);
        ++length;
    }
    if (length == 0) return Rejection{RejectReason::EmptyAfterCleaning, raw.source_id};
    if (length < min_length) return Rejection{RejectReason::TooShort, raw.source_id};
    return CleanDocument{std::move(text), raw.lang, length};
}

/// Checks the CleanDocument invariants; used by tests and by loaders of
/// previously cleaned files.
inline bool satisfies_clean_invariants(const CleanDocument &d, std::size_t min_length = kDefaultMinLength) {
    const auto cps = utf8::decode(d.text);
    std::size_t nonspace = 0;
    for (std::size_t i = 0; i < cps.size(); ++i) {
        const char32_t c = cps[i];
        if (utf8::is_control(c)) return false;
        if (utf8::is_whitespace(c)) {
            if (c != ' ' || i == 0 || i + 1 == cps.size() || cps[i - 1] == ' ') return false;
        } else {
            ++nonspace;
        }
    }
    std::vector<char32_t> probe = cps;
    detail::strip_tags(probe);
    detail::strip_urls(probe);
    if (probe != cps) return false;
    return nonspace == d.length && d.length >= min_length;
}

template <typename T>
struct DatasetSplit {
    std::vector<T> train;
    std::vector<T> valid;
    std::vector<T> test;
    std::uint64_t seed = 0;
};

/// Seeded shuffle, then contiguous slices: valid and test get floor(N/10)
/// each, train takes the remainder.
template <typename T>
DatasetSplit<T> split_corpus(const std::vector<T> &docs, std::uint64_t seed) {
    std::vector<std::size_t> order(docs.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng rng(seed);
    shuffle(order, rng);

    const std::size_t tenth = docs.size() / 10;
    const std::size_t n_train = docs.size() - 2 * tenth;
    DatasetSplit<T> out;
    out.seed = seed;
    for (std::size_t i = 0; i < order.size(); ++i) {
        const T &d = docs[order[i]];
        if (i < n_train) {
            out.train.push_back(d);
        } else if (i < n_train + tenth) {
            out.valid.push_back(d);
        } else {
            out.test.push_back(d);
        }
    }
    return out;
}

enum class BalanceStrategy { downsample_to_min };

/// Downsamples every label to the smallest class count. Within a label the
/// kept examples are a seeded uniform sample; output keeps input order.
/// `label_of` maps an element to its label string.
template <typename T, typename LabelOf>
std::vector<T> balance_by(const std::vector<T> &examples, LabelOf label_of, std::uint64_t seed,
                          const std::vector<std::string> &declared_labels = {},
                          BalanceStrategy = BalanceStrategy::downsample_to_min) {
    std::map<std::string, std::vector<std::size_t>> by_label;
    for (const auto &l : declared_labels) by_label[l];
    for (std::size_t i = 0; i < examples.size(); ++i) by_label[std::string(label_of(examples[i]))].push_back(i);
    if (by_label.empty()) throw InvalidDataset("empty label set");

    std::size_t min_count = SIZE_MAX;
    for (const auto &[label, idx] : by_label) {
        if (idx.empty()) throw InvalidDataset("label '" + label + "' has no examples");
        min_count = std::min(min_count, idx.size());
    }

    Rng rng(seed);
    std::vector<char> keep(examples.size(), 0);
    for (auto &[label, idx] : by_label) {
        // Partial Fisher-Yates: the first min_count slots become the sample.
        for (std::size_t i = 0; i < min_count; ++i) {
            const std::size_t j = i + static_cast<std::size_t>(rng.uniform_int(idx.size() - i));
            std::swap(idx[i], idx[j]);
            keep[idx[i]] = 1;
        }
    }
    std::vector<T> out;
    out.reserve(min_count * by_label.size());
    for (std::size_t i = 0; i < examples.size(); ++i) {
        if (keep[i]) out.push_back(examples[i]);
    }
    return out;
}

inline std::vector<LabeledExample> balance_dataset(const std::vector<LabeledExample> &examples,
                                                   BalanceStrategy strategy, std::uint64_t seed,
                                                   const std::vector<std::string> &declared_labels = {}) {
    return balance_by(
        examples, [](const LabeledExample &e) -> const std::string & { return e.label; }, seed,
        declared_labels, strategy);
}

/// One JSON-Lines record. `label` is optional for unlabeled corpora.
struct DocRecord {
    std::string id;
    Language lang = Language::mn;
    std::optional<std::string> label;
    std::string text;

    bool operator==(const DocRecord &) const = default;
};

inline DocRecord parse_record(std::string_view line, std::size_t line_no) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error &e) {
        throw ParseError(line_no, e.what());
    }
    if (!j.is_object()) throw ParseError(line_no, "record is not a JSON object");
    DocRecord r;
    auto text = j.find("text");
    if (text == j.end() || !text->is_string()) throw ParseError(line_no, "missing string field 'text'");
    r.text = text->get<std::string>();
    auto lang = j.find("lang");
    if (lang == j.end() || !lang->is_string()) throw ParseError(line_no, "missing string field 'lang'");
    try {
        r.lang = parse_language(lang->get<std::string>());
    } catch (const LanguageError &e) {
        throw LanguageError("line " + std::to_string(line_no) + ": " + e.what());
    }
    if (auto label = j.find("label"); label != j.end()) {
        if (!label->is_string()) throw ParseError(line_no, "field 'label' must be a string");
        r.label = label->get<std::string>();
    }
    if (auto id = j.find("id"); id != j.end()) {
        r.id = id->is_string() ? id->get<std::string>() : id->dump();
    } else {
        r.id = std::to_string(line_no);
    }
    return r;
}

inline nlohmann::json to_json(const DocRecord &r) {
    nlohmann::json j;
    j["id"] = r.id;
    j["lang"] = std::string(to_code(r.lang));
    if (r.label) j["label"] = *r.label;
    j["text"] = r.text;
    return j;
}

inline std::vector<DocRecord> load_records(const std::string &path) {
    std::ifstream in(path);
    if (!in) throw InvalidDataset("cannot open " + path);
    std::vector<DocRecord> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        out.push_back(parse_record(line, line_no));
    }
    return out;
}

inline void write_records(std::ostream &out, const std::vector<DocRecord> &records) {
    for (const auto &r : records) out << to_json(r).dump() << '\n';
}

/// Loads a labeled dataset; every record must carry a label.
inline std::vector<LabeledExample> load_dataset(const std::string &path) {
    std::ifstream in(path);
    if (!in) throw InvalidDataset("cannot open " + path);
    std::vector<LabeledExample> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        DocRecord r = parse_record(line, line_no);
        if (!r.label) throw ParseError(line_no, "missing string field 'label'");
        out.push_back({std::move(r.text), std::move(*r.label), r.lang});
    }
    return out;
}

/// Rejected-document log line: `source_id<TAB>reason`.
inline void write_rejection(std::ostream &out, const Rejection &r) {
    out << r.source_id << '\t' << to_string(r.reason) << '\n';
}

}  // namespace lrtc::corpus
