#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <tuple>
#include <unordered_map>
#include <utility>
#include <vector>

#include "lrtc/error.hpp"
#include "lrtc/language.hpp"
#include "lrtc/segment.hpp"
#include "lrtc/utf8.hpp"

namespace lrtc::bpe {

inline constexpr std::string_view kDefaultEndOfWord = "</w>";

struct Merge {
    std::string left;
    std::string right;
    std::size_t rank = 0;

    bool operator==(const Merge &) const = default;
};

/// Merges in rank order; `merges[i].rank == i`.
using MergeList = std::vector<Merge>;

using WordFrequencyTable = std::map<std::string, std::uint64_t>;

/// Id <-> subword table. Special tokens occupy ids 0..4.
class SubwordVocab {
   public:
    static constexpr int kPad = 0;
    static constexpr int kUnk = 1;
    static constexpr int kMask = 2;
    static constexpr int kBos = 3;
    static constexpr int kEos = 4;
    static constexpr int kNumSpecial = 5;
    static constexpr std::array<std::string_view, kNumSpecial> kSpecialStrings = {"<pad>", "<unk>", "<mask>",
                                                                                  "<s>", "</s>"};

    SubwordVocab() : SubwordVocab({}, std::string(kDefaultEndOfWord), 0) {}

    /// `subwords` excludes the specials; it is laid out from id kNumSpecial.
    SubwordVocab(const std::vector<std::string> &subwords, std::string end_of_word_marker,
                 std::size_t target_size = 0)
        : end_of_word_(std::move(end_of_word_marker)) {
        for (auto s : kSpecialStrings) add(std::string(s));
        for (const auto &s : subwords) {
            if (s.empty()) throw VocabError("empty subword");
            add(s);
        }
        target_size_ = target_size == 0 ? id_to_subword_.size() : target_size;
    }

    std::size_t size() const { return id_to_subword_.size(); }
    std::size_t target_size() const { return target_size_; }
    const std::string &end_of_word_marker() const { return end_of_word_; }

    std::optional<int> id_of(const std::string &subword) const {
        auto it = subword_to_id_.find(subword);
        if (it == subword_to_id_.end()) return std::nullopt;
        return it->second;
    }

    const std::string &subword(int id) const {
        if (id < 0 || static_cast<std::size_t>(id) >= id_to_subword_.size()) {
            throw VocabError("id " + std::to_string(id) + " out of range");
        }
        return id_to_subword_[static_cast<std::size_t>(id)];
    }

    static bool is_special(int id) { return id >= 0 && id < kNumSpecial; }

    /// Non-special subwords in id order.
    std::vector<std::string> subwords() const {
        return {id_to_subword_.begin() + kNumSpecial, id_to_subword_.end()};
    }

    bool operator==(const SubwordVocab &o) const {
        return id_to_subword_ == o.id_to_subword_ && end_of_word_ == o.end_of_word_;
    }

   private:
    void add(const std::string &s) {
        if (!subword_to_id_.emplace(s, static_cast<int>(id_to_subword_.size())).second) {
            throw VocabError("duplicate subword '" + s + "'");
        }
        id_to_subword_.push_back(s);
    }

    std::vector<std::string> id_to_subword_;
    std::unordered_map<std::string, int> subword_to_id_;
    std::string end_of_word_;
    std::size_t target_size_ = 0;
};

struct TrainResult {
    MergeList merges;
    SubwordVocab vocab;
};

/// Splits a word into its initial symbols: one per character, plus the
/// end-of-word marker as its own symbol when the marker is non-empty.
inline std::vector<std::string> initial_symbols(std::string_view word, std::string_view end_of_word) {
    std::vector<std::string> out = utf8::chars(word);
    if (!end_of_word.empty()) out.emplace_back(end_of_word);
    return out;
}

/// Merges every non-overlapping occurrence of (left, right), scanning left to right.
inline bool apply_merge(std::vector<std::string> &symbols, const std::string &left, const std::string &right) {
    if (symbols.size() < 2) return false;
    std::vector<std::string> out;
    out.reserve(symbols.size());
    bool merged = false;
    for (std::size_t i = 0; i < symbols.size();) {
        if (i + 1 < symbols.size() && symbols[i] == left && symbols[i + 1] == right) {
            out.push_back(left + right);
            i += 2;
            merged = true;
        } else {
            out.push_back(std::move(symbols[i]));
            ++i;
        }
    }
    symbols.swap(out);
    return merged;
}

namespace detail {

using Pair = std::pair<std::string, std::string>;

// Pair statistics maintained incrementally across merges. Only the words that
// contain the merged pair are touched per iteration.
class PairStats {
   public:
    void add_word(std::size_t word, const std::vector<std::string> &symbols, std::int64_t weight) {
        for (std::size_t i = 0; i + 1 < symbols.size(); ++i) {
            bump({symbols[i], symbols[i + 1]}, weight);
            where_[{symbols[i], symbols[i + 1]}][word] += 1;
        }
    }

    void remove_word(std::size_t word, const std::vector<std::string> &symbols, std::int64_t weight) {
        for (std::size_t i = 0; i + 1 < symbols.size(); ++i) {
            Pair p{symbols[i], symbols[i + 1]};
            bump(p, -weight);
            auto it = where_.find(p);
            if (--it->second[word] == 0) it->second.erase(word);
            if (it->second.empty()) where_.erase(it);
        }
    }

    /// Most frequent pair; ties go to the lexicographically smallest (left, right).
    std::optional<std::pair<Pair, std::int64_t>> best() const {
        if (ranked_.empty()) return std::nullopt;
        const auto &[neg, left, right] = *ranked_.begin();
        return std::make_pair(Pair{left, right}, -neg);
    }

    std::vector<std::size_t> words_with(const Pair &p) const {
        std::vector<std::size_t> out;
        auto it = where_.find(p);
        if (it != where_.end()) {
            for (const auto &[w, n] : it->second) out.push_back(w);
        }
        return out;
    }

   private:
    void bump(const Pair &p, std::int64_t delta) {
        std::int64_t &c = counts_[p];
        if (c > 0) ranked_.erase({-c, p.first, p.second});
        c += delta;
        if (c > 0) {
            ranked_.insert({-c, p.first, p.second});
        } else {
            counts_.erase(p);
        }
    }

    std::map<Pair, std::int64_t> counts_;
    std::set<std::tuple<std::int64_t, std::string, std::string>> ranked_;
    std::map<Pair, std::map<std::size_t, int>> where_;
};

}  // namespace detail

/// Learns merges over a word frequency table:
///  1. split words into characters, the alphabet is the initial vocabulary;
///  2. count adjacent symbol pairs inside words;
///  3. merge the most frequent pair and add the result to the vocabulary;
///  4. drop subwords whose occurrence count has fallen to zero.
/// Stops once the vocabulary (specials included) reaches `target_vocab`, or
/// when the best pair occurs fewer than `min_pair_count` times.
inline TrainResult train_bpe(const WordFrequencyTable &words, std::size_t target_vocab,
                             std::string_view end_of_word = kDefaultEndOfWord, std::uint64_t min_pair_count = 2) {
    std::vector<std::vector<std::string>> symbols;
    std::vector<std::int64_t> weights;
    for (const auto &[word, count] : words) {
        if (word.empty() || count == 0) continue;
        symbols.push_back(initial_symbols(word, end_of_word));
        weights.push_back(static_cast<std::int64_t>(count));
    }
    if (symbols.empty()) throw EmptyCorpus("word frequency table is empty");

    std::map<std::string, std::int64_t> occurrences;
    detail::PairStats stats;
    for (std::size_t w = 0; w < symbols.size(); ++w) {
        for (const auto &s : symbols[w]) occurrences[s] += weights[w];
        stats.add_word(w, symbols[w], weights[w]);
    }

    // Vocabulary order: alphabet (byte order), then merge products by rank.
    std::vector<std::string> order;
    for (const auto &[s, n] : occurrences) order.push_back(s);
    const std::size_t specials = SubwordVocab::kNumSpecial;
    if (target_vocab < specials + order.size()) {
        throw ConfigError("target vocabulary " + std::to_string(target_vocab) + " is smaller than alphabet (" +
                          std::to_string(order.size()) + ") plus special tokens");
    }

    MergeList merges;
    while (specials + occurrences.size() < target_vocab) {
        auto best = stats.best();
        if (!best || best->second < static_cast<std::int64_t>(min_pair_count)) break;
        const auto [left, right] = best->first;
        const std::string merged = left + right;

        for (std::size_t w : stats.words_with(best->first)) {
            stats.remove_word(w, symbols[w], weights[w]);
            for (const auto &s : symbols[w]) occurrences[s] -= weights[w];
            apply_merge(symbols[w], left, right);
            for (const auto &s : symbols[w]) occurrences[s] += weights[w];
            stats.add_word(w, symbols[w], weights[w]);
        }
        std::erase_if(occurrences, [](const auto &kv) { return kv.second <= 0; });

        if (std::find(order.begin(), order.end(), merged) == order.end()) order.push_back(merged);
        merges.push_back({left, right, merges.size()});
    }

    std::vector<std::string> alive;
    for (const auto &s : order) {
        if (occurrences.count(s)) alive.push_back(s);
    }
    return {std::move(merges), SubwordVocab(alive, std::string(end_of_word), target_vocab)};
}

/// Counts word occurrences across token sequences.
inline WordFrequencyTable count_words(const std::vector<segment::TokenSequence> &seqs) {
    WordFrequencyTable table;
    for (const auto &s : seqs) {
        for (const auto &t : s.tokens) ++table[t];
    }
    return table;
}

/// Applies a merge list to words. Caches per-word results; not thread-safe
/// for a single instance.
class Encoder {
   public:
    Encoder(const MergeList &merges, const SubwordVocab &vocab) : vocab_(&vocab) {
        for (const auto &m : merges) ranks_.emplace(detail::Pair{m.left, m.right}, m.rank);
    }

    /// Subword strings, including the end-of-word symbol.
    std::vector<std::string> pieces(std::string_view word) const {
        std::vector<std::string> symbols = initial_symbols(word, vocab_->end_of_word_marker());
        while (symbols.size() > 1) {
            std::size_t best_rank = SIZE_MAX;
            std::size_t best_at = 0;
            for (std::size_t i = 0; i + 1 < symbols.size(); ++i) {
                auto it = ranks_.find({symbols[i], symbols[i + 1]});
                if (it != ranks_.end() && it->second < best_rank) {
                    best_rank = it->second;
                    best_at = i;
                }
            }
            if (best_rank == SIZE_MAX) break;
            const std::string left = symbols[best_at];
            const std::string right = symbols[best_at + 1];
            apply_merge(symbols, left, right);
        }
        return symbols;
    }

    std::vector<int> encode_word(const std::string &word) {
        if (auto it = cache_.find(word); it != cache_.end()) return it->second;
        std::vector<int> ids;
        for (const auto &p : pieces(word)) ids.push_back(vocab_->id_of(p).value_or(SubwordVocab::kUnk));
        cache_.emplace(word, ids);
        return ids;
    }

    const SubwordVocab &vocab() const { return *vocab_; }

   private:
    const SubwordVocab *vocab_;
    std::map<detail::Pair, std::size_t> ranks_;
    std::unordered_map<std::string, std::vector<int>> cache_;
};

/// Characters (or final subwords) missing from the vocabulary map to UNK.
inline std::vector<int> encode_word(const std::string &word, const MergeList &merges, const SubwordVocab &vocab) {
    return Encoder(merges, vocab).encode_word(word);
}

inline std::vector<std::vector<int>> encode_corpus(const std::vector<segment::TokenSequence> &seqs,
                                                   const MergeList &merges, const SubwordVocab &vocab) {
    Encoder enc(merges, vocab);
    std::vector<std::vector<int>> out;
    out.reserve(seqs.size());
    for (const auto &s : seqs) {
        std::vector<int> ids;
        for (const auto &t : s.tokens) {
            auto w = enc.encode_word(t);
            ids.insert(ids.end(), w.begin(), w.end());
        }
        out.push_back(std::move(ids));
    }
    return out;
}

/// Concatenates subwords and removes end-of-word markers, which become word
/// separators. Special ids are skipped.
inline std::string decode(const std::vector<int> &ids, const SubwordVocab &vocab) {
    const std::string &eow = vocab.end_of_word_marker();
    std::string out;
    for (int id : ids) {
        if (SubwordVocab::is_special(id)) continue;
        std::string piece = vocab.subword(id);
        if (!eow.empty() && piece.size() >= eow.size() &&
            piece.compare(piece.size() - eow.size(), eow.size(), eow) == 0) {
            piece.resize(piece.size() - eow.size());
            out += piece;
            out.push_back(' ');
        } else {
            out += piece;
        }
    }
    if (!out.empty() && out.back() == ' ') out.pop_back();
    return out;
}

struct CoverageReport {
    double fraction_covered = 1.0;
    std::map<Language, double> per_language;
    std::map<Language, std::size_t> tokens_per_language;
};

/// Fraction of corpus tokens whose encoding contains no UNK id.
inline CoverageReport coverage(const SubwordVocab &vocab, const MergeList &merges,
                               const std::vector<segment::TokenSequence> &seqs) {
    Encoder enc(merges, vocab);
    std::map<Language, std::size_t> total, covered;
    for (const auto &s : seqs) {
        for (const auto &t : s.tokens) {
            auto ids = enc.encode_word(t);
            ++total[s.lang];
            if (std::find(ids.begin(), ids.end(), SubwordVocab::kUnk) == ids.end()) ++covered[s.lang];
        }
    }
    CoverageReport r;
    std::size_t all = 0, all_covered = 0;
    for (const auto &[lang, n] : total) {
        r.per_language[lang] = static_cast<double>(covered[lang]) / static_cast<double>(n);
        r.tokens_per_language[lang] = n;
        all += n;
        all_covered += covered[lang];
    }
    r.fraction_covered = all == 0 ? 1.0 : static_cast<double>(all_covered) / static_cast<double>(all);
    return r;
}

// Merge file: `left right` per line, line order = rank.
inline void save_merges(const std::string &path, const MergeList &merges) {
    std::ofstream out(path);
    if (!out) throw InvalidDataset("cannot write " + path);
    for (const auto &m : merges) out << m.left << ' ' << m.right << '\n';
}

inline MergeList load_merges(const std::string &path) {
    std::ifstream in(path);
    if (!in) throw InvalidDataset("cannot open " + path);
    MergeList merges;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto sp = line.find(' ');
        if (sp == std::string::npos || sp == 0 || sp + 1 == line.size() ||
            line.find(' ', sp + 1) != std::string::npos) {
            throw ParseError(line_no, "expected 'left right'");
        }
        merges.push_back({line.substr(0, sp), line.substr(sp + 1), merges.size()});
    }
    return merges;
}

// Vocab file: one non-special subword per line; id = kNumSpecial + line index.
inline void save_vocab(const std::string &path, const SubwordVocab &vocab) {
    std::ofstream out(path);
    if (!out) throw InvalidDataset("cannot write " + path);
    for (const auto &s : vocab.subwords()) out << s << '\n';
}

inline SubwordVocab load_vocab(const std::string &path, std::string end_of_word = std::string(kDefaultEndOfWord)) {
    std::ifstream in(path);
    if (!in) throw InvalidDataset("cannot open " + path);
    std::vector<std::string> subwords;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty()) subwords.push_back(line);
    }
    return SubwordVocab(subwords, std::move(end_of_word));
}

}  // namespace lrtc::bpe
