#pragma once

// Brute-force BPE reference for tests: recounts every pair from scratch on
// each iteration and shares no code with lrtc::bpe.

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "lrtc/utf8.hpp"

namespace oracle {

struct ReferenceBpe {
    std::vector<std::pair<std::string, std::string>> merges;
    std::vector<std::string> vocab;  // non-special subwords, in id order
};

inline ReferenceBpe reference_bpe(const std::map<std::string, std::uint64_t> &words, std::size_t target_vocab,
                                  const std::string &marker, std::uint64_t min_pair_count = 2,
                                  std::size_t num_special = 5) {
    std::vector<std::pair<std::vector<std::string>, std::uint64_t>> corpus;
    for (const auto &[w, n] : words) {
        std::vector<std::string> syms;
        for (char32_t c : lrtc::utf8::decode(w)) syms.push_back(lrtc::utf8::encode(c));
        if (!marker.empty()) syms.push_back(marker);
        corpus.push_back({syms, n});
    }
    auto live_symbols = [&] {
        std::map<std::string, std::uint64_t> counts;
        for (const auto &[syms, n] : corpus) {
            for (const auto &s : syms) counts[s] += n;
        }
        return counts;
    };

    ReferenceBpe out;
    std::vector<std::string> order;
    for (const auto &[s, n] : live_symbols()) order.push_back(s);

    while (num_special + live_symbols().size() < target_vocab) {
        std::map<std::pair<std::string, std::string>, std::uint64_t> pairs;
        for (const auto &[syms, n] : corpus) {
            for (std::size_t i = 0; i + 1 < syms.size(); ++i) pairs[{syms[i], syms[i + 1]}] += n;
        }
        const std::pair<std::string, std::string> *best = nullptr;
        std::uint64_t best_count = 0;
        for (const auto &[p, n] : pairs) {
            if (n > best_count) {  // map order gives the lexicographic tie-break
                best = &p;
                best_count = n;
            }
        }
        if (best == nullptr || best_count < min_pair_count) break;
        const auto chosen = *best;
        for (auto &[syms, n] : corpus) {
            std::vector<std::string> next;
            std::size_t i = 0;
            while (i < syms.size()) {
                if (i + 1 < syms.size() && syms[i] == chosen.first && syms[i + 1] == chosen.second) {
                    next.push_back(chosen.first + chosen.second);
                    i += 2;
                } else {
                    next.push_back(syms[i]);
                    i += 1;
                }
            }
            syms = next;
        }
        const std::string merged = chosen.first + chosen.second;
        bool known = false;
        for (const auto &s : order) known = known || s == merged;
        if (!known) order.push_back(merged);
        out.merges.push_back(chosen);
    }
    const auto live = live_symbols();
    for (const auto &s : order) {
        if (live.count(s)) out.vocab.push_back(s);
    }
    return out;
}

/// Applies merges by scanning the whole word once per rank.
inline std::vector<std::string> rescan_encode(const std::string &word,
                                              const std::vector<std::pair<std::string, std::string>> &merges,
                                              const std::string &marker) {
    std::vector<std::string> syms;
    for (char32_t c : lrtc::utf8::decode(word)) syms.push_back(lrtc::utf8::encode(c));
    if (!marker.empty()) syms.push_back(marker);
    for (const auto &[l, r] : merges) {
        std::vector<std::string> next;
        for (std::size_t i = 0; i < syms.size();) {
            if (i + 1 < syms.size() && syms[i] == l && syms[i + 1] == r) {
                next.push_back(l + r);
                i += 2;
            } else {
                next.push_back(syms[i++]);
            }
        }
        syms = next;
    }
    return syms;
}

}  // namespace oracle
