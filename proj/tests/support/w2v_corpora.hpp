#pragma once

// Synthetic corpora for the embedding tests.

#include <string>
#include <utility>
#include <vector>

#include "lrtc/rng.hpp"
#include "lrtc/segment.hpp"
#include "lrtc/word2vec.hpp"

namespace testdata {

inline std::string cluster_word(char cluster, int i) { return std::string(1, cluster) + std::to_string(i); }

/// Sentences of 8 words drawn from one of two disjoint 6-word clusters.
inline std::vector<lrtc::segment::TokenSequence> two_cluster_corpus(int sentences, std::uint64_t seed) {
    lrtc::Rng rng(seed);
    std::vector<lrtc::segment::TokenSequence> out;
    for (int s = 0; s < sentences; ++s) {
        const char cluster = s % 2 ? 'p' : 'q';
        lrtc::segment::TokenSequence seq{{}, lrtc::Language::ug, lrtc::segment::Granularity::Word};
        for (int k = 0; k < 8; ++k) seq.tokens.push_back(cluster_word(cluster, static_cast<int>(rng.uniform_int(6))));
        out.push_back(std::move(seq));
    }
    return out;
}

/// Mean cosine over same-cluster pairs and over cross-cluster pairs.
inline std::pair<double, double> cluster_cosines(const lrtc::w2v::EmbeddingTable &t) {
    double intra = 0, inter = 0;
    int n_intra = 0, n_inter = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        for (std::size_t j = i + 1; j < t.size(); ++j) {
            const double c = lrtc::w2v::cosine(t.input.row(i), t.input.row(j));
            if (t.words[i][0] == t.words[j][0]) {
                intra += c;
                ++n_intra;
            } else {
                inter += c;
                ++n_inter;
            }
        }
    }
    return {intra / n_intra, inter / n_inter};
}

}  // namespace testdata
