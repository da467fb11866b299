#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "lrtc/error.hpp"
#include "lrtc/nn/tensor.hpp"
#include "lrtc/rng.hpp"
#include "lrtc/segment.hpp"

namespace lrtc::w2v {

using nn::Tensor;

class WordVocab {
   public:
    WordVocab() = default;
    WordVocab(std::vector<std::string> words, std::vector<std::uint64_t> freq, std::uint64_t min_count)
        : words_(std::move(words)), freq_(std::move(freq)), min_count_(min_count) {
        for (std::size_t i = 0; i < words_.size(); ++i) index_.emplace(words_[i], static_cast<int>(i));
    }

    std::size_t size() const { return words_.size(); }
    const std::vector<std::string> &words() const { return words_; }
    const std::vector<std::uint64_t> &frequencies() const { return freq_; }
    std::uint64_t min_count() const { return min_count_; }
    const std::string &word(int id) const { return words_.at(static_cast<std::size_t>(id)); }

    std::optional<int> id_of(std::string_view w) const {
        auto it = index_.find(std::string(w));
        if (it == index_.end()) return std::nullopt;
        return it->second;
    }

    bool operator==(const WordVocab &o) const {
        return words_ == o.words_ && freq_ == o.freq_ && min_count_ == o.min_count_;
    }

   private:
    std::vector<std::string> words_;
    std::vector<std::uint64_t> freq_;
    std::unordered_map<std::string, int> index_;
    std::uint64_t min_count_ = 1;
};

/// Ids by descending frequency, ties broken lexicographically.
inline WordVocab build_word_vocab(const std::vector<segment::TokenSequence> &seqs, std::uint64_t min_count = 1) {
    std::map<std::string, std::uint64_t> counts;
    for (const auto &s : seqs) {
        for (const auto &t : s.tokens) ++counts[t];
    }
    if (counts.empty()) throw EmptyCorpus("no tokens to build a word vocabulary from");
    std::vector<std::pair<std::string, std::uint64_t>> kept;
    for (const auto &[w, n] : counts) {
        if (n >= min_count) kept.emplace_back(w, n);
    }
    std::stable_sort(kept.begin(), kept.end(), [](const auto &a, const auto &b) { return a.second > b.second; });
    std::vector<std::string> words;
    std::vector<std::uint64_t> freq;
    for (auto &[w, n] : kept) {
        words.push_back(std::move(w));
        freq.push_back(n);
    }
    return WordVocab(std::move(words), std::move(freq), min_count);
}

struct EmbeddingTable {
    std::vector<std::string> words;
    Tensor input;   // V x d, the published vectors
    Tensor output;  // V x d, context vectors
    std::size_t dim = 0;

    std::size_t size() const { return words.size(); }
    std::optional<int> id_of(std::string_view w) const {
        for (std::size_t i = 0; i < words.size(); ++i) {
            if (words[i] == w) return static_cast<int>(i);
        }
        return std::nullopt;
    }
    bool operator==(const EmbeddingTable &) const = default;
};

struct SkipGramConfig {
    std::size_t dim = 300;
    std::size_t window = 5;
    std::size_t negatives = 5;
    std::size_t epochs = 5;
    double lr = 0.025;
    double min_lr_fraction = 1e-4;
    double sample = 1e-4;  // <= 0 disables subsampling
    std::uint64_t seed = 1;

    void validate() const {
        if (dim == 0) throw ConfigError("dim must be positive");
        if (window < 1) throw ConfigError("window must be >= 1");
        if (negatives < 1) throw ConfigError("negatives must be >= 1");
    }
};

/// Skip-gram (center, context) pairs. Each position draws its own window
/// radius uniformly from [1, window].
template <UniformSource R>
std::vector<std::pair<int, int>> generate_pairs(const std::vector<int> &seq, std::size_t window, R &rng) {
    if (window < 1) throw ConfigError("window must be >= 1");
    std::vector<std::pair<int, int>> out;
    const std::size_t n = seq.size();
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t b = 1 + static_cast<std::size_t>(rng.uniform_int(window));
        const std::size_t lo = i >= b ? i - b : 0;
        const std::size_t hi = std::min(n - 1, i + b);
        for (std::size_t j = lo; j <= hi; ++j) {
            if (j != i) out.emplace_back(seq[i], seq[j]);
        }
    }
    return out;
}

/// Cumulative unigram^0.75 distribution for drawing negatives.
class NoiseDistribution {
   public:
    explicit NoiseDistribution(const std::vector<std::uint64_t> &freq, double power = 0.75) {
        double total = 0.0;
        for (auto f : freq) {
            total += std::pow(static_cast<double>(f), power);
            cdf_.push_back(total);
        }
        for (double &c : cdf_) c /= total;
    }

    template <UniformSource R>
    int sample(R &rng) const {
        const double u = rng.uniform01();
        auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
        if (it == cdf_.end()) --it;
        return static_cast<int>(it - cdf_.begin());
    }

   private:
    std::vector<double> cdf_;
};

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

inline double dot_rows(const Tensor &a, std::size_t i, const Tensor &b, std::size_t j) {
    double s = 0.0;
    const auto ra = a.row(i), rb = b.row(j);
    for (std::size_t k = 0; k < ra.size(); ++k) s += ra[k] * rb[k];
    return s;
}

/// Negative-sampling loss for one pair:
/// -log s(u_ctx . v_c) - sum_neg log s(-u_neg . v_c).
inline double sgns_loss(const Tensor &input, const Tensor &output, int center, int context,
                        const std::vector<int> &negatives) {
    const auto c = static_cast<std::size_t>(center);
    double loss = -std::log(sigmoid(dot_rows(output, static_cast<std::size_t>(context), input, c)));
    for (int n : negatives) loss -= std::log(sigmoid(-dot_rows(output, static_cast<std::size_t>(n), input, c)));
    return loss;
}

/// One SGD step on sgns_loss. Context vectors see the pre-update center
/// vector, so with distinct targets the step is exactly -lr * gradient.
/// Negatives equal to the context word are skipped.
inline void sgns_update(Tensor &input, Tensor &output, int center, int context, const std::vector<int> &negatives,
                        double lr) {
    const std::size_t d = input.cols();
    auto v = input.row(static_cast<std::size_t>(center));
    std::vector<double> grad_v(d, 0.0);
    auto step = [&](int target, double label) {
        auto u = output.row(static_cast<std::size_t>(target));
        double dot = 0.0;
        for (std::size_t k = 0; k < d; ++k) dot += u[k] * v[k];
        const double g = (label - sigmoid(dot)) * lr;
        for (std::size_t k = 0; k < d; ++k) grad_v[k] += g * u[k];
        for (std::size_t k = 0; k < d; ++k) u[k] += g * v[k];
    };
    step(context, 1.0);
    for (int n : negatives) {
        if (n != context) step(n, 0.0);
    }
    for (std::size_t k = 0; k < d; ++k) v[k] += grad_v[k];
}

/// Seeded initialization: input uniform in [-0.5/d, 0.5/d), output zero.
inline EmbeddingTable initial_table(const WordVocab &vocab, const SkipGramConfig &config) {
    config.validate();
    if (vocab.size() == 0) throw EmptyCorpus("empty word vocabulary");
    Rng rng(derive_seed(config.seed, "w2v.init"));
    EmbeddingTable t;
    t.words = vocab.words();
    t.dim = config.dim;
    t.input = Tensor::uniform({vocab.size(), config.dim}, 0.5 / static_cast<double>(config.dim), rng);
    t.output = Tensor({vocab.size(), config.dim}, 0.0);
    return t;
}

inline std::vector<std::vector<int>> to_ids(const std::vector<segment::TokenSequence> &seqs, const WordVocab &vocab) {
    std::vector<std::vector<int>> out;
    for (const auto &s : seqs) {
        std::vector<int> ids;
        for (const auto &t : s.tokens) {
            if (auto id = vocab.id_of(t)) ids.push_back(*id);
        }
        out.push_back(std::move(ids));
    }
    return out;
}

/// Single-threaded SGD over skip-gram pairs with negative sampling.
/// The learning rate decays linearly with the fraction of tokens processed.
inline EmbeddingTable train_skipgram(const std::vector<segment::TokenSequence> &seqs, const WordVocab &vocab,
                                     const SkipGramConfig &config) {
    EmbeddingTable t = initial_table(vocab, config);
    const auto corpus = to_ids(seqs, vocab);
    std::uint64_t total_tokens = 0;
    for (const auto &s : corpus) total_tokens += s.size();
    if (config.epochs == 0 || total_tokens == 0) return t;

    const NoiseDistribution noise(vocab.frequencies());
    std::vector<double> keep_prob(vocab.size(), 1.0);
    if (config.sample > 0) {
        std::uint64_t train_words = 0;
        for (auto f : vocab.frequencies()) train_words += f;
        const double threshold = config.sample * static_cast<double>(train_words);
        for (std::size_t i = 0; i < vocab.size(); ++i) {
            const double f = static_cast<double>(vocab.frequencies()[i]);
            keep_prob[i] = std::min(1.0, (std::sqrt(f / threshold) + 1.0) * threshold / f);
        }
    }

    Rng rng(derive_seed(config.seed, "w2v.train"));
    const double budget = static_cast<double>(config.epochs * total_tokens);
    std::uint64_t processed = 0;
    std::vector<int> negs(config.negatives);
    std::vector<int> kept;
    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        for (const auto &seq : corpus) {
            const double frac = static_cast<double>(processed) / budget;
            const double lr = config.lr * std::max(1.0 - frac, config.min_lr_fraction);
            processed += seq.size();
            kept.clear();
            for (int id : seq) {
                if (keep_prob[static_cast<std::size_t>(id)] >= 1.0 ||
                    rng.uniform01() < keep_prob[static_cast<std::size_t>(id)]) {
                    kept.push_back(id);
                }
            }
            for (const auto &[center, context] : generate_pairs(kept, config.window, rng)) {
                for (int &n : negs) n = noise.sample(rng);
                sgns_update(t.input, t.output, center, context, negs, lr);
            }
        }
    }
    return t;
}

inline double cosine(std::span<const double> a, std::span<const double> b) {
    double ab = 0, aa = 0, bb = 0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        ab += a[k] * b[k];
        aa += a[k] * a[k];
        bb += b[k] * b[k];
    }
    if (aa == 0.0 || bb == 0.0) return 0.0;
    return ab / std::sqrt(aa * bb);
}

/// Top-k words by cosine over input vectors, the query excluded; ties by word.
inline std::vector<std::pair<std::string, double>> nearest_neighbors(std::string_view word, std::size_t k,
                                                                     const EmbeddingTable &table) {
    const auto q = table.id_of(word);
    if (!q) throw UnknownWord("word '" + std::string(word) + "' is not in the embedding table");
    std::vector<std::pair<std::string, double>> all;
    for (std::size_t i = 0; i < table.size(); ++i) {
        if (static_cast<int>(i) == *q) continue;
        all.emplace_back(table.words[i], cosine(table.input.row(static_cast<std::size_t>(*q)), table.input.row(i)));
    }
    std::sort(all.begin(), all.end(), [](const auto &a, const auto &b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    if (all.size() > k) all.resize(k);
    return all;
}

/// Text format: "V d" header, then "word v1 ... vd" per line.
inline void save_embeddings(const std::string &path, const EmbeddingTable &t) {
    std::ofstream out(path);
    if (!out) throw InvalidDataset("cannot write " + path);
    out << t.size() << ' ' << t.dim << '\n' << std::setprecision(17);
    for (std::size_t i = 0; i < t.size(); ++i) {
        out << t.words[i];
        for (double v : t.input.row(i)) out << ' ' << v;
        out << '\n';
    }
}

inline EmbeddingTable load_embeddings(const std::string &path) {
    std::ifstream in(path);
    if (!in) throw InvalidDataset("cannot open " + path);
    std::size_t v = 0, d = 0;
    if (!(in >> v >> d) || v == 0 || d == 0) throw ParseError(1, path + ": bad embedding header");
    EmbeddingTable t;
    t.dim = d;
    t.input = Tensor({v, d});
    t.output = Tensor({v, d});
    for (std::size_t i = 0; i < v; ++i) {
        std::string w;
        if (!(in >> w)) throw ParseError(i + 2, path + ": missing row");
        t.words.push_back(w);
        for (double &x : t.input.row(i)) {
            if (!(in >> x)) throw ParseError(i + 2, path + ": short row");
        }
    }
    return t;
}

}  // namespace lrtc::w2v
