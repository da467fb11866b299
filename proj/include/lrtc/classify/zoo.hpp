#pragma once

#include <array>
#include <memory>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "lrtc/error.hpp"
#include "lrtc/kv_config.hpp"
#include "lrtc/nn/layers.hpp"
#include "lrtc/rng.hpp"
#include "lrtc/word2vec.hpp"

namespace lrtc::classify {

using nn::Tensor;
using nn::Var;

enum class Arch { textcnn, textrnn, textrnn_att, textrcnn, fasttext, dpcnn, transformer, mlm_finetune };

inline constexpr std::array<Arch, 8> kAllArchs = {Arch::textcnn,  Arch::textrnn, Arch::textrnn_att,
                                                  Arch::textrcnn, Arch::fasttext, Arch::dpcnn,
                                                  Arch::transformer, Arch::mlm_finetune};

inline std::string_view to_string(Arch a) {
    switch (a) {
        case Arch::textcnn: return "textcnn";
        case Arch::textrnn: return "textrnn";
        case Arch::textrnn_att: return "textrnn_att";
        case Arch::textrcnn: return "textrcnn";
        case Arch::fasttext: return "fasttext";
        case Arch::dpcnn: return "dpcnn";
        case Arch::transformer: return "transformer";
        case Arch::mlm_finetune: return "mlm_finetune";
    }
    return "?";
}

inline Arch parse_arch(std::string_view s) {
    for (Arch a : kAllArchs) {
        if (to_string(a) == s) return a;
    }
    throw ConfigError("unknown classifier architecture '" + std::string(s) + "'");
}

/// One example as the model sees it: token ids (no padding) and a language index.
struct EncodedText {
    std::vector<int> ids;
    int lang = 0;
};

struct ZooConfig {
    std::size_t num_classes = 2;
    bool freeze_embeddings = true;
    std::size_t filters = 100;             // textcnn, per width
    std::vector<std::size_t> widths{2, 3, 4};
    std::size_t hidden = 128;              // recurrent hidden size
    std::size_t attention_dim = 64;        // textrnn_att
    std::size_t rcnn_dim = 128;            // textrcnn projection
    std::size_t dpcnn_channels = 250;
    std::size_t model_dim = 64;            // transformer
    std::size_t heads = 2;
    std::size_t layers = 1;
    std::size_t max_len = 128;             // transformer positions; longer inputs are truncated
    std::uint64_t seed = 1;

    static ZooConfig from_kv(const KvConfig &kv, const std::string &section = "clf") {
        ZooConfig c;
        c.freeze_embeddings = kv.get_bool(section, "freeze_embeddings", c.freeze_embeddings);
        c.filters = kv.get_int<std::size_t>(section, "filters", c.filters);
        c.hidden = kv.get_int<std::size_t>(section, "hidden", c.hidden);
        c.attention_dim = kv.get_int<std::size_t>(section, "attention_dim", c.attention_dim);
        c.rcnn_dim = kv.get_int<std::size_t>(section, "rcnn_dim", c.rcnn_dim);
        c.dpcnn_channels = kv.get_int<std::size_t>(section, "dpcnn_channels", c.dpcnn_channels);
        c.model_dim = kv.get_int<std::size_t>(section, "model_dim", c.model_dim);
        c.heads = kv.get_int<std::size_t>(section, "heads", c.heads);
        c.layers = kv.get_int<std::size_t>(section, "layers", c.layers);
        c.max_len = kv.get_int<std::size_t>(section, "max_len", c.max_len);
        return c;
    }
};

/// A text classifier: parameters plus a per-example forward pass.
class TextClassifier {
   public:
    virtual ~TextClassifier() = default;

    /// 1 x num_classes logits for one example.
    virtual Var logits(const EncodedText &x) const = 0;
    virtual Arch arch() const = 0;

    /// b x num_classes logits.
    Var forward(const std::vector<EncodedText> &batch) const {
        if (batch.empty()) throw ShapeError("empty batch");
        std::vector<Var> rows;
        rows.reserve(batch.size());
        for (const auto &x : batch) rows.push_back(logits(x));
        return rows.size() == 1 ? rows.front() : nn::concat_rows(rows);
    }

    std::size_t num_classes() const { return num_classes_; }
    nn::ParamStore &params() { return params_; }
    const nn::ParamStore &params() const { return params_; }

   protected:
    std::size_t num_classes_ = 0;
    nn::ParamStore params_;
};

namespace detail {

/// Appends zero rows so `x` has at least `rows` rows.
inline Var pad_rows_to(const Var &x, std::size_t rows) {
    if (x.rows() >= rows) return x;
    return nn::concat_rows({x, nn::constant(Tensor::matrix(rows - x.rows(), x.cols()))});
}

/// Adds `before` and `after` zero rows.
inline Var pad_rows(const Var &x, std::size_t before, std::size_t after) {
    std::vector<Var> parts;
    if (before) parts.push_back(nn::constant(Tensor::matrix(before, x.cols())));
    parts.push_back(x);
    if (after) parts.push_back(nn::constant(Tensor::matrix(after, x.cols())));
    return parts.size() == 1 ? x : nn::concat_rows(parts);
}

/// Valid 1-D convolution over rows via im2col: (L - w + 1) x out.
inline Var conv_rows(const Var &x, const nn::Linear &kernel, std::size_t width) {
    const std::size_t out_rows = x.rows() - width + 1;
    std::vector<Var> cols;
    for (std::size_t k = 0; k < width; ++k) cols.push_back(nn::slice_rows(x, k, out_rows));
    return kernel(width == 1 ? cols.front() : nn::concat_cols(cols));
}

/// Width-3 convolution that keeps the row count.
inline Var conv3_same(const Var &x, const nn::Linear &kernel) { return conv_rows(pad_rows(x, 1, 1), kernel, 3); }

}  // namespace detail

/// Shared base for the word-embedding classifiers: the embedding table gets
/// one extra all-zero row used for out-of-vocabulary words.
class EmbeddingClassifier : public TextClassifier {
   public:
    int unk_id() const { return static_cast<int>(vocab_size_); }

    /// Word ids for `tokens`, unknown words mapped to unk_id().
    std::vector<int> ids_for(const std::vector<std::string> &tokens) const {
        std::vector<int> out;
        out.reserve(tokens.size());
        for (const auto &t : tokens) {
            auto it = index_.find(t);
            out.push_back(it == index_.end() ? unk_id() : it->second);
        }
        return out;
    }

   protected:
    void init_embeddings(const w2v::EmbeddingTable &table, const ZooConfig &config) {
        if (config.num_classes < 2) throw InvalidLabelSet("a classifier needs at least two labels");
        num_classes_ = config.num_classes;
        vocab_size_ = table.size();
        dim_ = table.dim;
        Tensor e({vocab_size_ + 1, dim_}, 0.0);
        std::copy(table.input.values().begin(), table.input.values().end(), e.values().begin());
        embedding_ = config.freeze_embeddings ? nn::constant(std::move(e)) : params_.add("embedding", std::move(e));
        for (std::size_t i = 0; i < table.words.size(); ++i) index_.emplace(table.words[i], static_cast<int>(i));
    }

    /// L x d embeddings (a single UNK row for an empty example).
    Var embed(const EncodedText &x) const {
        std::vector<int> ids = x.ids;
        if (ids.empty()) ids.push_back(unk_id());
        for (int &id : ids) {
            if (id < 0 || static_cast<std::size_t>(id) > vocab_size_) id = unk_id();
        }
        return nn::gather_rows(embedding_, ids);
    }

    std::size_t dim_ = 0;
    std::size_t vocab_size_ = 0;
    Var embedding_;
    std::unordered_map<std::string, int> index_;
};

class FastText : public EmbeddingClassifier {
   public:
    FastText(const w2v::EmbeddingTable &table, const ZooConfig &config) {
        init_embeddings(table, config);
        Rng rng(derive_seed(config.seed, "fasttext"));
        out_ = nn::Linear::create(params_, "out", dim_, num_classes_, rng);
    }
    Var logits(const EncodedText &x) const override { return out_(nn::mean_rows(embed(x))); }
    Arch arch() const override { return Arch::fasttext; }

   private:
    nn::Linear out_;
};

class TextCnn : public EmbeddingClassifier {
   public:
    TextCnn(const w2v::EmbeddingTable &table, const ZooConfig &config) : widths_(config.widths) {
        init_embeddings(table, config);
        if (widths_.empty()) throw ConfigError("textcnn needs at least one filter width");
        Rng rng(derive_seed(config.seed, "textcnn"));
        for (std::size_t w : widths_) {
            convs_.push_back(
                nn::Linear::create(params_, "conv" + std::to_string(w), w * dim_, config.filters, rng));
        }
        out_ = nn::Linear::create(params_, "out", widths_.size() * config.filters, num_classes_, rng);
    }

    /// Shorter inputs are zero-padded to the widest filter.
    Var logits(const EncodedText &x) const override {
        const Var e = detail::pad_rows_to(embed(x), *std::max_element(widths_.begin(), widths_.end()));
        std::vector<Var> pooled;
        for (std::size_t i = 0; i < widths_.size(); ++i) {
            pooled.push_back(nn::max_rows(nn::relu(detail::conv_rows(e, convs_[i], widths_[i]))));
        }
        return out_(pooled.size() == 1 ? pooled.front() : nn::concat_cols(pooled));
    }
    Arch arch() const override { return Arch::textcnn; }

   private:
    std::vector<std::size_t> widths_;
    std::vector<nn::Linear> convs_;
    nn::Linear out_;
};

class TextRnn : public EmbeddingClassifier {
   public:
    TextRnn(const w2v::EmbeddingTable &table, const ZooConfig &config) {
        init_embeddings(table, config);
        Rng rng(derive_seed(config.seed, "textrnn"));
        rnn_ = nn::BiLstm::create(params_, "rnn", dim_, config.hidden, rng);
        out_ = nn::Linear::create(params_, "out", 2 * config.hidden, num_classes_, rng);
    }
    Var logits(const EncodedText &x) const override { return out_(rnn_(embed(x)).final_states); }
    Arch arch() const override { return Arch::textrnn; }

   private:
    nn::BiLstm rnn_;
    nn::Linear out_;
};

/// Bidirectional LSTM states pooled by additive attention:
/// a = softmax(v . tanh(W h_t + b)) over positions.
class TextRnnAttention : public EmbeddingClassifier {
   public:
    TextRnnAttention(const w2v::EmbeddingTable &table, const ZooConfig &config) {
        init_embeddings(table, config);
        Rng rng(derive_seed(config.seed, "textrnn_att"));
        rnn_ = nn::BiLstm::create(params_, "rnn", dim_, config.hidden, rng);
        proj_ = nn::Linear::create(params_, "att.proj", 2 * config.hidden, config.attention_dim, rng);
        query_ = params_.add("att.v", nn::xavier(config.attention_dim, 1, rng));
        out_ = nn::Linear::create(params_, "out", 2 * config.hidden, num_classes_, rng);
    }
    Var logits(const EncodedText &x) const override {
        const Var h = rnn_(embed(x)).states;
        const Var scores = nn::matmul(nn::tanh(proj_(h)), query_);  // L x 1
        const Var weights = nn::softmax(scores, nn::Axis::rows);
        return out_(nn::matmul(nn::transpose(weights), h));
    }
    Arch arch() const override { return Arch::textrnn_att; }

   private:
    nn::BiLstm rnn_;
    nn::Linear proj_;
    Var query_;
    nn::Linear out_;
};

/// [forward state; embedding; backward state] per position, projected,
/// tanh, then max-pooled over positions.
class TextRcnn : public EmbeddingClassifier {
   public:
    TextRcnn(const w2v::EmbeddingTable &table, const ZooConfig &config) {
        init_embeddings(table, config);
        Rng rng(derive_seed(config.seed, "textrcnn"));
        rnn_ = nn::BiLstm::create(params_, "rnn", dim_, config.hidden, rng);
        proj_ = nn::Linear::create(params_, "proj", 2 * config.hidden + dim_, config.rcnn_dim, rng);
        out_ = nn::Linear::create(params_, "out", config.rcnn_dim, num_classes_, rng);
    }
    Var logits(const EncodedText &x) const override {
        const Var e = embed(x);
        const auto r = rnn_(e);
        return out_(nn::max_rows(nn::tanh(proj_(nn::concat_cols({r.forward, e, r.backward})))));
    }
    Arch arch() const override { return Arch::textrcnn; }

   private:
    nn::BiLstm rnn_;
    nn::Linear proj_;
    nn::Linear out_;
};

/// Region embedding (width-3 conv), a residual block of two same-padded
/// convolutions, then repeated (stride-2 max pool + residual block) until one
/// position remains. The block convolutions are shared across repeats.
class Dpcnn : public EmbeddingClassifier {
   public:
    Dpcnn(const w2v::EmbeddingTable &table, const ZooConfig &config) {
        init_embeddings(table, config);
        Rng rng(derive_seed(config.seed, "dpcnn"));
        const std::size_t ch = config.dpcnn_channels;
        region_ = nn::Linear::create(params_, "region", 3 * dim_, ch, rng);
        conv_a_ = nn::Linear::create(params_, "conv_a", 3 * ch, ch, rng);
        conv_b_ = nn::Linear::create(params_, "conv_b", 3 * ch, ch, rng);
        out_ = nn::Linear::create(params_, "out", ch, num_classes_, rng);
    }

    Var logits(const EncodedText &x) const override {
        Var h = detail::conv3_same(embed(x), region_);
        h = block(h);
        while (h.rows() > 1) {
            // Pad the bottom so every row falls in some window.
            const Var padded = detail::pad_rows(h, 0, h.rows() % 2 == 0 ? 1 : 0);
            h = block(nn::max_pool_rows(detail::pad_rows_to(padded, 3), 3, 2));
        }
        return out_(h);
    }
    Arch arch() const override { return Arch::dpcnn; }

   private:
    Var block(const Var &x) const {
        Var y = detail::conv3_same(nn::relu(x), conv_a_);
        y = detail::conv3_same(nn::relu(y), conv_b_);
        return nn::add(x, y);
    }

    nn::Linear region_, conv_a_, conv_b_, out_;
};

/// Input projection plus learned positions, transformer blocks, mean pooling.
class TransformerClassifier : public EmbeddingClassifier {
   public:
    TransformerClassifier(const w2v::EmbeddingTable &table, const ZooConfig &config) : max_len_(config.max_len) {
        init_embeddings(table, config);
        Rng rng(derive_seed(config.seed, "transformer"));
        in_ = nn::Linear::create(params_, "in", dim_, config.model_dim, rng);
        pos_ = params_.add("pos", Tensor::uniform({config.max_len, config.model_dim},
                                                   1.0 / std::sqrt(static_cast<double>(config.model_dim)), rng));
        for (std::size_t l = 0; l < config.layers; ++l) {
            blocks_.push_back(nn::TransformerBlock::create(params_, "layer" + std::to_string(l), config.model_dim,
                                                           config.heads, 4 * config.model_dim, rng));
        }
        out_ = nn::Linear::create(params_, "out", config.model_dim, num_classes_, rng);
    }

    Var logits(const EncodedText &x) const override {
        EncodedText clipped = x;
        if (clipped.ids.size() > max_len_) clipped.ids.resize(max_len_);
        Var h = embed(clipped);
        h = nn::add(in_(h), nn::slice_rows(pos_, 0, h.rows()));
        for (const auto &b : blocks_) h = b(h, {}, 0.0, nullptr);
        return out_(nn::mean_rows(h));
    }
    Arch arch() const override { return Arch::transformer; }

   private:
    std::size_t max_len_;
    nn::Linear in_;
    Var pos_;
    std::vector<nn::TransformerBlock> blocks_;
    nn::Linear out_;
};

/// Builds a word-embedding classifier; mlm_finetune is built by fine_tune().
inline std::unique_ptr<EmbeddingClassifier> build_classifier(Arch arch, const w2v::EmbeddingTable &table,
                                                             const ZooConfig &config) {
    if (table.size() == 0 || table.dim == 0) throw ConfigError("empty embedding table");
    switch (arch) {
        case Arch::textcnn: return std::make_unique<TextCnn>(table, config);
        case Arch::textrnn: return std::make_unique<TextRnn>(table, config);
        case Arch::textrnn_att: return std::make_unique<TextRnnAttention>(table, config);
        case Arch::textrcnn: return std::make_unique<TextRcnn>(table, config);
        case Arch::fasttext: return std::make_unique<FastText>(table, config);
        case Arch::dpcnn: return std::make_unique<Dpcnn>(table, config);
        case Arch::transformer: return std::make_unique<TransformerClassifier>(table, config);
        case Arch::mlm_finetune: break;
    }
    throw ConfigError("architecture '" + std::string(to_string(arch)) + "' is not a word-embedding classifier");
}

inline std::unique_ptr<EmbeddingClassifier> build_classifier(std::string_view arch, const w2v::EmbeddingTable &table,
                                                             const ZooConfig &config) {
    return build_classifier(parse_arch(arch), table, config);
}

}  // namespace lrtc::classify
