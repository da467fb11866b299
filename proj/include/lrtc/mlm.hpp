#pragma once

#include <cmath>
#include <algorithm>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "lrtc/bpe.hpp"
#include "lrtc/error.hpp"
#include "lrtc/kv_config.hpp"
#include "lrtc/language.hpp"
#include "lrtc/nn/layers.hpp"
#include "lrtc/nn/optim.hpp"
#include "lrtc/nn/serialize.hpp"
#include "lrtc/rng.hpp"

namespace lrtc::mlm {

using nn::Tensor;
using nn::Var;

struct MlmConfig {
    std::size_t emb_dim = 2048;
    std::size_t n_layers = 12;
    std::size_t n_heads = 8;
    double dropout = 0.1;
    std::size_t n_langs = 5;
    std::size_t max_len = 256;
    std::size_t vocab_size = 70000;
    std::size_t ff_mult = 4;
    bool tie_output = false;
    std::uint64_t seed = 1;

    void validate() const {
        if (emb_dim == 0 || n_heads == 0 || emb_dim % n_heads != 0) {
            throw ConfigError("emb_dim " + std::to_string(emb_dim) + " must be a positive multiple of n_heads " +
                              std::to_string(n_heads));
        }
        if (max_len < 1) throw ConfigError("max_len must be >= 1");
        if (n_langs < 1) throw ConfigError("n_langs must be >= 1");
        if (vocab_size <= static_cast<std::size_t>(bpe::SubwordVocab::kNumSpecial)) {
            throw ConfigError("vocab_size must exceed the special-token count");
        }
        if (ff_mult < 1) throw ConfigError("ff_mult must be >= 1");
        if (dropout < 0.0 || dropout >= 1.0) throw ConfigError("dropout must be in [0, 1)");
    }

    /// Reads keys from `section`, falling back to top-level keys.
    static MlmConfig from_kv(const KvConfig &kv, const std::string &section = "mlm") {
        MlmConfig c;
        auto pick = [&](const char *key) -> std::string { return kv.get(section, key) ? section : ""; };
        c.emb_dim = kv.get_int<std::size_t>(pick("emb_dim"), "emb_dim", c.emb_dim);
        c.n_layers = kv.get_int<std::size_t>(pick("n_layers"), "n_layers", c.n_layers);
        c.n_heads = kv.get_int<std::size_t>(pick("n_heads"), "n_heads", c.n_heads);
        c.dropout = kv.get_double(pick("dropout"), "dropout", c.dropout);
        c.n_langs = kv.get_int<std::size_t>(pick("n_langs"), "n_langs", c.n_langs);
        c.max_len = kv.get_int<std::size_t>(pick("max_len"), "max_len", c.max_len);
        c.vocab_size = kv.get_int<std::size_t>(pick("vocab_size"), "vocab_size", c.vocab_size);
        c.ff_mult = kv.get_int<std::size_t>(pick("ff_mult"), "ff_mult", c.ff_mult);
        c.tie_output = kv.get_bool(pick("tie_output"), "tie_output", c.tie_output);
        c.seed = kv.get_int<std::uint64_t>(pick("seed"), "seed", c.seed);
        c.validate();
        return c;
    }

    bool operator==(const MlmConfig &) const = default;
};

inline void to_json(nlohmann::json &j, const MlmConfig &c) {
    j = {{"emb_dim", c.emb_dim},   {"n_layers", c.n_layers}, {"n_heads", c.n_heads},       {"dropout", c.dropout},
         {"n_langs", c.n_langs},   {"max_len", c.max_len},   {"vocab_size", c.vocab_size}, {"ff_mult", c.ff_mult},
         {"tie_output", c.tie_output}, {"seed", c.seed}};
}

inline void from_json(const nlohmann::json &j, MlmConfig &c) {
    j.at("emb_dim").get_to(c.emb_dim);
    j.at("n_layers").get_to(c.n_layers);
    j.at("n_heads").get_to(c.n_heads);
    j.at("dropout").get_to(c.dropout);
    j.at("n_langs").get_to(c.n_langs);
    j.at("max_len").get_to(c.max_len);
    j.at("vocab_size").get_to(c.vocab_size);
    j.at("ff_mult").get_to(c.ff_mult);
    j.at("tie_output").get_to(c.tie_output);
    j.at("seed").get_to(c.seed);
}

struct MaskingPolicy {
    double mask_prob = 0.15;
    double replace_mask = 0.8;
    double replace_random = 0.1;
    double keep = 0.1;

    void validate() const {
        if (mask_prob < 0.0 || mask_prob > 1.0) throw ConfigError("mask_prob must be in [0, 1]");
        if (replace_mask < 0 || replace_random < 0 || keep < 0 ||
            std::abs(replace_mask + replace_random + keep - 1.0) > 1e-12) {
            throw ConfigError("masking branch probabilities must be non-negative and sum to 1");
        }
    }
};

/// Row-major integer matrix (batch x length).
struct IdMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<int> data;

    IdMatrix() = default;
    IdMatrix(std::size_t r, std::size_t c, int fill = 0) : rows(r), cols(c), data(r * c, fill) {}

    static IdMatrix from_rows(const std::vector<std::vector<int>> &rs, int pad = bpe::SubwordVocab::kPad) {
        std::size_t width = 0;
        for (const auto &r : rs) width = std::max(width, r.size());
        IdMatrix m(rs.size(), width, pad);
        for (std::size_t i = 0; i < rs.size(); ++i) std::copy(rs[i].begin(), rs[i].end(), m.data.begin() + i * width);
        return m;
    }

    int &operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    int operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
    std::vector<int> row(std::size_t r) const {
        return {data.begin() + static_cast<std::ptrdiff_t>(r * cols),
                data.begin() + static_cast<std::ptrdiff_t>((r + 1) * cols)};
    }

    bool operator==(const IdMatrix &) const = default;
};

/// 1 where the id is not padding.
inline IdMatrix attention_mask_for(const IdMatrix &ids) {
    IdMatrix m(ids.rows, ids.cols, 0);
    for (std::size_t i = 0; i < ids.data.size(); ++i) m.data[i] = ids.data[i] != bpe::SubwordVocab::kPad;
    return m;
}

struct MaskedBatch {
    IdMatrix input_ids;
    IdMatrix labels;  // original id where selected, nn::kIgnoreIndex elsewhere
    IdMatrix attention_mask;
    std::vector<int> langs;

    std::size_t selected() const {
        std::size_t n = 0;
        for (int l : labels.data) n += l != nn::kIgnoreIndex;
        return n;
    }
};

/// Selects each non-pad position with probability mask_prob, then replaces it
/// with MASK, a random non-special id, or keeps it (80/10/10 by default).
/// Draw order per non-pad position: selection, then branch, then the random id.
template <UniformSource R>
MaskedBatch mask_batch(const IdMatrix &ids, const std::vector<int> &langs, const MaskingPolicy &policy,
                       std::size_t vocab_size, R &rng) {
    policy.validate();
    constexpr int kFirstRegular = bpe::SubwordVocab::kNumSpecial;
    MaskedBatch b;
    b.input_ids = ids;
    b.labels = IdMatrix(ids.rows, ids.cols, nn::kIgnoreIndex);
    b.attention_mask = attention_mask_for(ids);
    b.langs = langs;
    for (std::size_t i = 0; i < ids.data.size(); ++i) {
        if (!b.attention_mask.data[i]) continue;
        if (!(rng.uniform01() < policy.mask_prob)) continue;
        b.labels.data[i] = ids.data[i];
        const double u = rng.uniform01();
        if (u < policy.replace_mask) {
            b.input_ids.data[i] = bpe::SubwordVocab::kMask;
        } else if (u < policy.replace_mask + policy.replace_random) {
            b.input_ids.data[i] =
                kFirstRegular + static_cast<int>(rng.uniform_int(vocab_size - static_cast<std::size_t>(kFirstRegular)));
        }
    }
    return b;
}

template <UniformSource R>
MaskedBatch mask_batch(const IdMatrix &ids, const std::vector<int> &langs, const MaskingPolicy &policy,
                       const bpe::SubwordVocab &vocab, R &rng) {
    return mask_batch(ids, langs, policy, vocab.size(), rng);
}

struct EncoderOutput {
    std::vector<Var> states;  // per example, L x emb_dim
    std::size_t batch = 0;
    std::size_t length = 0;
    std::size_t dim = 0;

    /// Hidden states as a batch x length x emb_dim tensor.
    Tensor hidden() const {
        Tensor t({batch, length, dim});
        for (std::size_t b = 0; b < batch; ++b) {
            const auto &v = states[b].value().values();
            std::copy(v.begin(), v.end(), t.values().begin() + static_cast<std::ptrdiff_t>(b * length * dim));
        }
        return t;
    }
};

/// Token + learned position + language embeddings, a stack of transformer
/// blocks, and a vocabulary projection.
class MlmModel {
   public:
    explicit MlmModel(const MlmConfig &config) : config_(config) {
        config_.validate();
        Rng rng(derive_seed(config_.seed, "mlm.init"));
        const std::size_t d = config_.emb_dim;
        const double scale = 1.0 / std::sqrt(static_cast<double>(d));
        tok_ = params_.add("embed.token", Tensor::uniform({config_.vocab_size, d}, scale, rng));
        pos_ = params_.add("embed.position", Tensor::uniform({config_.max_len, d}, scale, rng));
        lang_ = params_.add("embed.language", Tensor::uniform({config_.n_langs, d}, scale, rng));
        for (std::size_t l = 0; l < config_.n_layers; ++l) {
            blocks_.push_back(nn::TransformerBlock::create(params_, "layer" + std::to_string(l), d, config_.n_heads,
                                                           config_.ff_mult * d, rng));
        }
        if (config_.tie_output) {
            out_bias_ = params_.add("output.b", Tensor::matrix(1, config_.vocab_size));
        } else {
            out_ = nn::Linear::create(params_, "output", d, config_.vocab_size, rng);
        }
    }

    const MlmConfig &config() const { return config_; }
    nn::ParamStore &params() { return params_; }
    const nn::ParamStore &params() const { return params_; }

    /// Forward pass; dropout applies only when `dropout_rng` is given.
    EncoderOutput encode(const IdMatrix &ids, const IdMatrix &attention_mask, const std::vector<int> &langs,
                         Rng *dropout_rng = nullptr, std::vector<Tensor> *attention = nullptr) const {
        check_inputs(ids, attention_mask, langs);
        EncoderOutput out;
        out.batch = ids.rows;
        out.length = ids.cols;
        out.dim = config_.emb_dim;
        const Var pos = nn::slice_rows(pos_, 0, ids.cols);
        for (std::size_t b = 0; b < ids.rows; ++b) {
            const std::vector<int> row = ids.row(b);
            std::vector<char> key_mask(ids.cols);
            for (std::size_t j = 0; j < ids.cols; ++j) key_mask[j] = static_cast<char>(attention_mask(b, j) != 0);
            Var x = nn::add(nn::gather_rows(tok_, row), pos);
            x = nn::add(x, nn::gather_rows(lang_, std::vector<int>(ids.cols, langs[b])));
            if (dropout_rng) x = nn::dropout(x, config_.dropout, *dropout_rng, true);
            for (const auto &blk : blocks_) x = blk(x, key_mask, config_.dropout, dropout_rng, attention);
            out.states.push_back(x);
        }
        return out;
    }

    /// Vocabulary logits for rows of hidden states.
    Var logits(const Var &hidden) const {
        if (config_.tie_output) return nn::add_row(nn::matmul(hidden, nn::transpose(tok_)), out_bias_);
        return out_(hidden);
    }

   private:
    void check_inputs(const IdMatrix &ids, const IdMatrix &mask, const std::vector<int> &langs) const {
        if (ids.rows == 0 || ids.cols == 0) throw ShapeError("empty batch");
        if (ids.cols > config_.max_len) {
            throw LengthError("sequence length " + std::to_string(ids.cols) + " exceeds max_len " +
                              std::to_string(config_.max_len));
        }
        if (mask.rows != ids.rows || mask.cols != ids.cols) throw ShapeError("attention mask shape mismatch");
        if (langs.size() != ids.rows) throw ShapeError("one language id per sequence expected");
        for (int id : ids.data) {
            if (id < 0 || static_cast<std::size_t>(id) >= config_.vocab_size) {
                throw VocabError("token id " + std::to_string(id) + " outside vocabulary of " +
                                 std::to_string(config_.vocab_size));
            }
        }
        for (int l : langs) {
            if (l < 0 || static_cast<std::size_t>(l) >= config_.n_langs) {
                throw LanguageError("language id " + std::to_string(l) + " outside n_langs");
            }
        }
    }

    MlmConfig config_;
    nn::ParamStore params_;
    Var tok_, pos_, lang_;
    std::vector<nn::TransformerBlock> blocks_;
    nn::Linear out_;
    Var out_bias_;
};

/// Cross-entropy over the positions whose label is not ignore_index.
inline Var mlm_loss(const MlmModel &model, const EncoderOutput &out, const IdMatrix &labels) {
    if (labels.rows != out.batch || labels.cols != out.length) throw ShapeError("labels shape mismatch");
    std::vector<Var> rows;
    std::vector<int> targets;
    for (std::size_t b = 0; b < out.batch; ++b) {
        std::vector<int> positions;
        for (std::size_t j = 0; j < out.length; ++j) {
            if (labels(b, j) != nn::kIgnoreIndex) {
                positions.push_back(static_cast<int>(j));
                targets.push_back(labels(b, j));
            }
        }
        if (!positions.empty()) rows.push_back(nn::gather_rows(out.states[b], positions));
    }
    if (targets.empty()) throw UndefinedLoss("batch has no masked positions");
    Var hidden = rows.size() == 1 ? rows.front() : nn::concat_rows(rows);
    return nn::cross_entropy(model.logits(hidden), targets);
}

/// Concatenates documents with EOS separators and cuts the stream into
/// max_len chunks; the final chunk may be shorter.
inline std::vector<std::vector<int>> pack_documents(const std::vector<std::vector<int>> &docs, std::size_t max_len) {
    std::vector<int> stream;
    for (const auto &d : docs) {
        stream.insert(stream.end(), d.begin(), d.end());
        stream.push_back(bpe::SubwordVocab::kEos);
    }
    std::vector<std::vector<int>> chunks;
    for (std::size_t i = 0; i < stream.size(); i += max_len) {
        chunks.emplace_back(stream.begin() + static_cast<std::ptrdiff_t>(i),
                            stream.begin() + static_cast<std::ptrdiff_t>(std::min(stream.size(), i + max_len)));
    }
    return chunks;
}

struct PretrainSchedule {
    std::size_t steps = 1000;
    std::size_t batch_size = 8;
    nn::AdamConfig adam{};
};

struct LossRecord {
    std::uint64_t step;
    double loss;
    bool operator==(const LossRecord &) const = default;
};

struct Checkpoint {
    MlmConfig config;
    std::vector<nn::NamedTensor> params;
    nn::OptimizerState optimizer;
    std::uint64_t step = 0;
    std::vector<LossRecord> loss_history;
};

inline Checkpoint snapshot(const MlmModel &model, const nn::OptimizerState &opt, std::uint64_t step,
                           std::vector<LossRecord> history) {
    Checkpoint c{model.config(), {}, opt, step, std::move(history)};
    const auto &names = model.params().names();
    for (std::size_t i = 0; i < names.size(); ++i) c.params.push_back({names[i], model.params().vars()[i].value()});
    return c;
}

/// Rebuilds a model carrying the checkpoint's parameters.
inline MlmModel restore_model(const Checkpoint &c) {
    MlmModel m(c.config);
    std::vector<Tensor> values;
    const auto &names = m.params().names();
    if (names.size() != c.params.size()) throw InvalidDataset("checkpoint parameter count mismatch");
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (c.params[i].name != names[i]) throw InvalidDataset("checkpoint parameter '" + c.params[i].name + "'");
        values.push_back(c.params[i].value);
    }
    m.params().load_values(values);
    return m;
}

/// Per-language chunk pools keyed by language index.
using ChunkPools = std::map<int, std::vector<std::vector<int>>>;

inline ChunkPools build_pools(const std::map<Language, std::vector<std::vector<int>>> &corpus, std::size_t max_len) {
    ChunkPools pools;
    for (const auto &[lang, docs] : corpus) {
        auto chunks = pack_documents(docs, max_len);
        std::erase_if(chunks, [](const auto &c) {
            return std::all_of(c.begin(), c.end(), [](int id) { return id == bpe::SubwordVocab::kEos; });
        });
        if (!chunks.empty()) pools[static_cast<int>(index_of(lang))] = std::move(chunks);
    }
    return pools;
}

/// Trains from `resume` (or a fresh seeded model) up to schedule.steps.
/// Step t draws everything from a generator seeded by (seed, t), so a resumed
/// run follows the same trajectory as an uninterrupted one.
inline Checkpoint pretrain(const std::map<Language, std::vector<std::vector<int>>> &corpus, const MlmConfig &config,
                           const MaskingPolicy &policy, const PretrainSchedule &schedule,
                           const Checkpoint *resume = nullptr) {
    policy.validate();
    const ChunkPools pools = build_pools(corpus, config.max_len);
    if (pools.empty()) throw EmptyCorpus("no encoded text to pretrain on");

    MlmModel model = resume ? restore_model(*resume) : MlmModel(config);
    nn::Adam adam(schedule.adam);
    std::uint64_t step = 0;
    std::vector<LossRecord> history;
    if (resume) {
        adam.state() = resume->optimizer;
        step = resume->step;
        history = resume->loss_history;
    }
    std::vector<int> pool_langs;
    for (const auto &[l, c] : pools) pool_langs.push_back(l);

    for (; step < schedule.steps; ++step) {
        Rng rng(derive_seed(config.seed, step));
        std::vector<std::vector<int>> rows;
        std::vector<int> langs;
        for (std::size_t b = 0; b < schedule.batch_size; ++b) {
            const int lang = pool_langs[rng.uniform_int(pool_langs.size())];
            const auto &pool = pools.at(lang);
            rows.push_back(pool[rng.uniform_int(pool.size())]);
            langs.push_back(lang);
        }
        const IdMatrix ids = IdMatrix::from_rows(rows);
        const MaskedBatch batch = mask_batch(ids, langs, policy, config.vocab_size, rng);
        if (batch.selected() == 0) continue;  // undefined loss: skip the batch
        model.params().zero_grad();
        const auto out = model.encode(batch.input_ids, batch.attention_mask, batch.langs,
                                      config.dropout > 0 ? &rng : nullptr);
        const Var loss = mlm_loss(model, out, batch.labels);
        nn::backward(loss);
        adam.step(model.params());
        history.push_back({step, loss.item()});
    }
    model.params().zero_grad();
    return snapshot(model, adam.state(), step, std::move(history));
}

inline void save_checkpoint(const std::string &path, const Checkpoint &c) {
    nlohmann::json meta;
    meta["kind"] = "mlm-checkpoint";
    meta["config"] = c.config;
    meta["step"] = c.step;
    meta["optimizer_step"] = c.optimizer.step;
    meta["adam"] = {{"lr", c.optimizer.config.lr},
                    {"beta1", c.optimizer.config.beta1},
                    {"beta2", c.optimizer.config.beta2},
                    {"eps", c.optimizer.config.eps}};
    nlohmann::json hist = nlohmann::json::array();
    for (const auto &r : c.loss_history) hist.push_back({r.step, r.loss});
    meta["loss_history"] = hist;
    std::vector<nn::NamedTensor> tensors = c.params;
    for (std::size_t i = 0; i < c.optimizer.first_moment.size(); ++i) {
        tensors.push_back({"adam.m." + c.params[i].name, c.optimizer.first_moment[i]});
        tensors.push_back({"adam.v." + c.params[i].name, c.optimizer.second_moment[i]});
    }
    nn::save_bundle(path, meta, tensors);
}

inline Checkpoint load_checkpoint(const std::string &path) {
    const auto bundle = nn::load_bundle(path);
    if (bundle.meta.value("kind", "") != "mlm-checkpoint") throw InvalidDataset(path + ": not an MLM checkpoint");
    Checkpoint c;
    c.config = bundle.meta.at("config").get<MlmConfig>();
    c.step = bundle.meta.at("step").get<std::uint64_t>();
    c.optimizer.step = bundle.meta.at("optimizer_step").get<std::uint64_t>();
    const auto &a = bundle.meta.at("adam");
    c.optimizer.config = {a.at("lr"), a.at("beta1"), a.at("beta2"), a.at("eps")};
    for (const auto &r : bundle.meta.at("loss_history")) c.loss_history.push_back({r[0], r[1]});
    for (const auto &t : bundle.tensors) {
        if (t.name.rfind("adam.m.", 0) == 0) {
            c.optimizer.first_moment.push_back(t.value);
        } else if (t.name.rfind("adam.v.", 0) == 0) {
            c.optimizer.second_moment.push_back(t.value);
        } else {
            c.params.push_back(t);
        }
    }
    return c;
}

/// `step<TAB>loss` per record.
inline void write_metrics(std::ostream &out, const std::vector<LossRecord> &history) {
    out << std::setprecision(17);
    for (const auto &r : history) out << r.step << '\t' << r.loss << '\n';
}

}  // namespace lrtc::mlm
