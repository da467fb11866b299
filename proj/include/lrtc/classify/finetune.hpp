#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "lrtc/classify/train.hpp"
#include "lrtc/classify/zoo.hpp"
#include "lrtc/mlm.hpp"

namespace lrtc::classify {

enum class Pooling { first_position, mean_over_nonpad };

inline Pooling parse_pooling(std::string_view s) {
    if (s == "first_position" || s == "first") return Pooling::first_position;
    if (s == "mean_over_nonpad" || s == "mean") return Pooling::mean_over_nonpad;
    throw ConfigError("unknown pooling '" + std::string(s) + "'");
}

struct FineTuneConfig {
    std::size_t num_classes = 2;
    Pooling pooling = Pooling::first_position;
    bool freeze_encoder = false;
    std::uint64_t seed = 1;
};

/// Pretrained encoder, pooled to one vector, then linear + softmax.
class FineTunedClassifier : public TextClassifier {
   public:
    FineTunedClassifier(const mlm::Checkpoint &checkpoint, const FineTuneConfig &config)
        : encoder_(mlm::restore_model(checkpoint)), pooling_(config.pooling) {
        if (config.num_classes < 2) throw InvalidLabelSet("a classifier needs at least two labels");
        num_classes_ = config.num_classes;
        if (!config.freeze_encoder) {
            const auto &names = encoder_.params().names();
            for (std::size_t i = 0; i < names.size(); ++i) {
                if (names[i].rfind("output.", 0) == 0) continue;  // vocabulary projection is unused here
                params_.adopt("encoder." + names[i], encoder_.params().vars()[i]);
            }
        }
        Rng rng(derive_seed(config.seed, "finetune.head"));
        head_ = nn::Linear::create(params_, "head", encoder_.config().emb_dim, num_classes_, rng);
    }

    /// Pooled representation (1 x emb_dim) of one example. Inputs longer than
    /// the encoder's max_len are truncated.
    Var pooled(const EncodedText &x) const {
        const auto &cfg = encoder_.config();
        std::vector<int> ids = x.ids;
        if (ids.empty()) ids.push_back(bpe::SubwordVocab::kUnk);
        if (ids.size() > cfg.max_len) ids.resize(cfg.max_len);
        for (int id : ids) {
            if (id < 0 || static_cast<std::size_t>(id) >= cfg.vocab_size) {
                throw VocabError("token id " + std::to_string(id) + " outside the encoder vocabulary");
            }
        }
        const mlm::IdMatrix m = mlm::IdMatrix::from_rows({ids});
        const Var states = encoder_.encode(m, mlm::attention_mask_for(m), {x.lang}).states.front();
        if (pooling_ == Pooling::first_position) return nn::slice_rows(states, 0, 1);
        std::vector<int> keep;
        for (std::size_t j = 0; j < ids.size(); ++j) {
            if (ids[j] != bpe::SubwordVocab::kPad) keep.push_back(static_cast<int>(j));
        }
        if (keep.empty()) return nn::slice_rows(states, 0, 1);
        return nn::mean_rows(nn::gather_rows(states, keep));
    }

    Var logits(const EncodedText &x) const override { return head_(pooled(x)); }
    Arch arch() const override { return Arch::mlm_finetune; }

    const mlm::MlmModel &encoder() const { return encoder_; }

   private:
    mlm::MlmModel encoder_;
    Pooling pooling_;
    nn::Linear head_;
};

/// Builds a fine-tuning classifier on `checkpoint` and trains it. The
/// examples must be encoded with a vocabulary of `vocab_size` subwords.
inline TrainResult fine_tune(FineTunedClassifier &model, std::size_t vocab_size, const LabeledSet &train,
                             const LabeledSet &valid, const TrainSchedule &schedule) {
    const std::size_t expected = model.encoder().config().vocab_size;
    if (vocab_size != expected) {
        throw VocabError("examples use a vocabulary of " + std::to_string(vocab_size) + " subwords, encoder has " +
                         std::to_string(expected));
    }
    return train_classifier(model, train, valid, schedule);
}

}  // namespace lrtc::classify
