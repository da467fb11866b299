#pragma once

#include <cstdlib>
#include <filesystem>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "lrtc/classify/finetune.hpp"
#include "lrtc/classify/train.hpp"
#include "lrtc/classify/zoo.hpp"
#include "lrtc/kv_config.hpp"
#include "lrtc/language.hpp"
#include "lrtc/mlm.hpp"
#include "lrtc/segment.hpp"
#include "lrtc/word2vec.hpp"

namespace lrtc::pipeline {

namespace fs = std::filesystem;

/// One (language, granularity) view of the labeled data; a column of the report.
struct Track {
    Language lang = Language::mn;
    segment::Granularity granularity = segment::Granularity::Word;

    /// "mn", "kk", ... or "bo_syll" / "bo_word" where a language has several views.
    std::string name() const {
        if (lang != Language::bo) return std::string(to_code(lang));
        return granularity == segment::Granularity::Syllable ? "bo_syll" : "bo_word";
    }
    bool operator==(const Track &) const = default;
};

/// "mn:word,bo:syllable,..." -> tracks, validated per language.
inline std::vector<Track> parse_tracks(std::string_view spec) {
    std::vector<Track> out;
    std::string item;
    std::istringstream in{std::string(spec)};
    while (std::getline(in, item, ',')) {
        const auto b = item.find_first_not_of(' ');
        if (b == std::string::npos) continue;
        item = item.substr(b, item.find_last_not_of(' ') - b + 1);
        const auto colon = item.find(':');
        if (colon == std::string::npos) throw ConfigError("track '" + item + "' is not lang:granularity");
        Track t{parse_language(item.substr(0, colon)), segment::parse_granularity(item.substr(colon + 1))};
        if (!segment::is_valid_combination(t.lang, t.granularity)) {
            throw ConfigError("track '" + item + "' pairs a language with an unsupported granularity");
        }
        for (const auto &o : out) {
            if (o == t) throw ConfigError("duplicate track '" + item + "'");
        }
        out.push_back(t);
    }
    if (out.empty()) throw ConfigError("no tracks configured");
    return out;
}

inline std::vector<std::string> split_list(std::string_view s) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in{std::string(s)};
    while (std::getline(in, item, ',')) {
        const auto b = item.find_first_not_of(' ');
        if (b != std::string::npos) out.push_back(item.substr(b, item.find_last_not_of(' ') - b + 1));
    }
    return out;
}

struct PipelineConfig {
    std::uint64_t seed = 1;
    fs::path data_dir = "data/mini";
    fs::path work_dir = "runs/mini";
    std::string labeled_file = "raw/labeled.jsonl";
    std::string unlabeled_file = "raw/unlabeled.jsonl";  // optional

    std::size_t min_length = 20;
    std::vector<Track> tracks = parse_tracks("mn:word,bo:syllable,bo:word,ug:word,kk:word,ko:morpheme");
    std::string lexicon_bo = "lexicon_bo.txt";
    std::string lexicon_ko = "lexicon_ko.txt";

    std::size_t bpe_target_vocab = 1000;
    std::uint64_t bpe_min_pair_count = 2;

    w2v::SkipGramConfig w2v{};
    std::size_t w2v_min_count = 1;

    mlm::MlmConfig mlm{};
    mlm::MaskingPolicy masking{};
    mlm::PretrainSchedule pretrain{};
    std::size_t metrics_every = 10;

    classify::Pooling pooling = classify::Pooling::first_position;
    bool freeze_encoder = false;
    classify::TrainSchedule finetune{};

    std::vector<classify::Arch> archs{classify::Arch::textcnn,  classify::Arch::textrnn, classify::Arch::textrnn_att,
                                      classify::Arch::textrcnn, classify::Arch::fasttext, classify::Arch::dpcnn,
                                      classify::Arch::transformer};
    classify::ZooConfig zoo{};
    classify::TrainSchedule clf{};

    /// Reads a key-value config. Relative paths are taken relative to the
    /// file's directory.
    static PipelineConfig from_kv(const KvConfig &kv, const fs::path &base = ".") {
        PipelineConfig c;
        c.seed = kv.get_int<std::uint64_t>("run", "seed", c.seed);
        auto path = [&](const std::string &key, const fs::path &fallback) {
            auto v = kv.get("paths", key);
            if (!v) return fallback;
            fs::path p(*v);
            return p.is_absolute() ? p : base / p;
        };
        c.data_dir = path("data_dir", c.data_dir);
        c.work_dir = path("work_dir", c.work_dir);
        c.labeled_file = kv.get_string("paths", "labeled", c.labeled_file);
        c.unlabeled_file = kv.get_string("paths", "unlabeled", c.unlabeled_file);

        c.min_length = kv.get_int<std::size_t>("corpus", "min_length", c.min_length);
        if (auto t = kv.get("segment", "tracks")) c.tracks = parse_tracks(*t);
        c.lexicon_bo = kv.get_string("segment", "lexicon_bo", c.lexicon_bo);
        c.lexicon_ko = kv.get_string("segment", "lexicon_ko", c.lexicon_ko);

        c.bpe_target_vocab = kv.get_int<std::size_t>("bpe", "target_vocab", c.bpe_target_vocab);
        c.bpe_min_pair_count = kv.get_int<std::uint64_t>("bpe", "min_pair_count", c.bpe_min_pair_count);

        c.w2v.dim = kv.get_int<std::size_t>("w2v", "dim", c.w2v.dim);
        c.w2v.window = kv.get_int<std::size_t>("w2v", "window", c.w2v.window);
        c.w2v.negatives = kv.get_int<std::size_t>("w2v", "negatives", c.w2v.negatives);
        c.w2v.epochs = kv.get_int<std::size_t>("w2v", "epochs", c.w2v.epochs);
        c.w2v.lr = kv.get_double("w2v", "lr", c.w2v.lr);
        c.w2v.sample = kv.get_double("w2v", "sample", c.w2v.sample);
        c.w2v_min_count = kv.get_int<std::size_t>("w2v", "min_count", c.w2v_min_count);

        c.mlm = mlm::MlmConfig::from_kv(kv, "mlm");
        c.masking.mask_prob = kv.get_double("mlm", "mask_prob", c.masking.mask_prob);
        c.pretrain.steps = kv.get_int<std::size_t>("mlm", "steps", c.pretrain.steps);
        c.pretrain.batch_size = kv.get_int<std::size_t>("mlm", "batch_size", c.pretrain.batch_size);
        c.pretrain.adam.lr = kv.get_double("mlm", "lr", c.pretrain.adam.lr);
        c.metrics_every = kv.get_int<std::size_t>("mlm", "metrics_every", c.metrics_every);

        if (auto p = kv.get("finetune", "pooling")) c.pooling = classify::parse_pooling(*p);
        c.freeze_encoder = kv.get_bool("finetune", "freeze_encoder", c.freeze_encoder);
        c.finetune = schedule_from(kv, "finetune", c.finetune);

        if (auto a = kv.get("clf", "archs")) {
            c.archs.clear();
            for (const auto &name : split_list(*a)) c.archs.push_back(classify::parse_arch(name));
        }
        c.zoo = classify::ZooConfig::from_kv(kv, "clf");
        if (auto w = kv.get("clf", "widths")) {
            c.zoo.widths.clear();
            for (const auto &x : split_list(*w)) c.zoo.widths.push_back(std::stoul(x));
        }
        c.clf = schedule_from(kv, "clf", c.clf);
        c.validate();
        return c;
    }

    static PipelineConfig load(const fs::path &path) {
        return from_kv(KvConfig::load(path.string()), path.has_parent_path() ? path.parent_path() : fs::path("."));
    }

    void validate() const {
        mlm.validate();
        masking.validate();
        w2v.validate();
        if (pretrain.batch_size == 0 || finetune.batch_size == 0 || clf.batch_size == 0) {
            throw ConfigError("batch sizes must be positive");
        }
        if (bpe_target_vocab <= static_cast<std::size_t>(bpe::SubwordVocab::kNumSpecial)) {
            throw ConfigError("bpe target_vocab must exceed the special tokens");
        }
        if (mlm.n_langs < kNumLanguages) throw ConfigError("mlm n_langs must cover all five languages");
    }

    fs::path lexicon_path(Language lang) const { return data_dir / (lang == Language::bo ? lexicon_bo : lexicon_ko); }

   private:
    static classify::TrainSchedule schedule_from(const KvConfig &kv, const std::string &section,
                                                 classify::TrainSchedule s) {
        s.epochs = kv.get_int<std::size_t>(section, "epochs", s.epochs);
        s.batch_size = kv.get_int<std::size_t>(section, "batch_size", s.batch_size);
        s.max_steps = kv.get_int<std::size_t>(section, "max_steps", s.max_steps);
        s.adam.lr = kv.get_double(section, "lr", s.adam.lr);
        return s;
    }
};

}  // namespace lrtc::pipeline
