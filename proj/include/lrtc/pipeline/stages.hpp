#pragma once

#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "lrtc/bpe.hpp"
#include "lrtc/classify/eval.hpp"
#include "lrtc/classify/finetune.hpp"
#include "lrtc/classify/train.hpp"
#include "lrtc/classify/zoo.hpp"
#include "lrtc/corpus.hpp"
#include "lrtc/mlm.hpp"
#include "lrtc/pipeline/config.hpp"
#include "lrtc/pipeline/manifest.hpp"
#include "lrtc/pipeline/report.hpp"
#include "lrtc/segment.hpp"
#include "lrtc/word2vec.hpp"

namespace lrtc::pipeline {

using nlohmann::json;

namespace io {

inline std::vector<json> read_jsonl(const fs::path &path) {
    std::ifstream in(path);
    if (!in) throw InvalidDataset("cannot open " + path.string());
    std::vector<json> out;
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (line.empty()) continue;
        try {
            out.push_back(json::parse(line));
        } catch (const json::parse_error &e) {
            throw ParseError(n, path.string() + ": " + e.what());
        }
    }
    return out;
}

inline void write_jsonl(const fs::path &path, const std::vector<json> &rows) {
    fs::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw InvalidDataset("cannot write " + path.string());
    for (const auto &r : rows) out << r.dump() << '\n';
}

inline void write_json(const fs::path &path, const json &j) {
    fs::create_directories(path.parent_path());
    std::ofstream out(path);
    out << j.dump(2) << '\n';
}

inline void write_text(const fs::path &path, const std::string &text) {
    fs::create_directories(path.parent_path());
    std::ofstream out(path);
    out << text;
}

}  // namespace io

/// Paths and shared helpers for one pipeline run.
struct Context {
    PipelineConfig config;

    fs::path stage_dir(const std::string &stage) const { return config.work_dir / stage; }
    fs::path manifest_path() const { return config.work_dir / "manifest.json"; }
    std::uint64_t stage_seed(const std::string &stage) const { return derive_seed(config.seed, stage); }
};

namespace detail {

inline segment::TokenSequence tokens_of(const json &r, const Track &t) {
    return {r.at("tokens").get<std::vector<std::string>>(), t.lang, t.granularity};
}

inline std::vector<segment::TokenSequence> sequences(const std::vector<json> &rows, const Track &t) {
    std::vector<segment::TokenSequence> out;
    for (const auto &r : rows) out.push_back(tokens_of(r, t));
    return out;
}

/// Sorted labels occurring in any of the sets.
inline std::vector<std::string> label_set(std::initializer_list<const std::vector<json> *> sets) {
    std::set<std::string> s;
    for (const auto *rows : sets) {
        for (const auto &r : *rows) s.insert(r.at("label").get<std::string>());
    }
    return {s.begin(), s.end()};
}

inline int label_index(const std::vector<std::string> &labels, const std::string &l) {
    auto it = std::find(labels.begin(), labels.end(), l);
    if (it == labels.end()) throw InputError("label '" + l + "' missing from label set");
    return static_cast<int>(it - labels.begin());
}

inline std::string curve_tsv(const classify::TrainResult &r) {
    std::ostringstream out;
    out << std::setprecision(17) << "epoch\tsteps\ttrain_loss\tvalid_macro_f1\n";
    for (const auto &e : r.curve) out << e.epoch << '\t' << e.steps << '\t' << e.train_loss << '\t' << e.valid_macro_f1 << '\n';
    return out.str();
}

/// Predicts `test` with `model` and writes predictions.tsv and curve.tsv.
inline void write_outputs(const fs::path &dir, const classify::TextClassifier &model, const std::vector<json> &test,
                          const classify::LabeledSet &test_set, const std::vector<std::string> &labels,
                          const classify::TrainResult &result) {
    const auto pred = classify::predict(model, test_set.inputs);
    std::vector<classify::Prediction> rows;
    for (std::size_t i = 0; i < test.size(); ++i) {
        rows.push_back({test[i].at("id").get<std::string>(), labels[static_cast<std::size_t>(test_set.labels[i])],
                        labels[static_cast<std::size_t>(pred[i])]});
    }
    fs::create_directories(dir);
    classify::write_predictions((dir / "predictions.tsv").string(), rows);
    io::write_text(dir / "curve.tsv", curve_tsv(result));
}

}  // namespace detail

// ---- stages ---------------------------------------------------------------

inline json stage_clean(const Context &ctx) {
    const auto &c = ctx.config;
    const fs::path out = ctx.stage_dir("clean");
    std::ofstream rejected(out / "rejected.tsv");
    json stats;
    for (const auto &[name, file] : {std::pair{"labeled", c.labeled_file}, std::pair{"unlabeled", c.unlabeled_file}}) {
        const fs::path src = c.data_dir / file;
        if (std::string(name) == "unlabeled" && !fs::exists(src)) continue;
        std::vector<json> kept;
        std::size_t dropped = 0;
        for (const auto &r : corpus::load_records(src.string())) {
            if (std::string(name) == "labeled" && !r.label) throw InvalidDataset(src.string() + ": record without label");
            auto res = corpus::clean_document({r.text, r.lang, r.id}, c.min_length);
            if (auto *rej = std::get_if<corpus::Rejection>(&res)) {
                corpus::write_rejection(rejected, *rej);
                ++dropped;
                continue;
            }
            corpus::DocRecord cleaned = r;
            cleaned.text = std::get<corpus::CleanDocument>(res).text;
            kept.push_back(corpus::to_json(cleaned));
        }
        io::write_jsonl(out / (std::string(name) + ".jsonl"), kept);
        stats[name] = {{"kept", kept.size()}, {"rejected", dropped}};
    }
    if (!stats.contains("labeled") || stats["labeled"]["kept"].get<std::size_t>() == 0) {
        throw InvalidDataset("no labeled documents survive cleaning");
    }
    io::write_json(out / "stats.json", stats);
    return {{"min_length", c.min_length}, {"data_dir", c.data_dir.generic_string()}};
}

inline json stage_segment(const Context &ctx) {
    const auto &c = ctx.config;
    std::map<Language, segment::MorphemeLexicon> lexicons;
    for (const auto &t : c.tracks) {
        const bool needs = (t.lang == Language::bo && t.granularity == segment::Granularity::Word) ||
                           t.lang == Language::ko;
        if (needs && !lexicons.count(t.lang)) {
            const fs::path p = c.lexicon_path(t.lang);
            if (!fs::exists(p)) throw LexiconRequired("missing lexicon " + p.string());
            lexicons.emplace(t.lang, segment::load_lexicon(p.string()));
        }
    }
    for (const std::string name : {"labeled", "unlabeled"}) {
        const fs::path src = ctx.stage_dir("clean") / (name + ".jsonl");
        if (!fs::exists(src)) continue;
        const auto docs = io::read_jsonl(src);
        for (const auto &t : c.tracks) {
            const segment::MorphemeLexicon *lex = lexicons.count(t.lang) ? &lexicons.at(t.lang) : nullptr;
            std::vector<json> rows;
            for (const auto &d : docs) {
                if (parse_language(d.at("lang").get<std::string>()) != t.lang) continue;
                json r = {{"id", d.at("id")}, {"lang", d.at("lang")}};
                if (d.contains("label")) r["label"] = d["label"];
                r["tokens"] = segment::segment(d.at("text").get<std::string>(), t.lang, t.granularity, lex).tokens;
                if (r["tokens"].empty()) continue;
                rows.push_back(std::move(r));
            }
            io::write_jsonl(ctx.stage_dir("segment") / t.name() / (name + ".jsonl"), rows);
        }
    }
    json tracks = json::array();
    for (const auto &t : c.tracks) tracks.push_back(t.name());
    return {{"tracks", tracks}, {"lexicon_bo", c.lexicon_bo}, {"lexicon_ko", c.lexicon_ko}};
}

inline json stage_split(const Context &ctx) {
    const std::uint64_t seed = ctx.stage_seed("split");
    json sizes;
    for (const auto &t : ctx.config.tracks) {
        const auto docs = io::read_jsonl(ctx.stage_dir("segment") / t.name() / "labeled.jsonl");
        // Seeded by language so that views of one language split identically.
        const auto s = corpus::split_corpus(docs, derive_seed(seed, to_code(t.lang)));
        const fs::path dir = ctx.stage_dir("split") / t.name();
        io::write_jsonl(dir / "train.jsonl", s.train);
        io::write_jsonl(dir / "valid.jsonl", s.valid);
        io::write_jsonl(dir / "test.jsonl", s.test);
        sizes[t.name()] = {s.train.size(), s.valid.size(), s.test.size()};
    }
    io::write_json(ctx.stage_dir("split") / "sizes.json", sizes);
    return {{"seed", seed}, {"ratio", "8:1:1"}};
}

inline json stage_balance(const Context &ctx) {
    const std::uint64_t seed = ctx.stage_seed("balance");
    for (const auto &t : ctx.config.tracks) {
        const fs::path split = ctx.stage_dir("split") / t.name();
        const auto train = io::read_jsonl(split / "train.jsonl");
        const auto valid = io::read_jsonl(split / "valid.jsonl");
        const auto test = io::read_jsonl(split / "test.jsonl");
        const auto labels = detail::label_set({&train, &valid, &test});
        const auto balanced = corpus::balance_by(
            train, [](const json &r) { return r.at("label").get<std::string>(); }, derive_seed(seed, to_code(t.lang)),
            labels);
        io::write_jsonl(ctx.stage_dir("balance") / t.name() / "train.jsonl", balanced);
    }
    return {{"seed", seed}, {"strategy", "downsample_to_min"}};
}

/// Word sequences the subword model and the word vectors learn from: the
/// unlabeled text plus the (unbalanced) training split.
inline std::vector<segment::TokenSequence> training_text(const Context &ctx, const Track &t) {
    std::vector<segment::TokenSequence> out;
    const fs::path unl = ctx.stage_dir("segment") / t.name() / "unlabeled.jsonl";
    if (fs::exists(unl)) out = detail::sequences(io::read_jsonl(unl), t);
    auto train = detail::sequences(io::read_jsonl(ctx.stage_dir("split") / t.name() / "train.jsonl"), t);
    out.insert(out.end(), train.begin(), train.end());
    return out;
}

inline json stage_bpe_train(const Context &ctx) {
    const auto &c = ctx.config;
    std::vector<segment::TokenSequence> all;
    for (const auto &t : c.tracks) {
        auto s = training_text(ctx, t);
        all.insert(all.end(), s.begin(), s.end());
    }
    const auto result = bpe::train_bpe(bpe::count_words(all), c.bpe_target_vocab, bpe::kDefaultEndOfWord,
                                       c.bpe_min_pair_count);
    const fs::path dir = ctx.stage_dir("bpe-train");
    bpe::save_merges((dir / "merges.txt").string(), result.merges);
    bpe::save_vocab((dir / "vocab.txt").string(), result.vocab);
    const auto cov = bpe::coverage(result.vocab, result.merges, all);
    json per;
    for (const auto &[lang, f] : cov.per_language) per[std::string(to_code(lang))] = f;
    io::write_json(dir / "coverage.json", {{"fraction_covered", cov.fraction_covered},
                                           {"per_language", per},
                                           {"vocab_size", result.vocab.size()},
                                           {"merges", result.merges.size()}});
    return {{"target_vocab", c.bpe_target_vocab}, {"min_pair_count", c.bpe_min_pair_count}};
}

inline json stage_bpe_encode(const Context &ctx) {
    const fs::path bdir = ctx.stage_dir("bpe-train");
    const auto merges = bpe::load_merges((bdir / "merges.txt").string());
    const auto vocab = bpe::load_vocab((bdir / "vocab.txt").string());
    bpe::Encoder enc(merges, vocab);
    auto encode = [&](const json &r) {
        std::vector<int> ids;
        for (const auto &w : r.at("tokens")) {
            auto piece = enc.encode_word(w.get<std::string>());
            ids.insert(ids.end(), piece.begin(), piece.end());
        }
        json o = {{"id", r.at("id")}, {"lang", r.at("lang")}, {"ids", ids}};
        if (r.contains("label")) o["label"] = r["label"];
        return o;
    };
    const fs::path out = ctx.stage_dir("bpe-encode");
    std::vector<json> pretrain;
    for (const auto &t : ctx.config.tracks) {
        const fs::path unl = ctx.stage_dir("segment") / t.name() / "unlabeled.jsonl";
        if (fs::exists(unl)) {
            for (const auto &r : io::read_jsonl(unl)) pretrain.push_back(encode(r));
        }
        std::map<std::string, fs::path> sets = {{"train", ctx.stage_dir("balance") / t.name() / "train.jsonl"},
                                                {"valid", ctx.stage_dir("split") / t.name() / "valid.jsonl"},
                                                {"test", ctx.stage_dir("split") / t.name() / "test.jsonl"}};
        for (const auto &[name, path] : sets) {
            std::vector<json> rows;
            for (const auto &r : io::read_jsonl(path)) rows.push_back(encode(r));
            io::write_jsonl(out / t.name() / (name + ".jsonl"), rows);
        }
        for (const auto &r : io::read_jsonl(ctx.stage_dir("split") / t.name() / "train.jsonl")) {
            pretrain.push_back(encode(r));
        }
    }
    io::write_jsonl(out / "pretrain.jsonl", pretrain);
    return {{"vocab_size", vocab.size()}};
}

inline json stage_w2v_train(const Context &ctx) {
    const auto &c = ctx.config;
    for (const auto &t : c.tracks) {
        const auto text = training_text(ctx, t);
        const auto vocab = w2v::build_word_vocab(text, c.w2v_min_count);
        w2v::SkipGramConfig cfg = c.w2v;
        cfg.seed = derive_seed(ctx.stage_seed("w2v-train"), t.name());
        const auto table = w2v::train_skipgram(text, vocab, cfg);
        fs::create_directories(ctx.stage_dir("w2v-train"));
        w2v::save_embeddings((ctx.stage_dir("w2v-train") / (t.name() + ".vec")).string(), table);
    }
    return {{"dim", c.w2v.dim},         {"window", c.w2v.window}, {"negatives", c.w2v.negatives},
            {"epochs", c.w2v.epochs},   {"lr", c.w2v.lr},         {"sample", c.w2v.sample},
            {"min_count", c.w2v_min_count}};
}

/// The pretraining config with the vocabulary size of the trained subword model.
inline mlm::MlmConfig effective_mlm_config(const Context &ctx) {
    mlm::MlmConfig m = ctx.config.mlm;
    m.vocab_size = bpe::load_vocab((ctx.stage_dir("bpe-train") / "vocab.txt").string()).size();
    m.seed = ctx.stage_seed("mlm-pretrain");
    m.validate();
    return m;
}

inline json stage_mlm_pretrain(const Context &ctx) {
    const auto &c = ctx.config;
    std::map<Language, std::vector<std::vector<int>>> corpus;
    for (const auto &r : io::read_jsonl(ctx.stage_dir("bpe-encode") / "pretrain.jsonl")) {
        corpus[parse_language(r.at("lang").get<std::string>())].push_back(r.at("ids").get<std::vector<int>>());
    }
    const mlm::MlmConfig m = effective_mlm_config(ctx);
    const auto ck = mlm::pretrain(corpus, m, c.masking, c.pretrain);
    const fs::path dir = ctx.stage_dir("mlm-pretrain");
    fs::create_directories(dir);
    mlm::save_checkpoint((dir / "checkpoint.bin").string(), ck);
    std::vector<mlm::LossRecord> logged;
    for (const auto &r : ck.loss_history) {
        if (c.metrics_every <= 1 || r.step % c.metrics_every == 0 || &r == &ck.loss_history.back()) logged.push_back(r);
    }
    std::ofstream metrics(dir / "metrics.tsv");
    mlm::write_metrics(metrics, logged);
    json params = m;
    params["steps"] = c.pretrain.steps;
    params["batch_size"] = c.pretrain.batch_size;
    params["lr"] = c.pretrain.adam.lr;
    params["mask_prob"] = c.masking.mask_prob;
    return params;
}

inline classify::LabeledSet subword_set(const std::vector<json> &rows, const std::vector<std::string> &labels) {
    classify::LabeledSet s;
    for (const auto &r : rows) {
        s.inputs.push_back({r.at("ids").get<std::vector<int>>(),
                            static_cast<int>(index_of(parse_language(r.at("lang").get<std::string>())))});
        s.labels.push_back(detail::label_index(labels, r.at("label").get<std::string>()));
    }
    return s;
}

inline json stage_finetune(const Context &ctx) {
    const auto &c = ctx.config;
    const auto ck = mlm::load_checkpoint((ctx.stage_dir("mlm-pretrain") / "checkpoint.bin").string());
    const std::size_t vocab_size = bpe::load_vocab((ctx.stage_dir("bpe-train") / "vocab.txt").string()).size();
    for (const auto &t : c.tracks) {
        const fs::path enc = ctx.stage_dir("bpe-encode") / t.name();
        const auto train = io::read_jsonl(enc / "train.jsonl");
        const auto valid = io::read_jsonl(enc / "valid.jsonl");
        const auto test = io::read_jsonl(enc / "test.jsonl");
        const auto labels = detail::label_set({&train, &valid, &test});
        classify::FineTuneConfig fc{labels.size(), c.pooling, c.freeze_encoder,
                                    derive_seed(ctx.stage_seed("finetune"), t.name())};
        classify::FineTunedClassifier model(ck, fc);
        classify::TrainSchedule sched = c.finetune;
        sched.seed = fc.seed;
        const auto result =
            classify::fine_tune(model, vocab_size, subword_set(train, labels), subword_set(valid, labels), sched);
        detail::write_outputs(ctx.stage_dir("finetune") / t.name(), model, test, subword_set(test, labels), labels,
                              result);
    }
    return {{"pooling", c.pooling == classify::Pooling::first_position ? "first_position" : "mean_over_nonpad"},
            {"freeze_encoder", c.freeze_encoder},
            {"epochs", c.finetune.epochs},
            {"batch_size", c.finetune.batch_size},
            {"max_steps", c.finetune.max_steps},
            {"lr", c.finetune.adam.lr}};
}

inline json stage_clf_train(const Context &ctx) {
    const auto &c = ctx.config;
    json archs = json::array();
    for (auto a : c.archs) {
        if (a == classify::Arch::mlm_finetune) throw ConfigError("mlm_finetune runs in the finetune stage");
        archs.push_back(classify::to_string(a));
    }
    for (const auto &t : c.tracks) {
        const auto table = w2v::load_embeddings((ctx.stage_dir("w2v-train") / (t.name() + ".vec")).string());
        const auto train = io::read_jsonl(ctx.stage_dir("balance") / t.name() / "train.jsonl");
        const auto valid = io::read_jsonl(ctx.stage_dir("split") / t.name() / "valid.jsonl");
        const auto test = io::read_jsonl(ctx.stage_dir("split") / t.name() / "test.jsonl");
        const auto labels = detail::label_set({&train, &valid, &test});
        for (auto a : c.archs) {
            classify::ZooConfig zc = c.zoo;
            zc.num_classes = labels.size();
            zc.seed = derive_seed(ctx.stage_seed("clf-train"), std::string(classify::to_string(a)) + "/" + t.name());
            auto model = classify::build_classifier(a, table, zc);
            auto to_set = [&](const std::vector<json> &rows) {
                classify::LabeledSet s;
                for (const auto &r : rows) {
                    s.inputs.push_back({model->ids_for(r.at("tokens").get<std::vector<std::string>>()),
                                        static_cast<int>(index_of(t.lang))});
                    s.labels.push_back(detail::label_index(labels, r.at("label").get<std::string>()));
                }
                return s;
            };
            classify::TrainSchedule sched = c.clf;
            sched.seed = zc.seed;
            const auto result = classify::train_classifier(*model, to_set(train), to_set(valid), sched);
            detail::write_outputs(ctx.stage_dir("clf-train") / std::string(classify::to_string(a)) / t.name(),
                                  *model, test, to_set(test), labels, result);
        }
    }
    const auto &z = c.zoo;
    return {{"archs", archs},
            {"freeze_embeddings", z.freeze_embeddings},
            {"filters", z.filters},
            {"widths", z.widths},
            {"hidden", z.hidden},
            {"attention_dim", z.attention_dim},
            {"rcnn_dim", z.rcnn_dim},
            {"dpcnn_channels", z.dpcnn_channels},
            {"model_dim", z.model_dim},
            {"heads", z.heads},
            {"layers", z.layers},
            {"epochs", c.clf.epochs},
            {"batch_size", c.clf.batch_size},
            {"lr", c.clf.adam.lr}};
}

/// Scores one predictions file; the label set is the union of gold and pred.
inline classify::EvalReport evaluate_predictions(const std::vector<classify::Prediction> &rows) {
    std::vector<std::string> gold, pred;
    for (const auto &r : rows) {
        gold.push_back(r.gold);
        pred.push_back(r.pred);
    }
    return classify::evaluate(gold, pred);
}

inline json stage_evaluate(const Context &ctx) {
    json summary = json::object();
    auto score_dir = [&](const std::string &system, const fs::path &dir) {
        if (!fs::exists(dir)) return;
        for (const auto &t : ctx.config.tracks) {
            const fs::path p = dir / t.name() / "predictions.tsv";
            if (!fs::exists(p)) continue;
            const auto report = evaluate_predictions(classify::read_predictions(p.string()));
            io::write_json(ctx.stage_dir("evaluate") / system / (t.name() + ".json"), classify::to_json(report));
            summary[system][t.name()] = report.macro_f1;
        }
    };
    score_dir(std::string(classify::to_string(classify::Arch::mlm_finetune)), ctx.stage_dir("finetune"));
    for (auto a : classify::kAllArchs) {
        if (a != classify::Arch::mlm_finetune) {
            score_dir(std::string(classify::to_string(a)), ctx.stage_dir("clf-train") / std::string(classify::to_string(a)));
        }
    }
    if (summary.empty()) throw InvalidDataset("no predictions to evaluate");
    io::write_json(ctx.stage_dir("evaluate") / "summary.json", summary);
    return {{"metric", "macro_f1"}};
}

inline json stage_report(const Context &ctx) {
    const fs::path p = ctx.stage_dir("evaluate") / "summary.json";
    std::ifstream in(p);
    if (!in) throw InvalidDataset("missing " + p.string());
    const json summary = json::parse(in);
    ScoreTable scores;
    for (const auto &[sys, row] : summary.items()) {
        for (const auto &[track, f1] : row.items()) scores[sys][track] = f1.get<double>();
    }
    std::vector<std::string> columns;
    for (const auto &t : ctx.config.tracks) columns.push_back(t.name());
    const std::string table = render_report(scores, columns);
    io::write_text(ctx.stage_dir("report") / "report.md",
                   "# Macro-F1 (%) on the test split\n\n" + table);
    return {{"columns", columns}};
}

// ---- runner ---------------------------------------------------------------

using StageFn = std::function<json(const Context &)>;

inline const std::map<std::string, StageFn> &stage_table() {
    static const std::map<std::string, StageFn> table = {
        {"clean", stage_clean},         {"segment", stage_segment},       {"split", stage_split},
        {"balance", stage_balance},     {"bpe-train", stage_bpe_train},   {"bpe-encode", stage_bpe_encode},
        {"w2v-train", stage_w2v_train}, {"mlm-pretrain", stage_mlm_pretrain}, {"finetune", stage_finetune},
        {"clf-train", stage_clf_train}, {"evaluate", stage_evaluate},     {"report", stage_report},
    };
    return table;
}

/// Checks upstream artifacts, rewrites the stage's directory from scratch and
/// records it in the manifest. Wall-clock seconds go to timings.json.
inline void run_stage(const std::string &stage, const Context &ctx, std::ostream *log = nullptr) {
    auto it = stage_table().find(stage);
    if (it == stage_table().end()) throw ConfigError("unknown stage '" + stage + "'");
    Manifest manifest = Manifest::load(ctx.manifest_path());
    const auto inputs = manifest.require_upstream(stage, ctx.config.work_dir);

    const fs::path dir = ctx.stage_dir(stage);
    fs::remove_all(dir);
    fs::create_directories(dir);
    const auto start = std::chrono::steady_clock::now();
    json params = it->second(ctx);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    params["stage_seed"] = ctx.stage_seed(stage);

    manifest.set_seed(ctx.config.seed);
    manifest.record(stage, ctx.config.work_dir, inputs, params);
    manifest.save();

    const fs::path tpath = ctx.config.work_dir / "timings.json";
    json timings = json::object();
    if (fs::exists(tpath)) {
        std::ifstream in(tpath);
        timings = json::parse(in, nullptr, false);
        if (timings.is_discarded()) timings = json::object();
    }
    timings[stage] = secs;
    io::write_json(tpath, timings);
    if (log) *log << stage << ": ok (" << std::fixed << std::setprecision(1) << secs << " s)\n";
}

inline void run_all(const Context &ctx, std::ostream *log = nullptr) {
    for (const auto &s : stage_names()) run_stage(s, ctx, log);
}

}  // namespace lrtc::pipeline
