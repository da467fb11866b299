// lrtc: stage-by-stage driver for the multilingual pretraining and
// text-classification pipeline.
//
//   lrtc run-all --config data/mini/pipeline.toml --work-dir runs/a
//   lrtc bpe-train --target-vocab 800
//   lrtc evaluate --gold gold.tsv --pred pred.tsv

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lrtc/pipeline/stages.hpp"

namespace {

using namespace lrtc;
namespace fs = std::filesystem;

struct CommonOptions {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string work_dir;
    std::string data_dir;
};

void add_common(CLI::App *cmd, CommonOptions &o) {
    cmd->add_option("--config", o.config, "pipeline config file (key = value)");
    cmd->add_option("--seed", o.seed, "global seed");
    cmd->add_option("--work-dir", o.work_dir, "artifact directory");
    cmd->add_option("--data-dir", o.data_dir, "data root (also LRTC_DATA_DIR)");
}

// Data root: --data-dir, then LRTC_DATA_DIR, then the config file.
// Without --config, <data root>/pipeline.toml is used when present.
pipeline::Context make_context(const CommonOptions &o) {
    std::optional<fs::path> root;
    if (!o.data_dir.empty()) {
        root = o.data_dir;
    } else if (const char *env = std::getenv("LRTC_DATA_DIR"); env && *env) {
        root = env;
    }
    pipeline::PipelineConfig cfg;
    if (!o.config.empty()) {
        cfg = pipeline::PipelineConfig::load(o.config);
    } else {
        const fs::path guess = root.value_or(cfg.data_dir) / "pipeline.toml";
        if (fs::exists(guess)) cfg = pipeline::PipelineConfig::load(guess);
    }
    if (root) cfg.data_dir = *root;
    if (o.seed) cfg.seed = *o.seed;
    if (!o.work_dir.empty()) cfg.work_dir = o.work_dir;
    cfg.validate();
    return {cfg};
}

/// Gold labels from column 2 of an id-keyed TSV (`id gold [pred]`);
/// predictions from the last column (`id pred` or `id gold pred`).
std::vector<std::pair<std::string, std::string>> read_column(const std::string &path, bool last) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path);
    std::vector<std::pair<std::string, std::string>> rows;
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, '\t')) f.push_back(cell);
        if (f.size() < 2) throw ParseError(n, path + ": expected id<TAB>label");
        rows.emplace_back(f[0], last ? f.back() : f[1]);
    }
    return rows;
}

int evaluate_files(const std::string &gold_path, const std::string &pred_path, const std::string &out) {
    const auto pred = read_column(pred_path, true);
    std::vector<std::string> gold_labels, pred_labels;
    if (gold_path.empty()) {
        for (const auto &p : classify::read_predictions(pred_path)) {
            gold_labels.push_back(p.gold);
            pred_labels.push_back(p.pred);
        }
    } else {
        std::map<std::string, std::string> gold;
        for (const auto &[id, label] : read_column(gold_path, false)) {
            if (!gold.emplace(id, label).second) throw InputError("duplicate id '" + id + "' in " + gold_path);
        }
        if (gold.size() != pred.size()) {
            throw InputError("gold has " + std::to_string(gold.size()) + " examples, predictions " +
                             std::to_string(pred.size()));
        }
        for (const auto &[id, label] : pred) {
            auto it = gold.find(id);
            if (it == gold.end()) throw InputError("prediction for unknown id '" + id + "'");
            gold_labels.push_back(it->second);
            pred_labels.push_back(label);
        }
    }
    const auto report = classify::evaluate(gold_labels, pred_labels);
    const std::string text = classify::to_json(report).dump(2) + "\n";
    if (out.empty()) {
        std::cout << text;
    } else {
        pipeline::io::write_text(out, text);
        std::cout << "macro_f1 " << report.macro_f1 << "\n";
    }
    return 0;
}

int segment_file(const std::string &input, const std::string &output, const std::string &lang_code,
                 const std::string &granularity, const std::string &lexicon_path) {
    const Language lang = parse_language(lang_code);
    const auto gran = segment::parse_granularity(granularity);
    std::optional<segment::MorphemeLexicon> lexicon;
    if (!lexicon_path.empty()) lexicon = segment::load_lexicon(lexicon_path);
    std::vector<nlohmann::json> rows;
    for (const auto &r : corpus::load_records(input)) {
        if (r.lang != lang) continue;
        auto j = corpus::to_json(r);
        j["tokens"] = segment::segment(r.text, lang, gran, lexicon ? &*lexicon : nullptr).tokens;
        rows.push_back(std::move(j));
    }
    if (output.empty()) {
        for (const auto &r : rows) std::cout << r.dump() << '\n';
    } else {
        pipeline::io::write_jsonl(output, rows);
    }
    return 0;
}

int nearest(const std::string &path, const std::string &word, std::size_t k) {
    const auto table = w2v::load_embeddings(path);
    for (const auto &[w, cos] : w2v::nearest_neighbors(word, k, table)) std::cout << w << '\t' << cos << '\n';
    return 0;
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"lrtc: multilingual subword pretraining and text classification pipeline"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(LRTC_VERSION));

    CommonOptions common;
    std::map<std::string, CLI::App *> stage_cmds;
    for (const auto &s : pipeline::stage_names()) {
        auto *cmd = app.add_subcommand(s, "run the " + s + " stage");
        add_common(cmd, common);
        stage_cmds[s] = cmd;
    }
    auto *run_all = app.add_subcommand("run-all", "run every stage in order");
    add_common(run_all, common);

    // Per-stage overrides and standalone modes.
    std::string seg_input, seg_output, seg_lang, seg_gran = "word", seg_lexicon;
    stage_cmds["segment"]->add_option("--input", seg_input, "standalone: JSON-Lines documents");
    stage_cmds["segment"]->add_option("--output", seg_output, "standalone: output file (default stdout)");
    stage_cmds["segment"]->add_option("--lang", seg_lang, "standalone: language code");
    stage_cmds["segment"]->add_option("--granularity", seg_gran, "word|syllable|morpheme");
    stage_cmds["segment"]->add_option("--lexicon", seg_lexicon, "lexicon file");

    std::optional<std::size_t> target_vocab, w2v_dim, mlm_steps;
    stage_cmds["bpe-train"]->add_option("--target-vocab", target_vocab, "vocabulary size incl. specials");
    stage_cmds["w2v-train"]->add_option("--dim", w2v_dim, "embedding dimension");
    stage_cmds["mlm-pretrain"]->add_option("--steps", mlm_steps, "optimizer steps");
    std::vector<std::string> archs;
    stage_cmds["clf-train"]->add_option("--arch", archs, "architecture(s) to train");

    std::string gold_path, pred_path, eval_out;
    stage_cmds["evaluate"]->add_option("--gold", gold_path, "standalone: id<TAB>gold file");
    stage_cmds["evaluate"]->add_option("--pred", pred_path, "standalone: predictions TSV");
    stage_cmds["evaluate"]->add_option("--out", eval_out, "standalone: report JSON path");

    auto *nn_cmd = app.add_subcommand("w2v-nn", "nearest neighbours in an embedding file");
    std::string nn_file, nn_word;
    std::size_t nn_k = 10;
    nn_cmd->add_option("--embeddings", nn_file, "embedding file")->required();
    nn_cmd->add_option("--word", nn_word, "query word")->required();
    nn_cmd->add_option("-k", nn_k, "neighbours");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (nn_cmd->parsed()) return nearest(nn_file, nn_word, nn_k);
        if (stage_cmds["evaluate"]->parsed() && !pred_path.empty()) {
            return evaluate_files(gold_path, pred_path, eval_out);
        }
        if (stage_cmds["segment"]->parsed() && !seg_input.empty()) {
            if (seg_lang.empty()) throw ConfigError("--input needs --lang");
            return segment_file(seg_input, seg_output, seg_lang, seg_gran, seg_lexicon);
        }

        pipeline::Context ctx = make_context(common);
        if (target_vocab) ctx.config.bpe_target_vocab = *target_vocab;
        if (w2v_dim) ctx.config.w2v.dim = *w2v_dim;
        if (mlm_steps) ctx.config.pretrain.steps = *mlm_steps;
        if (!archs.empty()) {
            ctx.config.archs.clear();
            for (const auto &a : archs) ctx.config.archs.push_back(classify::parse_arch(a));
        }
        ctx.config.validate();

        if (run_all->parsed()) {
            pipeline::run_all(ctx, &std::cout);
            std::cout << (ctx.config.work_dir / "report" / "report.md").string() << "\n";
            return 0;
        }
        for (const auto &[name, cmd] : stage_cmds) {
            if (cmd->parsed()) pipeline::run_stage(name, ctx, &std::cout);
        }
        return 0;
    } catch (const Error &e) {
        std::cerr << "lrtc: " << e.what() << '\n';
        return exit_code_for(e);
    } catch (const std::exception &e) {
        std::cerr << "lrtc: " << e.what() << '\n';
        return 1;
    }
}
