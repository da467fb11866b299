#include <gtest/gtest.h>

#include <filesystem>
#include <map>

#include "lrtc/classify/eval.hpp"
#include "lrtc/classify/finetune.hpp"
#include "lrtc/classify/train.hpp"
#include "lrtc/classify/zoo.hpp"
#include "lrtc/nn/gradcheck.hpp"
#include "oracles/f1_reference.hpp"
#include "support/clf_data.hpp"

using namespace lrtc;
using namespace lrtc::classify;

namespace {

std::vector<std::string> random_labels(std::size_t n, std::size_t k, Rng &rng) {
    std::vector<std::string> v;
    for (std::size_t i = 0; i < n; ++i) v.push_back("c" + std::to_string(rng.uniform_int(k)));
    return v;
}

ZooConfig micro_zoo(std::size_t classes) {
    ZooConfig c;
    c.num_classes = classes;
    c.freeze_embeddings = false;
    c.filters = 3;
    c.hidden = 3;
    c.attention_dim = 3;
    c.rcnn_dim = 3;
    c.dpcnn_channels = 3;
    c.model_dim = 4;
    c.heads = 2;
    c.max_len = 16;
    c.seed = 5;
    return c;
}

}  // namespace

TEST(Evaluate, HandCase) {
    auto r = evaluate({"A", "A", "B", "B"}, {"A", "B", "B", "B"});
    ASSERT_EQ(r.per_class.size(), 2u);
    EXPECT_NEAR(r.per_class[0].f1, 2.0 / 3.0, 1e-12);
    EXPECT_NEAR(r.per_class[1].f1, 0.8, 1e-12);
    EXPECT_NEAR(r.macro_f1, 0.7333333333333333, 1e-9);
    EXPECT_EQ(r.confusion, (std::vector<std::vector<std::uint64_t>>{{1, 1}, {0, 2}}));
    EXPECT_DOUBLE_EQ(evaluate({"x", "y", "x"}, {"x", "y", "x"}).macro_f1, 1.0);
}

TEST(Evaluate, NeverPredictedClassCountsAsZero) {
    auto r = evaluate({"A", "B", "C"}, {"A", "B", "B"});
    EXPECT_DOUBLE_EQ(r.per_class[2].f1, 0.0);
    EXPECT_NEAR(r.macro_f1, (1.0 + 2.0 / 3.0 + 0.0) / 3.0, 1e-12);
    // A label absent from both sides still enters the mean.
    auto s = evaluate({"A"}, {"A"}, {"A", "Z"});
    EXPECT_DOUBLE_EQ(s.macro_f1, 0.5);
}

TEST(Evaluate, Errors) {
    EXPECT_THROW(evaluate({"A"}, {"A", "B"}), InputError);
    EXPECT_THROW(evaluate({}, {}), InputError);
    EXPECT_THROW(evaluate({"A"}, {"Q"}, {"A"}), InputError);
    EXPECT_THROW(evaluate({"A"}, {"A"}, {"A", "A"}), InputError);
}

TEST(Evaluate, MatchesOracle) {
    Rng rng(9);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t k = 1 + rng.uniform_int(10);
        const std::size_t n = 1 + rng.uniform_int(1000);
        auto g = random_labels(n, k, rng);
        auto p = random_labels(n, k, rng);
        std::vector<std::string> labels;
        for (std::size_t c = 0; c < k; ++c) labels.push_back("c" + std::to_string(c));
        EXPECT_EQ(evaluate(g, p, labels).macro_f1, oracle::macro_f1(g, p, labels));
    }
}

TEST(Evaluate, RenamingInvariance) {
    Rng rng(4);
    for (int trial = 0; trial < 50; ++trial) {
        auto g = random_labels(200, 6, rng);
        auto p = random_labels(200, 6, rng);
        std::map<std::string, std::string> rename;
        std::vector<int> perm = {0, 1, 2, 3, 4, 5};
        shuffle(perm, rng);
        for (int c = 0; c < 6; ++c) rename["c" + std::to_string(c)] = "z" + std::to_string(perm[c]);
        auto g2 = g, p2 = p;
        for (auto &x : g2) x = rename[x];
        for (auto &x : p2) x = rename[x];
        EXPECT_NEAR(evaluate(g, p).macro_f1, evaluate(g2, p2).macro_f1, 1e-12);
    }
}

TEST(Evaluate, JsonAndPredictionsRoundTrip) {
    auto r = evaluate({"A", "A", "B", "C"}, {"A", "B", "B", "A"});
    EXPECT_EQ(report_from_json(nlohmann::json::parse(to_json(r).dump())), r);
    const auto path = (std::filesystem::temp_directory_path() / "lrtc_pred.tsv").string();
    std::vector<Prediction> rows = {{"d1", "A", "B"}, {"d2", "C", "C"}};
    write_predictions(path, rows);
    EXPECT_EQ(read_predictions(path), rows);
    std::ofstream(path) << "only\tone\n";
    EXPECT_THROW(read_predictions(path), ParseError);
}

TEST(Zoo, ParseArch) {
    for (Arch a : kAllArchs) EXPECT_EQ(parse_arch(to_string(a)), a);
    EXPECT_THROW(parse_arch("bert"), ConfigError);
    auto table = testdata::random_table(10, 4, 1);
    EXPECT_THROW(build_classifier(Arch::mlm_finetune, table, micro_zoo(2)), ConfigError);
    EXPECT_THROW(build_classifier(Arch::fasttext, table, micro_zoo(1)), InvalidLabelSet);
}

TEST(Zoo, FastTextShape) {
    auto table = testdata::random_table(20, 6, 1);
    auto m = build_classifier("fasttext", table, micro_zoo(3));
    std::vector<EncodedText> batch = {{{1, 2, 3}, 0}, {{4}, 1}, {{5, 6, 7, 8, 9}, 2}, {{}, 0}};
    const Var out = m->forward(batch);
    EXPECT_EQ(out.rows(), 4u);
    EXPECT_EQ(out.cols(), 3u);
}

TEST(Zoo, ShortInputsAreDefined) {
    auto table = testdata::random_table(20, 6, 1);
    for (Arch a : kAllArchs) {
        if (a == Arch::mlm_finetune) continue;
        auto m = build_classifier(a, table, micro_zoo(2));
        for (std::vector<int> ids : {std::vector<int>{}, {3}, {3, 4}, {3, 4, 5, 6, 7, 8, 9}}) {
            const Tensor out = m->forward({{ids, 0}}).value();
            EXPECT_EQ(out.cols(), 2u) << to_string(a);
            EXPECT_TRUE(out.all_finite()) << to_string(a);
        }
    }
}

TEST(Zoo, UnknownWordsMapToZeroRow) {
    auto table = testdata::random_table(5, 3, 1);
    auto m = build_classifier(Arch::fasttext, table, micro_zoo(2));
    EXPECT_EQ(m->ids_for({"t2", "nope"}), (std::vector<int>{2, 5}));
}

TEST(Zoo, EveryMemberPassesGradCheck) {
    auto table = testdata::random_table(12, 4, 2);
    std::vector<EncodedText> batch = {{{1, 2, 3, 4, 5, 6, 7}, 0}, {{8, 9}, 1}, {{10, 11, 0, 3, 2}, 2}};
    for (Arch a : kAllArchs) {
        if (a == Arch::mlm_finetune) continue;
        auto m = build_classifier(a, table, micro_zoo(3));
        auto loss = [&] { return nn::cross_entropy(m->forward(batch), {0, 2, 1}); };
        EXPECT_LT(nn::grad_check_params(loss, m->params()), 1e-4) << to_string(a);
    }
}

TEST(Zoo, FrozenEmbeddingsAreNotParameters) {
    auto table = testdata::random_table(12, 4, 2);
    auto cfg = micro_zoo(2);
    cfg.freeze_embeddings = true;
    EXPECT_FALSE(build_classifier(Arch::fasttext, table, cfg)->params().contains("embedding"));
    cfg.freeze_embeddings = false;
    EXPECT_TRUE(build_classifier(Arch::fasttext, table, cfg)->params().contains("embedding"));
}

TEST(Zoo, ArgmaxIgnoresLogitShift) {
    Tensor t = Tensor::from_rows({{0.1, 2.0, -1.0}, {5.0, 5.5, 5.49}});
    for (double shift : {0.0, 3.0, -100.0}) {
        Tensor s = t;
        for (double &x : s.values()) x += shift;
        EXPECT_EQ(argmax_row(s, 0), 1u);
        EXPECT_EQ(argmax_row(s, 1), 1u);
    }
}

TEST(Train, FastTextSeparable) {
    auto data = testdata::marker_dataset(120, 2, 10, 3);
    auto table = testdata::random_table(testdata::marker_vocab_size(2, 10), 16, 4);
    auto cfg = micro_zoo(2);
    cfg.freeze_embeddings = false;
    auto m = build_classifier(Arch::fasttext, table, cfg);
    TrainSchedule s;
    s.epochs = 40;
    s.adam.lr = 0.05;
    train_classifier(*m, data, {}, s);
    EXPECT_DOUBLE_EQ(accuracy(data.labels, predict(*m, data.inputs)), 1.0);
}

TEST(Train, ZeroLearningRateKeepsParameters) {
    auto data = testdata::marker_dataset(40, 2, 10, 3);
    auto table = testdata::random_table(testdata::marker_vocab_size(2, 10), 8, 4);
    auto m = build_classifier(Arch::textcnn, table, micro_zoo(2));
    const auto before = m->params().values();
    TrainSchedule s;
    s.epochs = 2;
    s.adam.lr = 0.0;
    train_classifier(*m, data, data, s);
    EXPECT_EQ(m->params().values(), before);
}

TEST(Train, SameSeedSameCurve) {
    auto data = testdata::marker_dataset(60, 3, 10, 3);
    auto valid = testdata::marker_dataset(20, 3, 10, 8);
    auto table = testdata::random_table(testdata::marker_vocab_size(3, 10), 8, 4);
    TrainSchedule s;
    s.epochs = 3;
    s.adam.lr = 0.01;
    auto run = [&] {
        auto m = build_classifier(Arch::textrnn, table, micro_zoo(3));
        auto r = train_classifier(*m, data, valid, s);
        return std::make_pair(r.curve, m->params().values());
    };
    auto a = run();
    EXPECT_EQ(a, run());
    EXPECT_EQ(a.first.size(), 3u);
}

TEST(Train, Errors) {
    auto table = testdata::random_table(10, 4, 1);
    auto m = build_classifier(Arch::fasttext, table, micro_zoo(2));
    EXPECT_THROW(train_classifier(*m, {}, {}, {}), EmptyDataset);
    LabeledSet bad{{{{1}, 0}}, {7}};
    EXPECT_THROW(train_classifier(*m, bad, {}, {}), InputError);
}

TEST(Train, MaxStepsStopsEarly) {
    auto data = testdata::marker_dataset(64, 2, 10, 3);
    auto table = testdata::random_table(testdata::marker_vocab_size(2, 10), 4, 4);
    auto m = build_classifier(Arch::fasttext, table, micro_zoo(2));
    TrainSchedule s;
    s.epochs = 100;
    s.batch_size = 8;
    s.max_steps = 12;
    auto r = train_classifier(*m, data, {}, s);
    EXPECT_EQ(r.steps, 12u);
    EXPECT_EQ(r.curve.size(), 2u);
}

TEST(FineTune, MarkerDataset) {
    const std::size_t vocab = testdata::marker_vocab_size(3, 20);
    auto train = testdata::marker_dataset(150, 3, 20, 1);
    auto valid = testdata::marker_dataset(60, 3, 20, 2);
    FineTuneConfig cfg;
    cfg.num_classes = 3;
    FineTunedClassifier m(testdata::toy_encoder(vocab), cfg);
    TrainSchedule s;
    s.epochs = 50;
    s.max_steps = 200;
    s.adam.lr = 3e-3;
    auto r = fine_tune(m, vocab, train, valid, s);
    EXPECT_LE(r.steps, 200u);
    EXPECT_GE(macro_f1(valid.labels, predict(m, valid.inputs), 3), 0.95);
}

TEST(FineTune, ZeroStepsIsReproducibleHead) {
    const std::size_t vocab = testdata::marker_vocab_size(3, 20);
    auto ck = testdata::toy_encoder(vocab);
    FineTuneConfig cfg;
    cfg.num_classes = 3;
    FineTunedClassifier a(ck, cfg), b(ck, cfg);
    auto data = testdata::marker_dataset(10, 3, 20, 1);
    TrainSchedule s;
    s.epochs = 0;
    fine_tune(a, vocab, data, {}, s);
    EXPECT_EQ(a.params().values(), b.params().values());
    EXPECT_EQ(a.forward(data.inputs).value(), b.forward(data.inputs).value());
}

TEST(FineTune, Errors) {
    const std::size_t vocab = testdata::marker_vocab_size(3, 20);
    auto ck = testdata::toy_encoder(vocab);
    FineTuneConfig cfg;
    cfg.num_classes = 1;
    EXPECT_THROW(FineTunedClassifier(ck, cfg), InvalidLabelSet);
    cfg.num_classes = 3;
    FineTunedClassifier m(ck, cfg);
    auto data = testdata::marker_dataset(10, 3, 20, 1);
    EXPECT_THROW(fine_tune(m, vocab + 1, data, {}, {}), VocabError);
    EXPECT_THROW(m.forward({{{static_cast<int>(vocab)}, 0}}), VocabError);
}

TEST(FineTune, MeanPoolingSkipsPadding) {
    const std::size_t vocab = testdata::marker_vocab_size(3, 20);
    FineTuneConfig cfg;
    cfg.num_classes = 3;
    cfg.pooling = Pooling::mean_over_nonpad;
    FineTunedClassifier m(testdata::toy_encoder(vocab), cfg);
    // Padding is also hidden from attention, so padded and unpadded inputs pool identically.
    const Tensor a = m.pooled({{9, 10, 11}, 1}).value();
    const Tensor b = m.pooled({{9, 10, 11, 0, 0}, 1}).value();
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], 1e-12);
}

TEST(FineTune, GradCheck) {
    const std::size_t vocab = 12;
    FineTuneConfig cfg;
    cfg.num_classes = 2;
    for (Pooling p : {Pooling::first_position, Pooling::mean_over_nonpad}) {
        cfg.pooling = p;
        mlm::MlmConfig c;
        c.emb_dim = 8;
        c.n_layers = 1;
        c.n_heads = 1;
        c.max_len = 8;
        c.vocab_size = vocab;
        c.dropout = 0;
        FineTunedClassifier m(mlm::snapshot(mlm::MlmModel(c), {}, 0, {}), cfg);
        std::vector<EncodedText> batch = {{{5, 6, 7}, 0}, {{8, 9, 10, 11}, 3}};
        auto loss = [&] { return nn::cross_entropy(m.forward(batch), {1, 0}); };
        EXPECT_LT(nn::grad_check_params(loss, m.params()), 1e-4);
    }
}
