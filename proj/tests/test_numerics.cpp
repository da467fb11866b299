#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "lrtc/nn/gradcheck.hpp"
#include "lrtc/nn/layers.hpp"
#include "lrtc/nn/optim.hpp"
#include "lrtc/nn/serialize.hpp"
#include "support/grad_cases.hpp"

using namespace lrtc;
using namespace lrtc::nn;

TEST(Matmul, IdentityAndHandExample) {
    Tensor x = Tensor::from_rows({{1, 2}, {3, 4}});
    EXPECT_EQ(matmul(constant(Tensor::identity(2)), constant(x)).value(), x);
    Tensor y = matmul(constant(x), constant(Tensor::from_rows({{5}, {6}}))).value();
    EXPECT_EQ(y, Tensor::from_rows({{17}, {39}}));
}

TEST(Matmul, InnerDimensionMismatch) {
    EXPECT_THROW(matmul(constant(Tensor::matrix(2, 3)), constant(Tensor::matrix(2, 2))), ShapeError);
}

TEST(Matmul, Gradients) {
    Var a = parameter(Tensor::from_rows({{1, 2}, {3, 4}}));
    Var b = parameter(Tensor::from_rows({{5}, {6}}));
    backward(sum(matmul(a, b)));
    // dA = 1 * B^T per row, dB = column sums of A
    EXPECT_EQ(a.grad(), Tensor::from_rows({{5, 6}, {5, 6}}));
    EXPECT_EQ(b.grad(), Tensor::from_rows({{4}, {6}}));
}

TEST(Tensor, ShapeChecks) {
    EXPECT_THROW(Tensor({2, 2}, std::vector<double>{1, 2, 3}), ShapeError);
    EXPECT_THROW(Tensor({0, 2}), ShapeError);
    EXPECT_THROW(Tensor::matrix(2, 2).item(), ShapeError);
}

TEST(Softmax, Examples) {
    auto p = softmax(constant(Tensor::from_rows({{0, 0}}))).value();
    EXPECT_DOUBLE_EQ(p[0], 0.5);
    EXPECT_DOUBLE_EQ(p[1], 0.5);
    auto q = softmax(constant(Tensor::from_rows({{1000, 0}}))).value();
    EXPECT_TRUE(q.all_finite());
    EXPECT_NEAR(q[0], 1.0, 1e-15);
    EXPECT_NEAR(q[1], 0.0, 1e-15);
}

TEST(Softmax, ShiftInvarianceAndRowSums) {
    Rng rng(4);
    for (int trial = 0; trial < 100; ++trial) {
        Tensor x = cases::random_matrix(4, 7, rng, -30, 30);
        Tensor shifted = x;
        const double c = rng.uniform(-500, 500);
        for (double &v : shifted.values()) v += c;
        auto p = softmax(constant(x)).value();
        auto ps = softmax(constant(shifted)).value();
        for (std::size_t i = 0; i < p.size(); ++i) {
            EXPECT_NEAR(p[i], ps[i], 1e-12);
            EXPECT_GE(p[i], 0.0);
            EXPECT_LE(p[i], 1.0);
        }
        for (std::size_t r = 0; r < 4; ++r) {
            double s = 0;
            for (double v : p.row(r)) s += v;
            EXPECT_NEAR(s, 1.0, 1e-12);
        }
    }
}

TEST(Softmax, RowsAxisNormalizesColumns) {
    auto p = softmax(constant(Tensor::from_rows({{1, 2}, {3, 5}})), Axis::rows).value();
    EXPECT_NEAR(p(0, 0) + p(1, 0), 1.0, 1e-12);
    EXPECT_NEAR(p(0, 1) + p(1, 1), 1.0, 1e-12);
}

TEST(MaskedSoftmax, HiddenKeysGetZeroWeight) {
    auto p = masked_softmax(constant(Tensor::from_rows({{1, 50, 1}})), {1, 0, 1}).value();
    EXPECT_DOUBLE_EQ(p[1], 0.0);
    EXPECT_DOUBLE_EQ(p[0], 0.5);
    auto none = masked_softmax(constant(Tensor::from_rows({{1, 2}})), {0, 0}).value();
    EXPECT_EQ(none, Tensor::matrix(1, 2));
}

TEST(CrossEntropy, Examples) {
    EXPECT_NEAR(cross_entropy(constant(Tensor::from_rows({{0, 800, 0}})), {1}).item(), 0.0, 1e-12);
    EXPECT_NEAR(cross_entropy(constant(Tensor::from_rows({{0, 0, 0, 0}})), {2}).item(), std::log(4.0), 1e-12);
    EXPECT_NEAR(std::log(4.0), 1.3863, 1e-4);
}

TEST(CrossEntropy, IgnoreIndexAveragesRemainingRows) {
    Tensor logits = Tensor::from_rows({{2, 0}, {0, 5}, {1, 1}});
    const double a = cross_entropy(constant(logits), {0, kIgnoreIndex, 1}).item();
    const double r0 = cross_entropy(constant(Tensor::from_rows({{2, 0}})), {0}).item();
    const double r2 = cross_entropy(constant(Tensor::from_rows({{1, 1}})), {1}).item();
    EXPECT_NEAR(a, (r0 + r2) / 2, 1e-15);
    EXPECT_THROW(cross_entropy(constant(logits), {kIgnoreIndex, kIgnoreIndex, kIgnoreIndex}), UndefinedLoss);
    EXPECT_THROW(cross_entropy(constant(logits), {0, 1}), ShapeError);
}

TEST(Adam, ZeroGradientLeavesParameters) {
    std::vector<Tensor> p = {Tensor::from_rows({{1, -2, 3}})};
    std::vector<Tensor> g = {Tensor::matrix(1, 3)};
    OptimizerState s;
    for (int i = 0; i < 5; ++i) adam_step(p, g, s);
    EXPECT_EQ(p[0], Tensor::from_rows({{1, -2, 3}}));
    EXPECT_EQ(s.step, 5u);
}

TEST(Adam, FirstStepClosedForm) {
    // Step 1: mhat = g, vhat = g^2, update = -lr * g / (|g| + eps).
    std::vector<Tensor> p = {Tensor::from_rows({{0, 0, 0}})};
    std::vector<Tensor> g = {Tensor::from_rows({{0.5, -3, 1e-3}})};
    OptimizerState s;
    s.config.lr = 0.01;
    adam_step(p, g, s);
    for (std::size_t i = 0; i < 3; ++i) {
        const double gi = g[0][i];
        EXPECT_NEAR(p[0][i], -0.01 * gi / (std::abs(gi) + 1e-8), 1e-15);
        EXPECT_NEAR(std::abs(p[0][i]), 0.01, 1e-7);
    }
}

TEST(Adam, DeterministicAndShapeChecked) {
    auto run = [] {
        Rng rng(9);
        std::vector<Tensor> p = {cases::random_matrix(2, 3, rng)};
        OptimizerState s;
        for (int i = 0; i < 10; ++i) {
            std::vector<Tensor> g = {cases::random_matrix(2, 3, rng)};
            adam_step(p, g, s);
        }
        return std::make_pair(p, s);
    };
    auto a = run();
    auto b = run();
    EXPECT_EQ(a.first, b.first);
    EXPECT_EQ(a.second, b.second);

    std::vector<Tensor> p = {Tensor::matrix(2, 2)};
    std::vector<Tensor> g = {Tensor::matrix(2, 3)};
    OptimizerState s;
    EXPECT_THROW(adam_step(p, g, s), ShapeError);
}

TEST(GradCheck, SquareAtThree) {
    auto r = grad_check_detailed([](const Var &x) { return mul(x, x); }, Tensor::scalar(3.0));
    EXPECT_NEAR(r.analytic.item(), 6.0, 0.0);
    EXPECT_LT(r.max_relative_error, 1e-8);
}

TEST(GradCheck, SumOfSoftmaxHasZeroGradient) {
    Rng rng(2);
    auto r = grad_check_detailed([](const Var &x) { return sum(softmax(x)); }, cases::random_matrix(2, 5, rng));
    for (double v : r.analytic.values()) EXPECT_NEAR(v, 0.0, 1e-12);
    for (double v : r.numeric.values()) EXPECT_NEAR(v, 0.0, 1e-9);
}

TEST(GradCheck, CrossEntropyTwoByThree) {
    Rng rng(3);
    const double err =
        grad_check([](const Var &x) { return cross_entropy(x, {2, 0}); }, cases::random_matrix(2, 3, rng, -2, 2));
    EXPECT_LT(err, 1e-6);
}

TEST(GradCheck, EveryOperation) {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        for (const auto &c : cases::op_cases(seed)) {
            EXPECT_LT(grad_check(c.f, c.x, 1e-5), 1e-5) << c.name << " seed " << seed;
        }
    }
}

TEST(Backward, SharedSubgraphVisitedOnce) {
    Var x = parameter(Tensor::scalar(2.0));
    Var y = mul(x, x);
    Var z = add(y, y);  // d/dx = 4x
    backward(z);
    EXPECT_DOUBLE_EQ(x.grad().item(), 8.0);
}

TEST(Dropout, InferenceIdentityAndSeeded) {
    Rng rng(1);
    Var x = constant(Tensor::matrix(20, 20, 1.0));
    EXPECT_EQ(dropout(x, 0.5, rng, false).value(), x.value());
    Rng a(5), b(5);
    auto da = dropout(x, 0.5, a, true).value();
    EXPECT_EQ(da, dropout(x, 0.5, b, true).value());
    for (double v : da.values()) EXPECT_TRUE(v == 0.0 || v == 2.0);
}

TEST(Layers, GradCheckLstmAndTransformerBlock) {
    Rng rng(8);
    ParamStore ps;
    auto lstm = BiLstm::create(ps, "lstm", 3, 2, rng);
    auto block = TransformerBlock::create(ps, "blk", 4, 2, 6, rng);
    Tensor in = cases::random_matrix(3, 3, rng);
    Tensor in4 = cases::random_matrix(3, 4, rng);
    const double e1 = grad_check_params([&] { return sum(mul(lstm(constant(in)).states, lstm(constant(in)).states)); },
                                        ps);
    const double e2 = grad_check_params(
        [&] {
            Var h = block(constant(in4), {1, 1, 0}, 0.0, nullptr);
            return sum(mul(h, constant(in4)));
        },
        ps);
    EXPECT_LT(e1, 1e-5);
    EXPECT_LT(e2, 1e-5);
    EXPECT_THROW(TransformerBlock::create(ps, "bad", 6, 4, 8, rng), ConfigError);
}

TEST(Bundle, RoundTripIsBitExact) {
    Rng rng(6);
    std::vector<NamedTensor> ts = {{"a", cases::random_matrix(3, 2, rng)},
                                   {"b", Tensor::from_rows({{-0.0, 1e-300, 1.0 / 3.0}})}};
    const auto path = (std::filesystem::temp_directory_path() / "lrtc_bundle.bin").string();
    save_bundle(path, {{"step", 7}}, ts);
    auto back = load_bundle(path);
    EXPECT_EQ(back.meta.at("step"), 7);
    ASSERT_EQ(back.tensors.size(), 2u);
    for (std::size_t i = 0; i < 2; ++i) {
        EXPECT_EQ(back.tensors[i].name, ts[i].name);
        EXPECT_EQ(back.tensors[i].value.shape(), ts[i].value.shape());
        for (std::size_t k = 0; k < ts[i].value.size(); ++k) {
            EXPECT_EQ(std::bit_cast<std::uint64_t>(back.tensors[i].value[k]),
                      std::bit_cast<std::uint64_t>(ts[i].value[k]));
        }
    }
    std::ofstream(path) << "garbage";
    EXPECT_THROW(load_bundle(path), InvalidDataset);
}
