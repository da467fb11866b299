#pragma once

#include <numeric>
#include <string>
#include <vector>

#include "lrtc/classify/eval.hpp"
#include "lrtc/classify/zoo.hpp"
#include "lrtc/nn/optim.hpp"
#include "lrtc/rng.hpp"

namespace lrtc::classify {

/// Examples with class indices into the model's label list.
struct LabeledSet {
    std::vector<EncodedText> inputs;
    std::vector<int> labels;

    std::size_t size() const { return inputs.size(); }
    bool empty() const { return inputs.empty(); }
};

struct TrainSchedule {
    std::size_t epochs = 10;
    std::size_t batch_size = 16;
    std::size_t max_steps = 0;  // 0: no limit
    nn::AdamConfig adam{};
    std::uint64_t seed = 1;
};

struct EpochRecord {
    std::size_t epoch = 0;
    std::size_t steps = 0;      // optimizer steps so far
    double train_loss = 0.0;    // mean minibatch loss over the epoch
    double valid_macro_f1 = 0.0;

    bool operator==(const EpochRecord &) const = default;
};

struct TrainResult {
    std::vector<EpochRecord> curve;
    std::size_t best_epoch = 0;     // 0: the initial parameters were kept
    double best_valid_macro_f1 = 0.0;
    std::size_t steps = 0;
};

inline std::size_t argmax_row(const Tensor &logits, std::size_t r) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < logits.cols(); ++c) {
        if (logits(r, c) > logits(r, best)) best = c;
    }
    return best;
}

/// Predicted class index per example.
inline std::vector<int> predict(const TextClassifier &model, const std::vector<EncodedText> &inputs,
                                std::size_t batch_size = 64) {
    std::vector<int> out;
    out.reserve(inputs.size());
    for (std::size_t i = 0; i < inputs.size(); i += batch_size) {
        const std::size_t n = std::min(batch_size, inputs.size() - i);
        std::vector<EncodedText> batch(inputs.begin() + static_cast<std::ptrdiff_t>(i),
                                       inputs.begin() + static_cast<std::ptrdiff_t>(i + n));
        const Tensor logits = model.forward(batch).value();
        for (std::size_t r = 0; r < n; ++r) out.push_back(static_cast<int>(argmax_row(logits, r)));
    }
    return out;
}

/// Macro-F1 over class indices 0..num_classes-1.
inline double macro_f1(const std::vector<int> &gold, const std::vector<int> &pred, std::size_t num_classes) {
    std::vector<std::string> labels, g, p;
    for (std::size_t c = 0; c < num_classes; ++c) labels.push_back(std::to_string(c));
    for (int x : gold) g.push_back(std::to_string(x));
    for (int x : pred) p.push_back(std::to_string(x));
    return evaluate(g, p, labels).macro_f1;
}

inline double accuracy(const std::vector<int> &gold, const std::vector<int> &pred) {
    if (gold.empty()) return 0.0;
    std::size_t hit = 0;
    for (std::size_t i = 0; i < gold.size(); ++i) hit += gold[i] == pred[i];
    return static_cast<double>(hit) / static_cast<double>(gold.size());
}

/// Minibatch cross-entropy training with Adam. After every epoch the model is
/// scored on `valid` (on `train` when `valid` is empty); the best-scoring
/// parameters, earliest on ties, are loaded back at the end.
inline TrainResult train_classifier(TextClassifier &model, const LabeledSet &train, const LabeledSet &valid,
                                    const TrainSchedule &schedule) {
    if (train.empty()) throw EmptyDataset("no training examples");
    if (train.inputs.size() != train.labels.size() || valid.inputs.size() != valid.labels.size()) {
        throw InputError("inputs and labels differ in length");
    }
    if (schedule.batch_size == 0) throw ConfigError("batch_size must be positive");
    for (const auto *set : {&train, &valid}) {
        for (int y : set->labels) {
            if (y < 0 || static_cast<std::size_t>(y) >= model.num_classes()) {
                throw InputError("label index " + std::to_string(y) + " out of range");
            }
        }
    }
    const LabeledSet &selection = valid.empty() ? train : valid;
    auto score = [&] { return macro_f1(selection.labels, predict(model, selection.inputs), model.num_classes()); };

    nn::ParamStore &params = model.params();
    nn::Adam adam(schedule.adam);
    TrainResult result;
    result.best_valid_macro_f1 = score();
    std::vector<Tensor> best = params.values();

    std::vector<std::size_t> order(train.size());
    bool done = false;
    for (std::size_t epoch = 1; epoch <= schedule.epochs && !done; ++epoch) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        Rng rng(derive_seed(schedule.seed, static_cast<std::uint64_t>(epoch)));
        shuffle(order, rng);
        double loss_sum = 0.0;
        std::size_t batches = 0;
        for (std::size_t i = 0; i < order.size(); i += schedule.batch_size) {
            const std::size_t n = std::min(schedule.batch_size, order.size() - i);
            std::vector<EncodedText> xs;
            std::vector<int> ys;
            for (std::size_t k = i; k < i + n; ++k) {
                xs.push_back(train.inputs[order[k]]);
                ys.push_back(train.labels[order[k]]);
            }
            params.zero_grad();
            const Var loss = nn::cross_entropy(model.forward(xs), ys);
            nn::backward(loss);
            adam.step(params);
            loss_sum += loss.item();
            ++batches;
            ++result.steps;
            if (schedule.max_steps != 0 && result.steps >= schedule.max_steps) {
                done = true;
                break;
            }
        }
        EpochRecord rec{epoch, result.steps, loss_sum / static_cast<double>(batches), score()};
        result.curve.push_back(rec);
        if (rec.valid_macro_f1 > result.best_valid_macro_f1) {
            result.best_valid_macro_f1 = rec.valid_macro_f1;
            result.best_epoch = epoch;
            best = params.values();
        }
    }
    params.load_values(best);
    params.zero_grad();
    return result;
}

}  // namespace lrtc::classify
